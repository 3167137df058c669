#ifndef ZFA_GRIDMESH_HPP
#define ZFA_GRIDMESH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "domain.hpp"
#include "geom.hpp"
#include "simplicial.hpp"

namespace zfa::triangulate {

enum class Label : uint8_t { Keep = 0, Discard = 1, Bad = 2 };

// Kuhn/Freudenthal triangulation of the polytope P = all cells of the
// s-grid within one cell of E, where s = domain spacing / refine.
//
// Everything combinatorial is implicit in the grid: simplex id =
// cellRank * n! + permutation, vertex ids are dense over the nodes of P's
// cells.  Vertex positions are grid positions except for the (few) vertices
// moved by the repair step, which live in an override table.  The structure
// never changes after construction; only positions, labels and witnesses do.
class GridTriangulation {
  public:
    GridTriangulation(const domain::DomainE& D, int refine, int64_t maxSimplices);

    const domain::DomainE& domainE() const { return *domain_; }
    int n() const { return n_; }
    int refine() const { return refine_; }
    double cellSize() const { return s_; }
    int simplicesPerCell() const { return n_ == 2 ? 2 : 6; }
    int64_t cellCount() const { return static_cast<int64_t>(pCells_.size()); }
    int64_t simplexCount() const { return cellCount() * simplicesPerCell(); }
    int64_t vertexCount() const { return static_cast<int64_t>(vertexNode_.size() / static_cast<size_t>(n_)); }

    // --- vertices ---
    std::array<int32_t, 3> vertexLattice(int32_t v) const {
        std::array<int32_t, 3> g{0, 0, 0};
        for (int d = 0; d < n_; ++d) g[static_cast<size_t>(d)] = vertexNode_[static_cast<size_t>(v) * n_ + static_cast<size_t>(d)];
        return g;
    }
    Vec vertexPosition(int32_t v) const {
        if (moved_[static_cast<size_t>(v)]) return movedPos_.at(v);
        return latticePos(vertexLattice(v));
    }
    bool vertexMoved(int32_t v) const { return moved_[static_cast<size_t>(v)] != 0; }
    Vec latticePos(const std::array<int32_t, 3>& g) const {
        Vec p;
        for (int d = 0; d < n_; ++d) p[d] = origin_[d] + s_ * g[static_cast<size_t>(d)];
        return p;
    }
    // 0 = not in E, 1 = on boundary of E, 2 = interior (status of the lattice
    // node, independent of any later move)
    uint8_t nodeStatus(int32_t v) const { return nodeStatus_[static_cast<size_t>(v)]; }

    // --- simplices ---
    void vertexIds(int64_t simplex, int32_t out[4]) const;
    void simplexPoints(int64_t simplex, Vec out[4]) const;
    Vec barycenterOf(int64_t simplex) const;
    std::array<int32_t, 3> cellOf(int64_t simplex) const; // global s-cell coords
    domain::CellIdx domainCellOf(int64_t simplex) const;
    bool cellInE(int64_t simplex) const;

    Label label(int64_t simplex) const { return labels_[static_cast<size_t>(simplex)]; }
    void setLabel(int64_t simplex, Label l) { labels_[static_cast<size_t>(simplex)] = l; }
    int64_t countLabel(Label l) const;

    // {first simplex id of the cell, linear cell index}, or {-1,-1} when the
    // cell is outside P
    std::pair<int64_t, int64_t> cellSimplices(const std::array<int32_t, 3>& c) const {
        if (!cellFlag(c, kInP)) return {-1, -1};
        size_t lin = linearCell(c);
        return {static_cast<int64_t>(cellRank_[lin]) * simplicesPerCell(), static_cast<int64_t>(lin)};
    }

    // witness point z_sigma for Discard simplices (default: barycenter)
    Vec witness(int64_t simplex) const;
    void setWitness(int64_t simplex, const Vec& w);
    bool hasWitnessOverride(int64_t simplex) const { return witnessOverride_.count(simplex) > 0; }

    // --- cover (one member per cell, sup-norm radius 3s) ---
    double memberRadius() const { return 3.0 * s_; }
    Vec memberCenter(int64_t simplex) const;
    Vec memberCenterOfCell(const std::array<int32_t, 3>& cell) const;

    // --- repair support ---
    void moveVertex(int32_t v, const Vec& newPos);
    // simplices incident to vertex v (searches the <=2^n cells around it)
    std::vector<int64_t> incidentSimplices(int32_t v) const;
    void markDirtyAround(int32_t v);
    bool vertexInteriorToP(int32_t v) const;

    // --- location ---
    struct Hit {
        int64_t simplex = -1;
        simplicial::BarycentricCoords coords;
    };
    std::optional<Hit> locate(const Vec& p) const;

    // every simplex id of the cell containing p plus dirty-cell candidates
    // around it; used by the verifier's independent scan
    void candidatesNear(const Vec& p, std::vector<int64_t>& out) const;

    // small-scale export for validation, subdivision and the generic kernel
    simplicial::MeshComplex exportComplex() const;

    // iteration helper: rank -> linear bbox index -> global cell coords
    std::array<int32_t, 3> cellAtRank(int64_t rank) const;

  private:
    friend struct GridMeshTestPeek;

    int32_t nodeIdAt(const std::array<int32_t, 3>& g) const;
    size_t linearCell(const std::array<int32_t, 3>& c) const;
    bool cellInBounds(const std::array<int32_t, 3>& c) const;
    void kuhnVertices(const std::array<int32_t, 3>& cell, int perm, std::array<int32_t, 3> latticeOut[4]) const;
    bool cellFlag(const std::array<int32_t, 3>& c, uint8_t flag) const;
    std::optional<Hit> tryCell(const std::array<int32_t, 3>& c, const Vec& p, double slack) const;

    const domain::DomainE* domain_;
    int n_;
    int refine_;
    double s_;
    Vec origin_;

    std::array<int32_t, 3> cellLo_{}, cellHi_{}; // bbox of candidate cells, [lo, hi)
    std::array<int32_t, 3> nodeDims_{};          // node array extents (hi - lo + 1)
    std::array<int32_t, 3> cellDims_{};

    enum : uint8_t { kInP = 1, kInE = 2, kDirty = 4 };
    std::vector<uint8_t> cellFlags_;  // dense over cell bbox
    std::vector<int32_t> cellRank_;   // dense over cell bbox, -1 if not in P
    std::vector<int32_t> pCells_;     // rank -> linear cell index

    std::vector<int32_t> nodeId_;     // dense over node bbox, -1 if unused
    std::vector<int32_t> vertexNode_; // flat, stride n
    std::vector<uint8_t> moved_;
    std::unordered_map<int32_t, Vec> movedPos_;
    std::vector<uint8_t> nodeStatus_;

    std::vector<Label> labels_;
    std::unordered_map<int64_t, Vec> witnessOverride_;
    std::unordered_map<int32_t, std::vector<int64_t>> dirtyCandidates_; // linear cell -> simplex ids
};

int64_t floorDiv(int64_t a, int64_t b);

} // namespace zfa::triangulate

#endif
