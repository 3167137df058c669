#ifndef ZFA_APPROXIMATE_HPP
#define ZFA_APPROXIMATE_HPP

#include <memory>
#include <unordered_map>

#include "field.hpp"
#include "gridmesh.hpp"
#include "triangulate.hpp"

namespace zfa::approximate {

using triangulate::GridTriangulation;
using triangulate::Label;

// K = Keep n-simplices plus the boundaries of the Discard ones (and all
// faces).  Q is the union of the Keep simplices; the approximant equals f
// there exactly.
struct ComplexK {
    std::vector<int32_t> boundaryFaces;   // flat n-tuples of grid vertex ids, deduplicated
    std::vector<int64_t> boundaryParents; // owning Discard simplex per face
    std::vector<uint8_t> vertexInQ;       // grid vertex id -> incident to a Keep simplex
    int64_t keepCount = 0;
    int64_t discardCount = 0;
};

// Builds K, asserts Q is inside the interior of E, and verifies every
// Discard witness (strictly interior, outside E).  Throws if any Bad
// simplex is left.
ComplexK buildK(const GridTriangulation& T);

// The retraction h: identity on |K|, radial projection from the witness
// z_sigma inside discarded simplices.  z must lie in |L|.
Vec retractH(const GridTriangulation& T, const Vec& z);

struct PartitionBreakdown {
    double nuW = 0.0;      // numerator of phi_W
    double nuSum = 0.0;    // total numerator mass
    double phiW = 0.0;
    double phiSum = 0.0;   // sum of all phi values (should be 1)
    int activeMembers = 0;
};

// Partition-of-unity evaluator and the approximant
//   g~(x) = phi_W(x) f(x) + sum_V phi_V(x) f(z_V)
// with distance-function numerators: nu_V = min(dist_inf(x, B^c), dist_2(x, Q)),
// nu_W = dist_2(x, complement of interior E).
class GTildeEvaluator {
  public:
    GTildeEvaluator(const GridTriangulation& T, const ComplexK& K, const domain::FieldSpec& f);

    Vec eval(const Vec& x, PartitionBreakdown* breakdown = nullptr) const;
    double distToQ(const Vec& x, double cap) const;
    const domain::FieldSpec* field() const { return &f_; }

  private:
    const GridTriangulation& T_;
    const ComplexK& K_;
    const domain::FieldSpec& f_;
    double radius_;
    // member center and f(center) per P-cell, filled on demand
    mutable std::unordered_map<int64_t, std::pair<Vec, Vec>> memberMemo_;
};

double pointSimplexDistance(const Vec& p, const Vec pts[], int count, int n);

// PL snapshot of g~ on the subdivision K-hat.  levels == 0 references the
// grid triangulation directly; levels > 0 materializes the subdivided
// complex (small runs only).
struct ApproximantG {
    int n = 2;
    int levels = 0;
    double snapError = 0.0;
    int64_t sampleCount = 0;

    const GridTriangulation* grid = nullptr;
    const ComplexK* K = nullptr;

    // mesh path (levels > 0)
    std::shared_ptr<simplicial::MeshComplex> mesh;
    std::vector<int32_t> meshBoundaryFaces;   // (n-1)-simplex indices realizing boundary chains
    std::vector<int64_t> meshBoundaryParents; // owning Discard id in the grid triangulation
    std::vector<int64_t> meshKeepParents;     // mesh n-simplex -> grid Keep simplex id

    std::vector<double> values; // stride n, per view vertex: the pre-shift g~ snapshot
    Vec shift{};                // avoidance constant, applied on read

    int64_t viewVertexCount() const;
    Vec vertexPos(int64_t v) const;
    // value of the (possibly shifted) PL map at a vertex; the per-component
    // rounding here is the authoritative definition the certificates use
    Vec valueAt(int64_t v) const {
        Vec out{};
        for (int d = 0; d < n; ++d)
            out[d] = values[static_cast<size_t>(v) * n + static_cast<size_t>(d)] + shift[d];
        return out;
    }

    int64_t keepSimplexCount() const;
    int64_t boundaryFaceCount() const;

    // fn(tag, viewVertexIds) over Keep-descended n-simplices / boundary faces
    template <typename Fn> void forEachKeep(Fn&& fn) const;
    template <typename Fn> void forEachBoundaryFace(Fn&& fn) const;

    // PL evaluation at a point of |K| (callers retract first)
    Vec evalAt(const Vec& z) const;
    void buildLocator(); // mesh path only

  private:
    struct MeshLocator;
    std::shared_ptr<MeshLocator> locator_;
};

ApproximantG plSnap(const GridTriangulation& T, const ComplexK& K, const GTildeEvaluator& g,
                    double snapBudget, int levelsCap, int64_t maxSimplices, uint64_t seed);

// Materializes K as a face-closed complex whose n-simplices are the Keep
// simplices and whose marked (n-1)-simplices realize the Discard boundary
// chains.  Vertex ids coincide with grid vertex ids.
simplicial::MeshComplex exportK(const GridTriangulation& T, const ComplexK& K,
                                std::vector<int32_t>& boundaryFacesOut,
                                std::vector<int64_t>& boundaryParentsOut,
                                std::vector<int64_t>& keepParentsOut);

// --- template bodies ---------------------------------------------------------

template <typename Fn> void ApproximantG::forEachKeep(Fn&& fn) const {
    int32_t ids[4];
    if (levels == 0) {
        const int64_t count = grid->simplexCount();
        for (int64_t s = 0; s < count; ++s) {
            if (grid->label(s) != Label::Keep) continue;
            grid->vertexIds(s, ids);
            fn(s, ids);
        }
    } else {
        const int32_t count = mesh->simplexCount(n);
        for (int32_t i = 0; i < count; ++i) {
            auto tup = mesh->simplexVertices(n, i);
            for (int j = 0; j <= n; ++j) ids[j] = tup[static_cast<size_t>(j)];
            fn(static_cast<int64_t>(i), ids);
        }
    }
}

template <typename Fn> void ApproximantG::forEachBoundaryFace(Fn&& fn) const {
    int32_t ids[4];
    if (levels == 0) {
        const size_t count = K->boundaryFaces.size() / static_cast<size_t>(n);
        for (size_t i = 0; i < count; ++i) {
            for (int j = 0; j < n; ++j) ids[j] = K->boundaryFaces[i * static_cast<size_t>(n) + static_cast<size_t>(j)];
            fn(static_cast<int64_t>(i), ids);
        }
    } else {
        for (size_t i = 0; i < meshBoundaryFaces.size(); ++i) {
            auto tup = mesh->simplexVertices(n - 1, meshBoundaryFaces[i]);
            for (int j = 0; j < n; ++j) ids[j] = tup[static_cast<size_t>(j)];
            fn(static_cast<int64_t>(i), ids);
        }
    }
}

} // namespace zfa::approximate

#endif
