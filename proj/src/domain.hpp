#ifndef ZFA_DOMAIN_HPP
#define ZFA_DOMAIN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "geom.hpp"

namespace zfa::domain {

using CellIdx = std::array<int32_t, 3>; // unused axes zero

struct GridSpec {
    int n = 2;
    Vec origin{};
    double spacing = 1.0;
    std::array<int32_t, 3> shape{1, 1, 1}; // cell extents per axis

    Vec nodePos(const CellIdx& node) const {
        Vec p;
        for (int d = 0; d < n; ++d) p[d] = origin[d] + spacing * node[static_cast<size_t>(d)];
        return p;
    }
};

// A lower-dimensional grid face: a node (dim 0), a unit edge along `axis`
// (dim 1), or for n=3 a unit square with normal `axis` (dim 2).
struct GridFace {
    int dim = 0;
    int axis = 0; // edge direction, or facet normal
    CellIdx base{};
};

// Grid-aligned realization of E: a finite union of closed full cells plus
// optional closed lower-dimensional grid faces.  All membership queries are
// exact in the integer grid model; floating-point inputs are snapped to grid
// planes within kSnapTol (in units of the spacing) first.
class DomainE {
  public:
    static constexpr double kSnapTol = 1e-12;

    DomainE(GridSpec grid, std::vector<CellIdx> fullCells, std::vector<GridFace> lowerFaces);

    const GridSpec& grid() const { return grid_; }
    const std::vector<CellIdx>& fullCells() const { return fullCells_; }
    const std::vector<GridFace>& lowerFaces() const { return lowerFaces_; }
    bool hasInterior() const { return !fullCells_.empty(); }

    bool cellFull(const CellIdx& c) const;

    // exact node-level queries (node = grid vertex index)
    bool nodeInE(const CellIdx& node) const;
    bool nodeInInteriorE(const CellIdx& node) const;
    bool nodeOnBoundaryE(const CellIdx& node) const { return nodeInE(node) && !nodeInInteriorE(node); }

    // point-level queries
    bool pointInE(const Vec& p) const;
    bool pointInInteriorE(const Vec& p) const;

    // exact queries for nodes of the m-fold refined grid (coordinates are
    // integer multiples of spacing/m); no floating point involved
    bool latticeInE(const CellIdx& g, int m) const;
    bool latticeInInterior(const CellIdx& g, int m) const;

    // Euclidean distance from p to the complement of the interior of E
    // (zero when p is not interior).  Exact up to the box-distance formula.
    double distToNonInterior(const Vec& p) const;

    // A nearest point of E to `p` in the sup norm, searched over the 3^n
    // block of domain cells around `homeCell`; deterministic tie-breaking.
    // Returns nullopt if the block misses E entirely.
    std::optional<Vec> nearestEPointInBlock(const Vec& p, const CellIdx& homeCell) const;

    // axis-aligned bounding box of E, in cell indices [lo, hi)
    void cellBounds(CellIdx& lo, CellIdx& hi) const;

  private:
    struct MinimalFace {
        // per axis: snapped node coordinate or the containing cell interval
        std::array<int32_t, 3> coord{};  // node index if snapped, floor otherwise
        std::array<bool, 3> snapped{};
    };
    MinimalFace minimalFace(const Vec& p) const;
    MinimalFace latticeFace(const CellIdx& g, int m) const;
    bool faceListedWithin(const MinimalFace& mf) const;
    bool nodeInFacesOnly(const CellIdx& node) const;
    template <typename Fn>
    void forIncidentCells(const MinimalFace& mf, Fn&& fn) const;

    static int64_t packCell(const CellIdx& c);

    GridSpec grid_;
    std::vector<CellIdx> fullCells_;
    std::vector<GridFace> lowerFaces_;
    std::unordered_set<int64_t> fullSet_;
    std::unordered_set<int64_t> vertexFaces_;
    std::array<std::unordered_set<int64_t>, 3> edgeFaces_;  // by axis
    std::array<std::unordered_set<int64_t>, 3> facetFaces_; // by normal axis
    CellIdx cellLo_{}, cellHi_{};
};

} // namespace zfa::domain

#endif
