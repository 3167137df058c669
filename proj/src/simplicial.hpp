#ifndef ZFA_SIMPLICIAL_HPP
#define ZFA_SIMPLICIAL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geom.hpp"

namespace zfa::simplicial {

// Tolerances used by the geometric predicates.
inline constexpr double kRankTol = 1e-10;        // relative, independence tests
inline constexpr double kAffineHullTol = 1e-9;   // distance to affine hull, k < n
inline constexpr double kInteriorTol = 1e-12;    // strict-interior barycentric margin
inline constexpr double kContainTol = 1e-10;     // containment slack for location

struct SimplexRef {
    int dim = -1;
    int32_t idx = -1;
    bool operator==(const SimplexRef&) const = default;
};

struct BarycentricCoords {
    // lambdas[0..k]; sums to 1 within 1e-12 by construction
    std::array<double, 4> lambda{0, 0, 0, 0};
    int count = 0;
    double min() const {
        double m = lambda[0];
        for (int i = 1; i < count; ++i) m = std::min(m, lambda[i]);
        return m;
    }
};

enum class Location { Outside, Interior, OnBoundary };

struct LocateResult {
    Location where = Location::Outside;
    // for OnBoundary: bit i set iff vertex i spans the minimal containing face
    uint32_t faceMask = 0;
    BarycentricCoords coords;
};

// Embedded finite simplicial complex in R^n (n = 2 or 3), all dimensions
// stored explicitly, face-closed by construction of the builders below.
struct MeshComplex {
    int n = 2;
    std::vector<Vec> vertices;
    // simplices[d]: flat (d+1)-tuples of vertex ids
    std::array<std::vector<int32_t>, 4> simplices;
    // incident simplices per vertex (all dimensions, excludes the vertex's own 0-simplex)
    std::vector<std::vector<SimplexRef>> star;

    int32_t simplexCount(int d) const {
        return static_cast<int32_t>(simplices[static_cast<size_t>(d)].size() / static_cast<size_t>(d + 1));
    }
    std::span<const int32_t> simplexVertices(int d, int32_t idx) const {
        return {simplices[static_cast<size_t>(d)].data() + static_cast<size_t>(idx) * (d + 1),
                static_cast<size_t>(d + 1)};
    }
    void buildStars();
};

struct SubComplex {
    const MeshComplex* parent = nullptr;
    std::array<std::vector<int32_t>, 4> selected; // simplex indices per dimension
};

struct ValidationIssue {
    std::string what;
    SimplexRef a, b;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// --- predicates ------------------------------------------------------------

// True iff the affine-dependence system has only the trivial solution.
// More than n+1 points in R^n are never independent (returned as value).
bool geometricIndependence(std::span<const Vec> pts, int n);

// Barycentric coordinates of p in the simplex spanned by `verts` (k+1 points
// in R^n).  For k < n the point must lie within kAffineHullTol of the affine
// hull, otherwise Error(Internal) is thrown.  Degenerate simplices throw.
BarycentricCoords barycentric(std::span<const Vec> verts, const Vec& p, int n);

// Like `barycentric` but reports hull misses as Outside instead of throwing.
LocateResult locateInSimplex(std::span<const Vec> verts, const Vec& p, int n);

// Signed k!-scaled volume for k = n only; positive orientation convention.
double signedVolume(std::span<const Vec> verts, int n);
double simplexVolume(std::span<const Vec> verts, int n); // absolute, any k <= n

// All 2^(k+1)-1 nonempty vertex subsets of a tuple, grouped by dimension.
std::vector<std::vector<int32_t>> facesOf(std::span<const int32_t> tuple);

// --- complex-level operations ----------------------------------------------

struct ValidateOptions {
    bool requirePureTop = false; // insist every maximal simplex has dim n
};

// Checks face closure (condition 1), pairwise shared-face intersections
// (condition 2, via exact LP feasibility on bbox-overlapping maximal pairs),
// and per-simplex geometric independence.  Condition 3 holds by finiteness.
ValidationReport validateComplex(const MeshComplex& K, const ValidateOptions& opt = {});

SubComplex skeleton(const MeshComplex& K, int d);

// All simplices (of every dimension) having v as a vertex.
std::vector<SimplexRef> vertexStar(const MeshComplex& K, int32_t v);

struct Subdivision {
    MeshComplex complex;
    // ancestry[d][idx] = simplex of the PARENT complex minimally containing
    // child (d, idx); composes across repeated subdivision.
    std::array<std::vector<SimplexRef>, 4> ancestry;
    // sameDim[d] maps parent d-simplex i to its d-dimensional children,
    // stored flat with stride childrenPerParent[d].
    std::array<std::vector<int32_t>, 4> sameDim;
    std::array<int32_t, 4> childrenPerParent{1, 1, 1, 1};

    std::span<const int32_t> childrenOf(int d, int32_t parentIdx) const {
        int32_t stride = childrenPerParent[static_cast<size_t>(d)];
        return {sameDim[static_cast<size_t>(d)].data() + static_cast<size_t>(parentIdx) * stride,
                static_cast<size_t>(stride)};
    }
};

// One round of edgewise (red) subdivision; apply `levels` times for order
// 2^levels.  Preserves the polytope pointwise and keeps aspect ratios
// bounded across levels.
Subdivision subdivideOnce(const MeshComplex& K);
Subdivision subdivideUniform(const MeshComplex& K, int levels);

// --- point location ---------------------------------------------------------

class ComplexLocator {
  public:
    explicit ComplexLocator(const MeshComplex& K);

    // Returns a top-dimensional simplex containing p (ties on shared faces
    // resolved to the lowest simplex id; PL evaluation does not depend on
    // the choice).  nullopt when p is outside the polytope.
    std::optional<std::pair<int32_t, BarycentricCoords>> locate(const Vec& p) const;

  private:
    const MeshComplex& K_;
    int topDim_ = 0;
    Vec lo_{}, hi_{};
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1, nz_ = 1;
    std::vector<std::vector<int32_t>> buckets_;
    size_t bucketOf(int ix, int iy, int iz) const;
};

} // namespace zfa::simplicial

#endif
