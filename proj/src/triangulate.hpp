#ifndef ZFA_TRIANGULATE_HPP
#define ZFA_TRIANGULATE_HPP

#include <cstdint>
#include <vector>

#include "field.hpp"
#include "gridmesh.hpp"

namespace zfa::triangulate {

// Repair loop constants.
inline constexpr double kMoveStartFraction = 0.25;    // initial move radius r = s/4
inline constexpr int kMoveFloorShift = 20;            // abort below s * 2^-20
inline constexpr double kWitnessInteriorTol = 1e-9;   // strict-interior margin for witnesses

// Cover geometry: one member per P-cell, sup-norm radius 3s, center at a
// nearest point of E to the cell center.  The oscillation constraint
// 10 * radius * L_f < epsilon/4 bounds the admissible cell size by
// s < epsilon / (120 * L_f).
struct CoverConstraint {
    double radius = 0.0;
    double lipschitz = 0.0;
    double epsilon = 0.0;
    bool satisfied() const { return lipschitz == 0.0 || 10.0 * radius * lipschitz < epsilon / 4.0; }
};

CoverConstraint coverConstraint(double cellSize, double lipschitz, double epsilon);

// Smallest integer refinement of the domain spacing meeting the constraint.
int chooseRefinement(double domainSpacing, double lipschitz, double epsilon);

GridTriangulation baseTriangulation(const domain::DomainE& D, int refine, int64_t maxSimplices);

struct ClassifyStats {
    int64_t keep = 0, discard = 0, bad = 0;
};

// Exact labels from the grid model: Discard outside full cells (barycenter
// witness), Keep strictly inside the interior, Bad when the simplex touches
// the boundary of E.
ClassifyStats classifySimplices(GridTriangulation& T);

struct VertexPerturbation {
    int32_t vertex = -1;
    Vec oldPos, newPos;
    double radius = 0.0;
    std::vector<int64_t> affected;
};

struct RepairReport {
    int64_t movedVertices = 0;
    int64_t halvings = 0;
    int64_t keepBefore = 0, keepAfter = 0;
    int64_t discardAfter = 0;
    int64_t residualBad = 0;
    std::vector<VertexPerturbation> perturbations;
};

// Lemma-3 style repair: move every boundary vertex of a Bad simplex out of E
// by a certified PL vertex perturbation, then relabel all former Bad
// simplices Discard with recomputed witnesses.
RepairReport repairBadSimplices(GridTriangulation& T);

// sup-norm check that a simplex sits strictly inside its assigned member
bool simplexInsideMember(const GridTriangulation& T, int64_t simplex);

// deterministic shrinking search from the barycenter toward vertex j for a
// strictly interior point outside E; nullopt if none is found
std::optional<Vec> witnessSearch(const domain::DomainE& D, const Vec pts[4], int count, int toward);

} // namespace zfa::triangulate

#endif
