#include "triangulate.hpp"

#include <algorithm>
#include <cmath>

namespace zfa::triangulate {

CoverConstraint coverConstraint(double cellSize, double lipschitz, double epsilon) {
    CoverConstraint c;
    c.radius = 3.0 * cellSize;
    c.lipschitz = lipschitz;
    c.epsilon = epsilon;
    return c;
}

int chooseRefinement(double domainSpacing, double lipschitz, double epsilon) {
    if (lipschitz == 0.0) return 1;
    double bound = 120.0 * lipschitz * domainSpacing / epsilon;
    if (bound >= 1e9) throw Error(ErrClass::Resource, "required refinement exceeds 1e9 cells per axis");
    int m = static_cast<int>(std::floor(bound)) + 1;
    return std::max(1, m);
}

GridTriangulation baseTriangulation(const domain::DomainE& D, int refine, int64_t maxSimplices) {
    return GridTriangulation(D, refine, maxSimplices);
}

ClassifyStats classifySimplices(GridTriangulation& T) {
    ClassifyStats st;
    const int64_t count = T.simplexCount();
    const int n = T.n();
    int32_t ids[4];
    for (int64_t s = 0; s < count; ++s) {
        if (!T.cellInE(s)) {
            // sigma lies in a closed cell outside the full-cell part of E, so
            // its open interior misses E entirely; the barycenter witnesses it
            T.setLabel(s, Label::Discard);
            ++st.discard;
            continue;
        }
        T.vertexIds(s, ids);
        bool touchesBoundary = false;
        for (int j = 0; j <= n; ++j) {
            uint8_t status = T.nodeStatus(ids[j]);
            if (status == 0)
                throw Error(ErrClass::Internal, "vertex of a full-cell simplex not in E");
            if (status == 1) touchesBoundary = true;
        }
        if (touchesBoundary) {
            T.setLabel(s, Label::Bad);
            ++st.bad;
        } else {
            T.setLabel(s, Label::Keep);
            ++st.keep;
        }
    }
    return st;
}

bool simplexInsideMember(const GridTriangulation& T, int64_t simplex) {
    Vec pts[4];
    T.simplexPoints(simplex, pts);
    Vec center = T.memberCenter(simplex);
    double r = T.memberRadius();
    for (int j = 0; j <= T.n(); ++j)
        if (distInf(pts[j], center) >= r) return false;
    return true;
}

std::optional<Vec> witnessSearch(const domain::DomainE& D, const Vec pts[4], int count, int toward) {
    Vec bary{};
    for (int j = 0; j < count; ++j) bary += pts[j];
    bary = bary * (1.0 / count);
    // walking t -> 1 keeps the point strictly interior with minimum
    // barycentric coordinate (1-t)/count, so stop once that hits the margin
    double t = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
        if ((1.0 - t) / count <= kWitnessInteriorTol) break;
        Vec w = bary + (pts[toward] - bary) * t;
        if (!D.pointInE(w)) return w;
        t = t == 0.0 ? 0.5 : t + (1.0 - t) * 0.5;
    }
    return std::nullopt;
}

namespace {

// Sum of outward unit normals of the boundary facets of E incident to the
// lattice node g (s-grid at refinement m).  Zero at balanced configurations
// like checkerboard corners.
Vec outwardNormalSum(const domain::DomainE& D, const std::array<int32_t, 3>& g, int m) {
    const int n = D.grid().n;
    Vec sum{};
    int32_t q[3], rem[3];
    for (int d = 0; d < n; ++d) {
        q[d] = static_cast<int32_t>(floorDiv(g[static_cast<size_t>(d)], m));
        rem[d] = static_cast<int32_t>(g[static_cast<size_t>(d)] - static_cast<int64_t>(q[d]) * m);
    }
    for (int a = 0; a < n; ++a) {
        if (rem[a] != 0) continue; // node not on a domain-grid plane of this axis
        // enumerate domain facets with normal axis `a` containing the node
        int32_t lo[3], hi[3];
        for (int d = 0; d < n; ++d) {
            if (d == a) {
                lo[d] = hi[d] = q[d];
            } else if (rem[d] == 0) {
                lo[d] = q[d] - 1;
                hi[d] = q[d];
            } else {
                lo[d] = hi[d] = q[d];
            }
        }
        int32_t bz0 = n == 3 ? lo[2] : 0, bz1 = n == 3 ? hi[2] : 0;
        for (int32_t bz = bz0; bz <= bz1; ++bz)
            for (int32_t by = lo[1]; by <= hi[1]; ++by)
                for (int32_t bx = lo[0]; bx <= hi[0]; ++bx) {
                    domain::CellIdx below{bx, by, bz};
                    below[static_cast<size_t>(a)] -= 1;
                    domain::CellIdx above{bx, by, bz};
                    bool fb = D.cellFull(below), fa = D.cellFull(above);
                    if (fb && !fa) sum[a] += 1.0;
                    if (fa && !fb) sum[a] -= 1.0;
                }
    }
    return sum;
}

} // namespace

RepairReport repairBadSimplices(GridTriangulation& T) {
    RepairReport rep;
    const int n = T.n();
    const double s = T.cellSize();
    const domain::DomainE& D = T.domainE();
    rep.keepBefore = T.countLabel(Label::Keep);

    // collect boundary vertices of Bad simplices, ascending vertex id
    std::vector<uint8_t> wanted(static_cast<size_t>(T.vertexCount()), 0);
    {
        const int64_t count = T.simplexCount();
        int32_t ids[4];
        for (int64_t sid = 0; sid < count; ++sid) {
            if (T.label(sid) != Label::Bad) continue;
            T.vertexIds(sid, ids);
            bool any = false;
            for (int j = 0; j <= n; ++j) {
                if (T.nodeStatus(ids[j]) == 1) {
                    wanted[static_cast<size_t>(ids[j])] = 1;
                    any = true;
                }
            }
            if (!any)
                throw Error(ErrClass::Internal, "Bad simplex without a boundary vertex");
        }
    }

    const double rFloor = s * std::ldexp(1.0, -kMoveFloorShift);
    std::vector<std::pair<int64_t, Vec>> tentativeWitnesses;

    for (int64_t v = 0; v < T.vertexCount(); ++v) {
        if (!wanted[static_cast<size_t>(v)]) continue;
        int32_t vid = static_cast<int32_t>(v);
        Vec oldPos = T.vertexPosition(vid);
        auto g = T.vertexLattice(vid);

        std::vector<int64_t> incident = T.incidentSimplices(vid);
        // with a one-cell margin, boundary-of-E vertices are always interior
        // to |P|, so the star move cannot change the polytope
        if (!T.vertexInteriorToP(vid))
            throw Error(ErrClass::Internal, "repair vertex on the boundary of the polytope P");

        // candidate directions: averaged outward normal first, then every
        // lattice direction, lexicographic
        std::vector<Vec> dirs;
        Vec avg = outwardNormalSum(D, g, T.refine());
        if (norm2(avg) > 0.0) dirs.push_back(avg * (1.0 / norm2(avg)));
        int zr = n == 3 ? 1 : 0;
        for (int dz = -zr; dz <= zr; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    Vec u{{static_cast<double>(dx), static_cast<double>(dy), static_cast<double>(dz)}};
                    dirs.push_back(u * (1.0 / norm2(u)));
                }

        bool moved = false;
        Vec pts[4];
        int32_t ids[4];
        for (double r = s * kMoveStartFraction; r >= rFloor && !moved; r *= 0.5, ++rep.halvings) {
            for (const Vec& u : dirs) {
                Vec cand = oldPos + u * r;
                if (D.pointInE(cand)) continue;
                bool ok = true;
                tentativeWitnesses.clear();
                for (int64_t sid : incident) {
                    T.vertexIds(sid, ids);
                    T.simplexPoints(sid, pts);
                    int slot = -1;
                    for (int j = 0; j <= n; ++j)
                        if (ids[j] == vid) slot = j;
                    pts[slot] = cand;
                    // (a) orientation
                    if (simplicial::signedVolume({pts, static_cast<size_t>(n + 1)}, n) <= 0.0) {
                        ok = false;
                        break;
                    }
                    // (b) stay inside the assigned cover member
                    Vec center = T.memberCenter(sid);
                    double rad = T.memberRadius();
                    for (int j = 0; j <= n && ok; ++j)
                        if (distInf(pts[j], center) >= rad) ok = false;
                    if (!ok) break;
                    // (c) previously-Discard neighbors must retain a witness
                    if (T.label(sid) == Label::Discard) {
                        auto w = witnessSearch(D, pts, n + 1, slot);
                        if (!w) {
                            ok = false;
                            break;
                        }
                        tentativeWitnesses.emplace_back(sid, *w);
                    }
                }
                if (!ok) continue;
                T.moveVertex(vid, cand);
                for (auto& [sid, w] : tentativeWitnesses) T.setWitness(sid, w);
                T.markDirtyAround(vid);
                VertexPerturbation p;
                p.vertex = vid;
                p.oldPos = oldPos;
                p.newPos = cand;
                p.radius = r;
                p.affected = incident;
                rep.perturbations.push_back(std::move(p));
                ++rep.movedVertices;
                moved = true;
                break;
            }
        }
        if (!moved)
            throw Error(ErrClass::Internal,
                        "repair: move radius underflowed at vertex " + std::to_string(v) +
                            "; the domain is degenerate at that corner");
    }

    // relabel: every former Bad simplex now has a vertex outside E, so its
    // interior meets the complement; find the witness along that vertex
    const int64_t count = T.simplexCount();
    int32_t ids[4];
    Vec pts[4];
    for (int64_t sid = 0; sid < count; ++sid) {
        if (T.label(sid) != Label::Bad) continue;
        T.vertexIds(sid, ids);
        T.simplexPoints(sid, pts);
        int toward = -1;
        for (int j = 0; j <= n; ++j)
            if (T.vertexMoved(ids[j])) {
                toward = j;
                break;
            }
        if (toward < 0)
            throw Error(ErrClass::Internal, "former Bad simplex has no moved vertex");
        auto w = witnessSearch(D, pts, n + 1, toward);
        if (!w)
            throw Error(ErrClass::Internal, "witness search failed on a repaired simplex");
        T.setLabel(sid, Label::Discard);
        T.setWitness(sid, *w);
    }

    rep.keepAfter = T.countLabel(Label::Keep);
    rep.discardAfter = T.countLabel(Label::Discard);
    rep.residualBad = T.countLabel(Label::Bad);
    if (rep.residualBad != 0)
        throw Error(ErrClass::Internal, "repair left Bad simplices behind");
    if (rep.keepAfter != rep.keepBefore)
        throw Error(ErrClass::Internal, "repair must not change the Keep set");
    return rep;
}

} // namespace zfa::triangulate
