#include "domain.hpp"

#include <algorithm>
#include <cmath>

namespace zfa::domain {

int64_t DomainE::packCell(const CellIdx& c) {
    // 21 bits per axis, offset so indices down to -2^20 pack cleanly
    const int64_t off = 1 << 20;
    return ((c[0] + off) << 42) | ((c[1] + off) << 21) | (c[2] + off);
}

DomainE::DomainE(GridSpec grid, std::vector<CellIdx> fullCells, std::vector<GridFace> lowerFaces)
    : grid_(std::move(grid)), fullCells_(std::move(fullCells)), lowerFaces_(std::move(lowerFaces)) {
    if (grid_.n != 2 && grid_.n != 3) throw Error(ErrClass::Io, "dimension must be 2 or 3");
    if (!(grid_.spacing > 0.0)) throw Error(ErrClass::Io, "grid spacing must be positive");
    if (grid_.n == 2) grid_.shape[2] = 1;
    for (int d = 0; d < grid_.n; ++d)
        if (grid_.shape[static_cast<size_t>(d)] < 1) throw Error(ErrClass::Io, "grid shape extents must be >= 1");

    std::sort(fullCells_.begin(), fullCells_.end());
    fullCells_.erase(std::unique(fullCells_.begin(), fullCells_.end()), fullCells_.end());
    for (const CellIdx& c : fullCells_) {
        for (int d = 0; d < grid_.n; ++d)
            if (c[static_cast<size_t>(d)] < 0 || c[static_cast<size_t>(d)] >= grid_.shape[static_cast<size_t>(d)])
                throw Error(ErrClass::Io, "cell index outside grid shape");
        if (grid_.n == 2 && c[2] != 0) throw Error(ErrClass::Io, "2d cell index must have two entries");
        fullSet_.insert(packCell(c));
    }

    auto faceKey = [](const GridFace& f) { return std::make_tuple(f.dim, f.axis, f.base); };
    std::sort(lowerFaces_.begin(), lowerFaces_.end(),
              [&](const GridFace& a, const GridFace& b) { return faceKey(a) < faceKey(b); });
    lowerFaces_.erase(std::unique(lowerFaces_.begin(), lowerFaces_.end(),
                                  [&](const GridFace& a, const GridFace& b) { return faceKey(a) == faceKey(b); }),
                      lowerFaces_.end());
    for (const GridFace& f : lowerFaces_) {
        if (f.axis < 0 || f.axis >= grid_.n) throw Error(ErrClass::Io, "face axis out of range");
        if (f.dim == 2 && grid_.n != 3) throw Error(ErrClass::Io, "facet faces only exist for n=3");
        for (int d = 0; d < grid_.n; ++d) {
            int32_t v = f.base[static_cast<size_t>(d)];
            if (v < 0 || v > grid_.shape[static_cast<size_t>(d)])
                throw Error(ErrClass::Io, "face base node outside grid");
        }
        switch (f.dim) {
            case 0: vertexFaces_.insert(packCell(f.base)); break;
            case 1: edgeFaces_[static_cast<size_t>(f.axis)].insert(packCell(f.base)); break;
            case 2: facetFaces_[static_cast<size_t>(f.axis)].insert(packCell(f.base)); break;
            default: throw Error(ErrClass::Io, "face dimension out of range");
        }
    }

    if (fullCells_.empty() && lowerFaces_.empty())
        throw Error(ErrClass::Io, "domain E is empty");

    cellLo_ = {INT32_MAX, INT32_MAX, 0};
    cellHi_ = {INT32_MIN, INT32_MIN, 1};
    if (grid_.n == 3) {
        cellLo_[2] = INT32_MAX;
        cellHi_[2] = INT32_MIN;
    }
    auto extend = [&](const CellIdx& c, int32_t span) {
        for (int d = 0; d < grid_.n; ++d) {
            cellLo_[static_cast<size_t>(d)] = std::min(cellLo_[static_cast<size_t>(d)], c[static_cast<size_t>(d)]);
            cellHi_[static_cast<size_t>(d)] = std::max(cellHi_[static_cast<size_t>(d)], c[static_cast<size_t>(d)] + span);
        }
    };
    for (const CellIdx& c : fullCells_) extend(c, 1);
    for (const GridFace& f : lowerFaces_) {
        // treat the face's node span like a (possibly degenerate) cell
        CellIdx c = f.base;
        extend(c, 0);
        if (f.dim == 1) {
            c[static_cast<size_t>(f.axis)] += 1;
            extend(c, 0);
        } else if (f.dim == 2) {
            for (int d = 0; d < grid_.n; ++d)
                if (d != f.axis) c[static_cast<size_t>(d)] += 1;
            extend(c, 0);
        }
    }
}

void DomainE::cellBounds(CellIdx& lo, CellIdx& hi) const {
    lo = cellLo_;
    hi = cellHi_;
}

bool DomainE::cellFull(const CellIdx& c) const {
    for (int d = 0; d < grid_.n; ++d)
        if (c[static_cast<size_t>(d)] < 0 || c[static_cast<size_t>(d)] >= grid_.shape[static_cast<size_t>(d)]) return false;
    return fullSet_.count(packCell(c)) > 0;
}

bool DomainE::nodeInFacesOnly(const CellIdx& node) const {
    int n = grid_.n;
    if (vertexFaces_.count(packCell(node))) return true;
    for (int a = 0; a < n; ++a) {
        // node is an endpoint of edges with base node or node - e_a
        if (edgeFaces_[static_cast<size_t>(a)].count(packCell(node))) return true;
        CellIdx b = node;
        b[static_cast<size_t>(a)] -= 1;
        if (edgeFaces_[static_cast<size_t>(a)].count(packCell(b))) return true;
    }
    if (n == 3) {
        for (int a = 0; a < 3; ++a) {
            int u = (a + 1) % 3, v = (a + 2) % 3;
            for (int du = 0; du <= 1; ++du)
                for (int dv = 0; dv <= 1; ++dv) {
                    CellIdx b = node;
                    b[static_cast<size_t>(u)] -= du;
                    b[static_cast<size_t>(v)] -= dv;
                    if (facetFaces_[static_cast<size_t>(a)].count(packCell(b))) return true;
                }
        }
    }
    return false;
}

bool DomainE::nodeInE(const CellIdx& node) const {
    // any incident full cell
    CellIdx c;
    int n = grid_.n;
    int lim = n == 2 ? 4 : 8;
    for (int m = 0; m < lim; ++m) {
        for (int d = 0; d < n; ++d) c[static_cast<size_t>(d)] = node[static_cast<size_t>(d)] - ((m >> d) & 1);
        if (n == 2) c[2] = 0;
        if (cellFull(c)) return true;
    }
    return nodeInFacesOnly(node);
}

bool DomainE::nodeInInteriorE(const CellIdx& node) const {
    CellIdx c;
    int n = grid_.n;
    int lim = n == 2 ? 4 : 8;
    for (int m = 0; m < lim; ++m) {
        for (int d = 0; d < n; ++d) c[static_cast<size_t>(d)] = node[static_cast<size_t>(d)] - ((m >> d) & 1);
        if (n == 2) c[2] = 0;
        if (!cellFull(c)) return false;
    }
    return true;
}

DomainE::MinimalFace DomainE::minimalFace(const Vec& p) const {
    MinimalFace mf;
    for (int d = 0; d < grid_.n; ++d) {
        double u = (p[d] - grid_.origin[d]) / grid_.spacing;
        double r = std::round(u);
        // spec tolerance 1e-12 (in spacing units) with an ulp guard so grid
        // nodes of fine meshes still snap after round-tripping through doubles
        double tol = std::max(kSnapTol, 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(u)));
        if (std::fabs(u - r) <= tol) {
            mf.snapped[static_cast<size_t>(d)] = true;
            mf.coord[static_cast<size_t>(d)] = static_cast<int32_t>(r);
        } else {
            mf.snapped[static_cast<size_t>(d)] = false;
            mf.coord[static_cast<size_t>(d)] = static_cast<int32_t>(std::floor(u));
        }
    }
    return mf;
}

template <typename Fn>
void DomainE::forIncidentCells(const MinimalFace& mf, Fn&& fn) const {
    int n = grid_.n;
    int snapCount = 0;
    int snapAxes[3];
    for (int d = 0; d < n; ++d)
        if (mf.snapped[static_cast<size_t>(d)]) snapAxes[snapCount++] = d;
    int lim = 1 << snapCount;
    CellIdx c{mf.coord[0], mf.coord[1], grid_.n == 3 ? mf.coord[2] : 0};
    for (int m = 0; m < lim; ++m) {
        CellIdx cc = c;
        for (int j = 0; j < snapCount; ++j) cc[static_cast<size_t>(snapAxes[j])] -= (m >> j) & 1;
        fn(cc);
    }
}

bool DomainE::faceListedWithin(const MinimalFace& mf) const {
    int n = grid_.n;
    int freeAxes[3];
    int freeCount = 0;
    for (int d = 0; d < n; ++d)
        if (!mf.snapped[static_cast<size_t>(d)]) freeAxes[freeCount++] = d;
    if (freeCount == 0) {
        CellIdx node{mf.coord[0], mf.coord[1], n == 3 ? mf.coord[2] : 0};
        // a node is in a listed face iff it is a sub-face of one
        return nodeInFacesOnly(node);
    }
    if (freeCount == 1) {
        int a = freeAxes[0];
        CellIdx base{mf.coord[0], mf.coord[1], n == 3 ? mf.coord[2] : 0};
        if (edgeFaces_[static_cast<size_t>(a)].count(packCell(base))) return true;
        if (n == 3) {
            // the open edge interval may lie inside a listed facet
            for (int norm = 0; norm < 3; ++norm) {
                if (norm == a) continue;
                int other = 3 - norm - a;
                for (int shift = 0; shift <= 1; ++shift) {
                    CellIdx b = base;
                    b[static_cast<size_t>(other)] -= shift;
                    if (b[static_cast<size_t>(other)] < 0) continue;
                    if (facetFaces_[static_cast<size_t>(norm)].count(packCell(b))) return true;
                }
            }
        }
        return false;
    }
    if (freeCount == 2 && n == 3) {
        int norm = 3 - freeAxes[0] - freeAxes[1];
        CellIdx base{mf.coord[0], mf.coord[1], mf.coord[2]};
        return facetFaces_[static_cast<size_t>(norm)].count(packCell(base)) > 0;
    }
    return false; // full-dimensional minimal face cannot sit inside a lower face
}

bool DomainE::pointInE(const Vec& p) const {
    MinimalFace mf = minimalFace(p);
    bool anyFull = false;
    forIncidentCells(mf, [&](const CellIdx& c) { anyFull = anyFull || cellFull(c); });
    if (anyFull) return true;
    // not inside any full cell: a snapped minimal face may lie on one, or on
    // a listed lower face
    return faceListedWithin(mf);
}

bool DomainE::pointInInteriorE(const Vec& p) const {
    MinimalFace mf = minimalFace(p);
    bool allFull = true;
    forIncidentCells(mf, [&](const CellIdx& c) { allFull = allFull && cellFull(c); });
    return allFull;
}

DomainE::MinimalFace DomainE::latticeFace(const CellIdx& g, int m) const {
    MinimalFace mf;
    for (int d = 0; d < grid_.n; ++d) {
        int64_t gd = g[static_cast<size_t>(d)];
        int64_t q = (gd >= 0) ? gd / m : -((-gd + m - 1) / m);
        int64_t r = gd - q * m;
        mf.snapped[static_cast<size_t>(d)] = (r == 0);
        mf.coord[static_cast<size_t>(d)] = static_cast<int32_t>(q);
    }
    return mf;
}

bool DomainE::latticeInE(const CellIdx& g, int m) const {
    MinimalFace mf = latticeFace(g, m);
    bool anyFull = false;
    forIncidentCells(mf, [&](const CellIdx& c) { anyFull = anyFull || cellFull(c); });
    if (anyFull) return true;
    return faceListedWithin(mf);
}

bool DomainE::latticeInInterior(const CellIdx& g, int m) const {
    MinimalFace mf = latticeFace(g, m);
    bool allFull = true;
    forIncidentCells(mf, [&](const CellIdx& c) { allFull = allFull && cellFull(c); });
    return allFull;
}

double DomainE::distToNonInterior(const Vec& p) const {
    if (!pointInInteriorE(p)) return 0.0;
    double h = grid_.spacing;
    // distance to the outside of the declared grid box
    double best = std::numeric_limits<double>::infinity();
    for (int d = 0; d < grid_.n; ++d) {
        double lo = grid_.origin[d];
        double hi = grid_.origin[d] + h * grid_.shape[static_cast<size_t>(d)];
        best = std::min(best, std::min(p[d] - lo, hi - p[d]));
    }
    best = std::max(best, 0.0);

    CellIdx home;
    for (int d = 0; d < grid_.n; ++d)
        home[static_cast<size_t>(d)] = static_cast<int32_t>(std::floor((p[d] - grid_.origin[d]) / h));
    if (grid_.n == 2) home[2] = 0;

    auto boxDist = [&](const CellIdx& c) {
        double s2 = 0.0;
        for (int d = 0; d < grid_.n; ++d) {
            double lo = grid_.origin[d] + h * c[static_cast<size_t>(d)];
            double hi = lo + h;
            double dd = std::max({lo - p[d], p[d] - hi, 0.0});
            s2 += dd * dd;
        }
        return std::sqrt(s2);
    };

    int maxShape = std::max({grid_.shape[0], grid_.shape[1], grid_.n == 3 ? grid_.shape[2] : 1});
    for (int ring = 0;; ++ring) {
        if (ring > 0 && h * (ring - 1) >= best) break;
        if (ring > maxShape + 2) break;
        bool any = false;
        int zlo = grid_.n == 3 ? -ring : 0, zhi = grid_.n == 3 ? ring : 0;
        for (int dz = zlo; dz <= zhi; ++dz)
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                    CellIdx c{home[0] + dx, home[1] + dy, grid_.n == 3 ? home[2] + dz : 0};
                    any = true;
                    if (!cellFull(c)) best = std::min(best, boxDist(c));
                }
        if (!any) break;
    }
    return best;
}

std::optional<Vec> DomainE::nearestEPointInBlock(const Vec& p, const CellIdx& homeCell) const {
    double h = grid_.spacing;
    double bestDist = std::numeric_limits<double>::infinity();
    Vec bestPt{};
    auto consider = [&](const Vec& lo, const Vec& hi) {
        Vec q;
        double dist = 0.0;
        for (int d = 0; d < grid_.n; ++d) {
            q[d] = std::clamp(p[d], lo[d], hi[d]);
            dist = std::max(dist, std::fabs(q[d] - p[d]));
        }
        if (dist < bestDist - 1e-15 * h) {
            bestDist = dist;
            bestPt = q;
        }
    };

    int zlo = grid_.n == 3 ? -1 : 0, zhi = grid_.n == 3 ? 1 : 0;
    // full cells first (lexicographic block order), then listed faces
    for (int dz = zlo; dz <= zhi; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                CellIdx c{homeCell[0] + dx, homeCell[1] + dy, grid_.n == 3 ? homeCell[2] + dz : 0};
                if (!cellFull(c)) continue;
                Vec lo, hi;
                for (int d = 0; d < grid_.n; ++d) {
                    lo[d] = grid_.origin[d] + h * c[static_cast<size_t>(d)];
                    hi[d] = lo[d] + h;
                }
                consider(lo, hi);
            }
    for (const GridFace& f : lowerFaces_) {
        bool near = true;
        for (int d = 0; d < grid_.n && near; ++d) {
            int32_t b = f.base[static_cast<size_t>(d)];
            near = b >= homeCell[static_cast<size_t>(d)] - 1 && b <= homeCell[static_cast<size_t>(d)] + 2;
        }
        if (!near) continue;
        Vec lo = grid_.nodePos(f.base), hi = lo;
        if (f.dim == 1) {
            hi[f.axis] += h;
        } else if (f.dim == 2) {
            for (int d = 0; d < grid_.n; ++d)
                if (d != f.axis) hi[d] += h;
        }
        consider(lo, hi);
    }
    if (!std::isfinite(bestDist)) return std::nullopt;
    return bestPt;
}

} // namespace zfa::domain
