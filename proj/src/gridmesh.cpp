#include "gridmesh.hpp"

#include <algorithm>
#include <cmath>

namespace zfa::triangulate {

int64_t floorDiv(int64_t a, int64_t b) {
    int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

namespace {

// lexicographic axis permutations; parity flags which need the last two
// vertices swapped for positive orientation
constexpr int kPerm2[2][2] = {{0, 1}, {1, 0}};
constexpr bool kOdd2[2] = {false, true};
constexpr int kPerm3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
constexpr bool kOdd3[6] = {false, true, true, false, false, true};

} // namespace

GridTriangulation::GridTriangulation(const domain::DomainE& D, int refine, int64_t maxSimplices)
    : domain_(&D), n_(D.grid().n), refine_(refine) {
    if (refine_ < 1) throw Error(ErrClass::Io, "cell-size refinement factor must be >= 1");
    const double h = D.grid().spacing;
    s_ = h / refine_;
    origin_ = D.grid().origin;

    domain::CellIdx dlo, dhi;
    D.cellBounds(dlo, dhi);
    for (int d = 0; d < n_; ++d) {
        cellLo_[static_cast<size_t>(d)] = dlo[static_cast<size_t>(d)] * refine_ - 2;
        cellHi_[static_cast<size_t>(d)] = dhi[static_cast<size_t>(d)] * refine_ + 2;
        cellDims_[static_cast<size_t>(d)] = cellHi_[static_cast<size_t>(d)] - cellLo_[static_cast<size_t>(d)];
        nodeDims_[static_cast<size_t>(d)] = cellDims_[static_cast<size_t>(d)] + 1;
    }
    if (n_ == 2) {
        cellLo_[2] = 0;
        cellHi_[2] = 1;
        cellDims_[2] = 1;
        nodeDims_[2] = 1;
    }
    int64_t bboxCells = 1;
    for (int d = 0; d < 3; ++d) bboxCells *= cellDims_[static_cast<size_t>(d)];
    if (bboxCells > (int64_t(1) << 31) - 2)
        throw Error(ErrClass::Resource, "triangulation bounding box exceeds the addressable cell budget");

    cellFlags_.assign(static_cast<size_t>(bboxCells), 0);
    constexpr uint8_t kTouch = 8;

    // paint full domain cells into the s-grid
    auto linear = [&](int32_t x, int32_t y, int32_t z) {
        return (static_cast<size_t>(z - cellLo_[2]) * cellDims_[1] + static_cast<size_t>(y - cellLo_[1])) *
                   cellDims_[0] +
               static_cast<size_t>(x - cellLo_[0]);
    };
    for (const domain::CellIdx& c : D.fullCells()) {
        int32_t zlo = n_ == 3 ? c[2] * refine_ : 0, zhi = n_ == 3 ? (c[2] + 1) * refine_ : 1;
        for (int32_t z = zlo; z < zhi; ++z)
            for (int32_t y = c[1] * refine_; y < (c[1] + 1) * refine_; ++y) {
                size_t base = linear(c[0] * refine_, y, z);
                for (int32_t k = 0; k < refine_; ++k) cellFlags_[base + static_cast<size_t>(k)] |= kInE;
            }
    }

    // TOUCH = one-ring dilation of IN_E (separable Chebyshev dilation) ...
    {
        std::vector<uint8_t> tmp(cellFlags_.size(), 0);
        for (size_t i = 0; i < cellFlags_.size(); ++i) tmp[i] = cellFlags_[i] & kInE ? 1 : 0;
        auto dilateAxis = [&](std::vector<uint8_t>& buf, int axis) {
            std::vector<uint8_t> src = buf;
            int64_t strides[3] = {1, cellDims_[0], static_cast<int64_t>(cellDims_[0]) * cellDims_[1]};
            int64_t stride = strides[axis];
            int64_t extent = cellDims_[static_cast<size_t>(axis)];
            int64_t total = static_cast<int64_t>(buf.size());
            for (int64_t i = 0; i < total; ++i) {
                if (src[static_cast<size_t>(i)]) continue;
                int64_t coord = (i / stride) % extent;
                uint8_t v = 0;
                if (coord > 0) v |= src[static_cast<size_t>(i - stride)];
                if (coord + 1 < extent) v |= src[static_cast<size_t>(i + stride)];
                buf[static_cast<size_t>(i)] = v;
            }
        };
        for (int d = 0; d < n_; ++d) dilateAxis(tmp, d);
        for (size_t i = 0; i < cellFlags_.size(); ++i)
            if (tmp[i]) cellFlags_[i] |= kTouch;

        // ... plus the s-cells meeting listed lower faces
        for (const domain::GridFace& f : D.lowerFaces()) {
            int32_t lo[3], hi[3];
            for (int d = 0; d < n_; ++d) {
                bool spans = (f.dim == 1 && f.axis == d) || (f.dim == 2 && f.axis != d);
                lo[d] = f.base[static_cast<size_t>(d)] * refine_ - 1;
                hi[d] = f.base[static_cast<size_t>(d)] * refine_ + (spans ? refine_ : 0);
                lo[d] = std::max(lo[d], cellLo_[static_cast<size_t>(d)]);
                hi[d] = std::min(hi[d], cellHi_[static_cast<size_t>(d)] - 1);
            }
            if (n_ == 2) {
                lo[2] = 0;
                hi[2] = 0;
            }
            for (int32_t z = lo[2]; z <= hi[2]; ++z)
                for (int32_t y = lo[1]; y <= hi[1]; ++y)
                    for (int32_t x = lo[0]; x <= hi[0]; ++x) cellFlags_[linear(x, y, z)] |= kTouch;
        }

        // P = one-ring dilation of TOUCH
        for (size_t i = 0; i < cellFlags_.size(); ++i) tmp[i] = cellFlags_[i] & kTouch ? 1 : 0;
        for (int d = 0; d < n_; ++d) dilateAxis(tmp, d);
        for (size_t i = 0; i < cellFlags_.size(); ++i)
            if (tmp[i]) cellFlags_[i] |= kInP;
    }

    int64_t pCount = 0;
    for (uint8_t f : cellFlags_)
        if (f & kInP) ++pCount;
    if (pCount * simplicesPerCell() > maxSimplices)
        throw Error(ErrClass::Resource,
                    "triangulation needs " + std::to_string(pCount * simplicesPerCell()) +
                        " simplices, above the configured cap of " + std::to_string(maxSimplices) +
                        "; increase epsilon, the cap, or the cell size");

    pCells_.reserve(static_cast<size_t>(pCount));
    cellRank_.assign(cellFlags_.size(), -1);
    for (size_t i = 0; i < cellFlags_.size(); ++i) {
        if (cellFlags_[i] & kInP) {
            cellRank_[i] = static_cast<int32_t>(pCells_.size());
            pCells_.push_back(static_cast<int32_t>(i));
        }
    }

    // dense node table over the node bbox
    int64_t nodeTotal = 1;
    for (int d = 0; d < 3; ++d) nodeTotal *= nodeDims_[static_cast<size_t>(d)];
    nodeId_.assign(static_cast<size_t>(nodeTotal), -1);
    vertexNode_.reserve(static_cast<size_t>(pCount) / 2 * n_);

    auto nodeLinear = [&](int32_t x, int32_t y, int32_t z) {
        return (static_cast<size_t>(z - cellLo_[2]) * nodeDims_[1] + static_cast<size_t>(y - cellLo_[1])) *
                   nodeDims_[0] +
               static_cast<size_t>(x - cellLo_[0]);
    };
    int corners = 1 << n_;
    for (int32_t lin : pCells_) {
        auto c = cellAtRank(cellRank_[static_cast<size_t>(lin)]);
        for (int m = 0; m < corners; ++m) {
            int32_t gx = c[0] + (m & 1), gy = c[1] + ((m >> 1) & 1);
            int32_t gz = n_ == 3 ? c[2] + ((m >> 2) & 1) : 0;
            size_t nl = nodeLinear(gx, gy, gz);
            if (nodeId_[nl] < 0) {
                nodeId_[nl] = static_cast<int32_t>(vertexNode_.size() / static_cast<size_t>(n_));
                vertexNode_.push_back(gx);
                vertexNode_.push_back(gy);
                if (n_ == 3) vertexNode_.push_back(gz);
            }
        }
    }
    moved_.assign(vertexNode_.size() / static_cast<size_t>(n_), 0);

    // exact lattice classification of every node against E
    nodeStatus_.resize(moved_.size());
    for (size_t v = 0; v < moved_.size(); ++v) {
        auto g = vertexLattice(static_cast<int32_t>(v));
        domain::CellIdx gi{g[0], g[1], g[2]};
        if (domain_->latticeInInterior(gi, refine_))
            nodeStatus_[v] = 2;
        else if (domain_->latticeInE(gi, refine_))
            nodeStatus_[v] = 1;
        else
            nodeStatus_[v] = 0;
    }

    labels_.assign(static_cast<size_t>(simplexCount()), Label::Bad);
}

size_t GridTriangulation::linearCell(const std::array<int32_t, 3>& c) const {
    return (static_cast<size_t>(c[2] - cellLo_[2]) * cellDims_[1] + static_cast<size_t>(c[1] - cellLo_[1])) *
               cellDims_[0] +
           static_cast<size_t>(c[0] - cellLo_[0]);
}

bool GridTriangulation::cellInBounds(const std::array<int32_t, 3>& c) const {
    for (int d = 0; d < n_; ++d)
        if (c[static_cast<size_t>(d)] < cellLo_[static_cast<size_t>(d)] || c[static_cast<size_t>(d)] >= cellHi_[static_cast<size_t>(d)])
            return false;
    if (n_ == 2 && c[2] != 0) return false;
    return true;
}

bool GridTriangulation::cellFlag(const std::array<int32_t, 3>& c, uint8_t flag) const {
    if (!cellInBounds(c)) return false;
    return (cellFlags_[linearCell(c)] & flag) != 0;
}

std::array<int32_t, 3> GridTriangulation::cellAtRank(int64_t rank) const {
    int32_t lin = pCells_[static_cast<size_t>(rank)];
    int32_t x = lin % cellDims_[0];
    int32_t rest = lin / cellDims_[0];
    int32_t y = rest % cellDims_[1];
    int32_t z = rest / cellDims_[1];
    return {cellLo_[0] + x, cellLo_[1] + y, cellLo_[2] + z};
}

std::array<int32_t, 3> GridTriangulation::cellOf(int64_t simplex) const {
    return cellAtRank(simplex / simplicesPerCell());
}

domain::CellIdx GridTriangulation::domainCellOf(int64_t simplex) const {
    auto c = cellOf(simplex);
    domain::CellIdx out{};
    for (int d = 0; d < n_; ++d)
        out[static_cast<size_t>(d)] = static_cast<int32_t>(floorDiv(c[static_cast<size_t>(d)], refine_));
    return out;
}

bool GridTriangulation::cellInE(int64_t simplex) const {
    auto c = cellOf(simplex);
    return cellFlag(c, kInE);
}

int32_t GridTriangulation::nodeIdAt(const std::array<int32_t, 3>& g) const {
    for (int d = 0; d < n_; ++d)
        if (g[static_cast<size_t>(d)] < cellLo_[static_cast<size_t>(d)] ||
            g[static_cast<size_t>(d)] > cellHi_[static_cast<size_t>(d)])
            return -1;
    size_t nl = (static_cast<size_t>(g[2] - cellLo_[2]) * nodeDims_[1] + static_cast<size_t>(g[1] - cellLo_[1])) *
                    nodeDims_[0] +
                static_cast<size_t>(g[0] - cellLo_[0]);
    return nodeId_[nl];
}

void GridTriangulation::kuhnVertices(const std::array<int32_t, 3>& cell, int perm,
                                     std::array<int32_t, 3> latticeOut[4]) const {
    latticeOut[0] = cell;
    if (n_ == 2) {
        latticeOut[1] = latticeOut[0];
        latticeOut[1][static_cast<size_t>(kPerm2[perm][0])] += 1;
        latticeOut[2] = latticeOut[1];
        latticeOut[2][static_cast<size_t>(kPerm2[perm][1])] += 1;
        if (kOdd2[perm]) std::swap(latticeOut[1], latticeOut[2]);
    } else {
        for (int k = 0; k < 3; ++k) {
            latticeOut[k + 1] = latticeOut[k];
            latticeOut[k + 1][static_cast<size_t>(kPerm3[perm][k])] += 1;
        }
        if (kOdd3[perm]) std::swap(latticeOut[2], latticeOut[3]);
    }
}

void GridTriangulation::vertexIds(int64_t simplex, int32_t out[4]) const {
    auto cell = cellOf(simplex);
    int perm = static_cast<int>(simplex % simplicesPerCell());
    std::array<int32_t, 3> lat[4];
    kuhnVertices(cell, perm, lat);
    for (int j = 0; j <= n_; ++j) out[j] = nodeIdAt(lat[j]);
}

void GridTriangulation::simplexPoints(int64_t simplex, Vec out[4]) const {
    int32_t ids[4];
    vertexIds(simplex, ids);
    for (int j = 0; j <= n_; ++j) out[j] = vertexPosition(ids[j]);
}

Vec GridTriangulation::barycenterOf(int64_t simplex) const {
    Vec pts[4];
    simplexPoints(simplex, pts);
    Vec b{};
    for (int j = 0; j <= n_; ++j) b += pts[j];
    return b * (1.0 / (n_ + 1));
}

int64_t GridTriangulation::countLabel(Label l) const {
    int64_t c = 0;
    for (Label x : labels_)
        if (x == l) ++c;
    return c;
}

Vec GridTriangulation::witness(int64_t simplex) const {
    auto it = witnessOverride_.find(simplex);
    if (it != witnessOverride_.end()) return it->second;
    return barycenterOf(simplex);
}

void GridTriangulation::setWitness(int64_t simplex, const Vec& w) { witnessOverride_[simplex] = w; }

Vec GridTriangulation::memberCenterOfCell(const std::array<int32_t, 3>& cell) const {
    Vec center;
    for (int d = 0; d < n_; ++d) center[d] = origin_[d] + s_ * (cell[static_cast<size_t>(d)] + 0.5);
    domain::CellIdx home{};
    for (int d = 0; d < n_; ++d)
        home[static_cast<size_t>(d)] = static_cast<int32_t>(floorDiv(cell[static_cast<size_t>(d)], refine_));
    auto nearest = domain_->nearestEPointInBlock(center, home);
    if (!nearest)
        throw Error(ErrClass::Internal, "cover invariant broken: no point of E near a P-cell");
    return *nearest;
}

Vec GridTriangulation::memberCenter(int64_t simplex) const { return memberCenterOfCell(cellOf(simplex)); }

void GridTriangulation::moveVertex(int32_t v, const Vec& newPos) {
    moved_[static_cast<size_t>(v)] = 1;
    movedPos_[v] = newPos;
}

std::vector<int64_t> GridTriangulation::incidentSimplices(int32_t v) const {
    std::vector<int64_t> out;
    auto g = vertexLattice(v);
    int lim = 1 << n_;
    for (int m = 0; m < lim; ++m) {
        std::array<int32_t, 3> c = {g[0] - (m & 1), g[1] - ((m >> 1) & 1), n_ == 3 ? g[2] - ((m >> 2) & 1) : 0};
        if (!cellFlag(c, kInP)) continue;
        int64_t rank = cellRank_[linearCell(c)];
        for (int k = 0; k < simplicesPerCell(); ++k) {
            int64_t sid = rank * simplicesPerCell() + k;
            int32_t ids[4];
            vertexIds(sid, ids);
            for (int j = 0; j <= n_; ++j)
                if (ids[j] == v) {
                    out.push_back(sid);
                    break;
                }
        }
    }
    return out;
}

bool GridTriangulation::vertexInteriorToP(int32_t v) const {
    auto g = vertexLattice(v);
    int lim = 1 << n_;
    for (int m = 0; m < lim; ++m) {
        std::array<int32_t, 3> c = {g[0] - (m & 1), g[1] - ((m >> 1) & 1), n_ == 3 ? g[2] - ((m >> 2) & 1) : 0};
        if (!cellFlag(c, kInP)) return false;
    }
    return true;
}

void GridTriangulation::markDirtyAround(int32_t v) {
    auto g = vertexLattice(v);
    std::vector<int64_t> inc = incidentSimplices(v);
    int lim = 1 << n_;
    for (int m = 0; m < lim; ++m) {
        std::array<int32_t, 3> c = {g[0] - (m & 1), g[1] - ((m >> 1) & 1), n_ == 3 ? g[2] - ((m >> 2) & 1) : 0};
        if (!cellFlag(c, kInP)) continue;
        size_t lin = linearCell(c);
        cellFlags_[lin] |= kDirty;
        auto& list = dirtyCandidates_[static_cast<int32_t>(lin)];
        for (int64_t sid : inc)
            if (std::find(list.begin(), list.end(), sid) == list.end()) list.push_back(sid);
    }
}

std::optional<GridTriangulation::Hit> GridTriangulation::tryCell(const std::array<int32_t, 3>& c, const Vec& p,
                                                                 double slack) const {
    if (!cellFlag(c, kInP)) return std::nullopt;
    size_t lin = linearCell(c);
    int64_t rank = cellRank_[lin];
    bool dirty = (cellFlags_[lin] & kDirty) != 0;

    if (!dirty) {
        // closed-form Kuhn location from the fractional coordinates
        double w[3] = {0, 0, 0};
        for (int d = 0; d < n_; ++d)
            w[d] = (p[d] - origin_[d]) / s_ - c[static_cast<size_t>(d)];
        for (int d = 0; d < n_; ++d)
            if (w[d] < -slack / s_ || w[d] > 1.0 + slack / s_) return std::nullopt;
        int order[3] = {0, 1, 2};
        // descending sort of the fractional parts (stable for determinism)
        if (n_ == 2) {
            if (w[1] > w[0]) std::swap(order[0], order[1]);
        } else {
            if (w[order[1]] > w[order[0]]) std::swap(order[0], order[1]);
            if (w[order[2]] > w[order[1]]) std::swap(order[1], order[2]);
            if (w[order[1]] > w[order[0]]) std::swap(order[0], order[1]);
        }
        int perm = 0;
        if (n_ == 2) {
            perm = order[0] == 0 ? 0 : 1;
            for (int k = 0; k < 2; ++k)
                if (kPerm2[perm][k] != order[k]) return std::nullopt; // unreachable
        } else {
            for (int q = 0; q < 6; ++q)
                if (kPerm3[q][0] == order[0] && kPerm3[q][1] == order[1] && kPerm3[q][2] == order[2]) {
                    perm = q;
                    break;
                }
        }
        Hit hit;
        hit.simplex = rank * simplicesPerCell() + perm;
        hit.coords.count = n_ + 1;
        double lam[4];
        lam[0] = 1.0 - w[order[0]];
        for (int k = 1; k < n_; ++k) lam[k] = w[order[k - 1]] - w[order[k]];
        lam[n_] = w[order[n_ - 1]];
        bool odd = n_ == 2 ? kOdd2[perm] : kOdd3[perm];
        if (odd) std::swap(lam[n_ - 1], lam[n_]);
        for (int k = 0; k <= n_; ++k) hit.coords.lambda[static_cast<size_t>(k)] = lam[k];
        return hit;
    }

    // dirty cell: test its own simplices, then candidates that deformed in
    Vec pts[4];
    auto test = [&](int64_t sid) -> std::optional<Hit> {
        simplexPoints(sid, pts);
        auto lr = simplicial::locateInSimplex({pts, static_cast<size_t>(n_ + 1)}, p, n_);
        if (lr.coords.count == n_ + 1 && lr.coords.min() >= -slack) {
            Hit hit;
            hit.simplex = sid;
            hit.coords = lr.coords;
            return hit;
        }
        return std::nullopt;
    };
    for (int k = 0; k < simplicesPerCell(); ++k)
        if (auto hit = test(rank * simplicesPerCell() + k)) return hit;
    auto it = dirtyCandidates_.find(static_cast<int32_t>(lin));
    if (it != dirtyCandidates_.end()) {
        for (int64_t sid : it->second)
            if (sid / simplicesPerCell() != rank)
                if (auto hit = test(sid)) return hit;
    }
    return std::nullopt;
}

std::optional<GridTriangulation::Hit> GridTriangulation::locate(const Vec& p) const {
    std::array<int32_t, 3> c0{};
    for (int d = 0; d < n_; ++d)
        c0[static_cast<size_t>(d)] = static_cast<int32_t>(std::floor((p[d] - origin_[d]) / s_));
    const double slack = 1e-9 * std::max(1.0, s_);
    if (auto hit = tryCell(c0, p, slack)) return hit;
    int zr = n_ == 3 ? 1 : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                std::array<int32_t, 3> c{c0[0] + dx, c0[1] + dy, n_ == 3 ? c0[2] + dz : 0};
                if (auto hit = tryCell(c, p, slack)) return hit;
            }
    return std::nullopt;
}

void GridTriangulation::candidatesNear(const Vec& p, std::vector<int64_t>& out) const {
    out.clear();
    std::array<int32_t, 3> c0{};
    for (int d = 0; d < n_; ++d)
        c0[static_cast<size_t>(d)] = static_cast<int32_t>(std::floor((p[d] - origin_[d]) / s_));
    int zr = n_ == 3 ? 1 : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                std::array<int32_t, 3> c{c0[0] + dx, c0[1] + dy, n_ == 3 ? c0[2] + dz : 0};
                if (!cellFlag(c, kInP)) continue;
                size_t lin = linearCell(c);
                int64_t rank = cellRank_[lin];
                for (int k = 0; k < simplicesPerCell(); ++k) out.push_back(rank * simplicesPerCell() + k);
                auto it = dirtyCandidates_.find(static_cast<int32_t>(lin));
                if (it != dirtyCandidates_.end())
                    for (int64_t sid : it->second)
                        if (sid / simplicesPerCell() != rank) out.push_back(sid);
            }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

simplicial::MeshComplex GridTriangulation::exportComplex() const {
    simplicial::MeshComplex M;
    M.n = n_;
    int64_t nv = vertexCount();
    M.vertices.resize(static_cast<size_t>(nv));
    for (int64_t v = 0; v < nv; ++v) M.vertices[static_cast<size_t>(v)] = vertexPosition(static_cast<int32_t>(v));
    for (int64_t v = 0; v < nv; ++v) M.simplices[0].push_back(static_cast<int32_t>(v));

    struct TupleHash {
        size_t operator()(const std::array<int32_t, 3>& v) const {
            size_t h = 146959810393ULL;
            for (int32_t x : v) h = h * 1099511628211ULL + static_cast<size_t>(x + 1);
            return h;
        }
    };
    std::unordered_map<std::array<int32_t, 3>, int, TupleHash> seen;

    int64_t count = simplexCount();
    int32_t ids[4];
    for (int64_t sidx = 0; sidx < count; ++sidx) {
        vertexIds(sidx, ids);
        for (int j = 0; j <= n_; ++j) M.simplices[static_cast<size_t>(n_)].push_back(ids[j]);
        // dedup the proper faces of dimension 1..n-1
        for (uint32_t mask = 1; mask < (1u << (n_ + 1)); ++mask) {
            int bits = __builtin_popcount(mask);
            if (bits < 2 || bits > n_) continue;
            std::array<int32_t, 3> key{INT32_MAX, INT32_MAX, INT32_MAX};
            int w = 0;
            for (int j = 0; j <= n_; ++j)
                if (mask & (1u << j)) key[static_cast<size_t>(w++)] = ids[j];
            std::sort(key.begin(), key.begin() + bits);
            key[2] = bits == 2 ? INT32_MAX : key[2];
            if (!seen.emplace(key, 1).second) continue;
            for (int j = 0; j < bits; ++j) M.simplices[static_cast<size_t>(bits - 1)].push_back(key[static_cast<size_t>(j)]);
        }
    }
    M.buildStars();
    return M;
}

} // namespace zfa::triangulate
