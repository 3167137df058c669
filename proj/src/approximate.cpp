#include "approximate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace zfa::approximate {

using simplicial::BarycentricCoords;

// ---------------------------------------------------------------------------
// point-to-simplex Euclidean distance (k <= n <= 3)

namespace {

double pointSegmentDistance(const Vec& p, const Vec& a, const Vec& b) {
    Vec ab = b - a;
    double len2 = norm2sq(ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm2(p - (a + ab * t));
}

double pointTriangleDistance(const Vec& p, const Vec& a, const Vec& b, const Vec& c, int n) {
    // project into the triangle's plane, then barycentric test
    Vec e0 = b - a, e1 = c - a, d = p - a;
    double g00 = dot(e0, e0), g01 = dot(e0, e1), g11 = dot(e1, e1);
    double det = g00 * g11 - g01 * g01;
    if (std::fabs(det) > 1e-30) {
        double r0 = dot(e0, d), r1 = dot(e1, d);
        double u = (r0 * g11 - r1 * g01) / det;
        double v = (g00 * r1 - g01 * r0) / det;
        if (u >= 0.0 && v >= 0.0 && u + v <= 1.0) {
            Vec proj = a + e0 * u + e1 * v;
            return norm2(p - proj);
        }
    }
    double best = pointSegmentDistance(p, a, b);
    best = std::min(best, pointSegmentDistance(p, b, c));
    best = std::min(best, pointSegmentDistance(p, a, c));
    (void)n;
    return best;
}

} // namespace

double pointSimplexDistance(const Vec& p, const Vec pts[], int count, int n) {
    if (count == 1) return norm2(p - pts[0]);
    if (count == 2) return pointSegmentDistance(p, pts[0], pts[1]);
    if (count == 3) {
        if (n == 2) {
            // inside test via signed areas
            auto cross = [](const Vec& u, const Vec& v) { return u[0] * v[1] - u[1] * v[0]; };
            double d0 = cross(pts[1] - pts[0], p - pts[0]);
            double d1 = cross(pts[2] - pts[1], p - pts[1]);
            double d2 = cross(pts[0] - pts[2], p - pts[2]);
            bool allNonNeg = d0 >= 0 && d1 >= 0 && d2 >= 0;
            bool allNonPos = d0 <= 0 && d1 <= 0 && d2 <= 0;
            if (allNonNeg || allNonPos) return 0.0;
            double best = pointSegmentDistance(p, pts[0], pts[1]);
            best = std::min(best, pointSegmentDistance(p, pts[1], pts[2]));
            best = std::min(best, pointSegmentDistance(p, pts[0], pts[2]));
            return best;
        }
        return pointTriangleDistance(p, pts[0], pts[1], pts[2], n);
    }
    // tetrahedron: inside iff all face-volumes share the orientation sign
    double v0 = simplicial::signedVolume(std::span<const Vec>{pts, 4}, 3);
    if (std::fabs(v0) > 1e-30) {
        bool inside = true;
        for (int j = 0; j <= 3 && inside; ++j) {
            Vec sub[4];
            for (int k = 0; k <= 3; ++k) sub[k] = pts[k];
            sub[j] = p;
            double vj = simplicial::signedVolume(std::span<const Vec>{sub, 4}, 3);
            if (vj * v0 < 0.0) inside = false;
        }
        if (inside) return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    for (auto& f : faces)
        best = std::min(best, pointTriangleDistance(p, pts[f[0]], pts[f[1]], pts[f[2]], 3));
    return best;
}

// ---------------------------------------------------------------------------

ComplexK buildK(const GridTriangulation& T) {
    if (T.countLabel(Label::Bad) != 0)
        throw Error(ErrClass::Internal, "buildK called with Bad simplices present");
    ComplexK K;
    const int n = T.n();
    const int64_t count = T.simplexCount();
    K.vertexInQ.assign(static_cast<size_t>(T.vertexCount()), 0);

    struct FaceKeyHash {
        size_t operator()(const std::array<int32_t, 3>& v) const {
            size_t h = 1469598103934665603ULL;
            for (int32_t x : v) h = (h ^ static_cast<size_t>(x + 1)) * 1099511628211ULL;
            return h;
        }
    };
    std::unordered_set<std::array<int32_t, 3>, FaceKeyHash> seen;

    int32_t ids[4];
    const domain::DomainE& D = T.domainE();
    for (int64_t s = 0; s < count; ++s) {
        Label l = T.label(s);
        T.vertexIds(s, ids);
        if (l == Label::Keep) {
            ++K.keepCount;
            for (int j = 0; j <= n; ++j) {
                K.vertexInQ[static_cast<size_t>(ids[j])] = 1;
                // Q must sit inside the interior of E
                if (T.nodeStatus(ids[j]) != 2 || T.vertexMoved(ids[j]))
                    throw Error(ErrClass::Internal, "Keep simplex vertex not interior to E");
            }
            continue;
        }
        ++K.discardCount;
        // witness certificate: strictly interior, outside E
        Vec w = T.witness(s);
        if (D.pointInE(w))
            throw Error(ErrClass::Internal, "Discard witness lies in E at simplex " + std::to_string(s));
        if (T.hasWitnessOverride(s)) {
            Vec pts[4];
            T.simplexPoints(s, pts);
            auto bc = simplicial::barycentric({pts, static_cast<size_t>(n + 1)}, w, n);
            if (bc.min() <= triangulate::kWitnessInteriorTol)
                throw Error(ErrClass::Internal, "Discard witness not strictly interior at simplex " + std::to_string(s));
        }
        // all n+1 facets of a Discard simplex belong to K
        for (int skip = 0; skip <= n; ++skip) {
            std::array<int32_t, 3> key{INT32_MAX, INT32_MAX, INT32_MAX};
            int w2 = 0;
            for (int j = 0; j <= n; ++j)
                if (j != skip) key[static_cast<size_t>(w2++)] = ids[j];
            std::sort(key.begin(), key.begin() + n);
            if (!seen.insert(key).second) continue;
            for (int j = 0; j < n; ++j)
                K.boundaryFaces.push_back(key[static_cast<size_t>(j)]);
            K.boundaryParents.push_back(s);
        }
    }
    return K;
}

Vec retractH(const GridTriangulation& T, const Vec& z) {
    auto hit = T.locate(z);
    if (!hit)
        throw Error(ErrClass::Internal, "retraction: point is outside the polytope of L");
    if (T.label(hit->simplex) == Label::Keep) return z;
    const int n = T.n();
    double lmin = hit->coords.min();
    if (lmin <= simplicial::kInteriorTol) return z; // already on the boundary, inside |K|

    Vec pts[4];
    T.simplexPoints(hit->simplex, pts);
    Vec zs = T.witness(hit->simplex);
    auto lamS = simplicial::barycentric({pts, static_cast<size_t>(n + 1)}, zs, n);

    // ray z_sigma + t (z - z_sigma): the first barycentric coordinate to
    // reach zero gives the exit point on the boundary
    double tStar = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        double li = hit->coords.lambda[static_cast<size_t>(i)];
        double si = lamS.lambda[static_cast<size_t>(i)];
        if (li < si) tStar = std::min(tStar, si / (si - li));
    }
    if (!std::isfinite(tStar) || tStar < 1.0 - 1e-9)
        throw Error(ErrClass::Internal, "retraction ray parameter out of range");
    return zs + (z - zs) * tStar;
}

// ---------------------------------------------------------------------------

GTildeEvaluator::GTildeEvaluator(const GridTriangulation& T, const ComplexK& K, const domain::FieldSpec& f)
    : T_(T), K_(K), f_(f), radius_(T.memberRadius()) {}

double GTildeEvaluator::distToQ(const Vec& x, double cap) const {
    const int n = T_.n();
    const double s = T_.cellSize();
    std::array<int32_t, 3> c0{};
    for (int d = 0; d < n; ++d)
        c0[static_cast<size_t>(d)] = static_cast<int32_t>(std::floor((x[d] - T_.latticePos({0, 0, 0})[d]) / s));
    double best = cap;
    Vec pts[4];
    int maxRing = static_cast<int>(std::ceil(cap / s)) + 1;
    for (int ring = 0; ring <= maxRing; ++ring) {
        if (ring > 0 && s * (ring - 1) >= best) break;
        int zr = n == 3 ? ring : 0;
        for (int dz = -zr; dz <= (n == 3 ? ring : 0); ++dz)
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                    std::array<int32_t, 3> c{c0[0] + dx, c0[1] + dy, n == 3 ? c0[2] + dz : 0};
                    auto simplices = T_.cellSimplices(c);
                    if (simplices.first < 0) continue;
                    for (int k = 0; k < T_.simplicesPerCell(); ++k) {
                        int64_t sid = simplices.first + k;
                        if (T_.label(sid) != Label::Keep) continue;
                        T_.simplexPoints(sid, pts);
                        best = std::min(best, pointSimplexDistance(x, pts, n + 1, n));
                    }
                }
        if (best == 0.0) break;
    }
    return best;
}

Vec GTildeEvaluator::eval(const Vec& x, PartitionBreakdown* breakdown) const {
    const int n = T_.n();
    // fast path: x inside a Keep simplex means x is in Q and g~ = f exactly
    auto hit = T_.locate(x);
    if (!hit)
        throw Error(ErrClass::Internal, "partition evaluated outside the polytope of L");
    if (!breakdown && T_.label(hit->simplex) == Label::Keep) return f_.eval(x);

    const double s = T_.cellSize();
    const domain::DomainE& D = T_.domainE();
    double dQ = K_.keepCount > 0 ? distToQ(x, radius_ + s) : radius_ + s;
    double nuW = D.distToNonInterior(x);

    Vec acc{};
    double total = 0.0;
    if (nuW > 0.0) {
        acc = f_.eval(x) * nuW;
        total = nuW;
    }

    // active members: window of cells whose member cube can contain x
    std::array<int32_t, 3> c0{};
    Vec origin = T_.latticePos({0, 0, 0});
    for (int d = 0; d < n; ++d)
        c0[static_cast<size_t>(d)] = static_cast<int32_t>(std::floor((x[d] - origin[d]) / s));
    int window = 5;
    int activeMembers = 0;
    int zr = n == 3 ? window : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -window; dy <= window; ++dy)
            for (int dx = -window; dx <= window; ++dx) {
                std::array<int32_t, 3> c{c0[0] + dx, c0[1] + dy, n == 3 ? c0[2] + dz : 0};
                auto range = T_.cellSimplices(c);
                if (range.first < 0) continue; // no member for cells outside P
                int64_t lin = range.second;
                auto it = memberMemo_.find(lin);
                if (it == memberMemo_.end()) {
                    Vec center = T_.memberCenterOfCell(c);
                    it = memberMemo_.emplace(lin, std::make_pair(center, f_.eval(center))).first;
                }
                const Vec& center = it->second.first;
                double a = radius_ - distInf(x, center);
                if (a <= 0.0) continue;
                double nu = std::min(a, dQ);
                if (nu <= 0.0) continue;
                acc += it->second.second * nu;
                total += nu;
                ++activeMembers;
            }

    if (!(total > 0.0))
        throw Error(ErrClass::Internal, "partition-of-unity cover property violated at a point of P");
    if (breakdown) {
        breakdown->nuW = nuW;
        breakdown->nuSum = total;
        breakdown->phiW = nuW / total;
        breakdown->activeMembers = activeMembers;
        // recompute phi sum the way a client would, for the normalization check
        double phiSum = nuW / total;
        for (int dz = -zr; dz <= zr; ++dz)
            for (int dy = -window; dy <= window; ++dy)
                for (int dx = -window; dx <= window; ++dx) {
                    std::array<int32_t, 3> c{c0[0] + dx, c0[1] + dy, n == 3 ? c0[2] + dz : 0};
                    auto range = T_.cellSimplices(c);
                    if (range.first < 0) continue;
                    auto it = memberMemo_.find(range.second);
                    double a = radius_ - distInf(x, it->second.first);
                    if (a <= 0.0) continue;
                    double nu = std::min(a, dQ);
                    if (nu <= 0.0) continue;
                    phiSum += nu / total;
                }
        breakdown->phiSum = phiSum;
    }
    return acc * (1.0 / total);
}

// ---------------------------------------------------------------------------
// ApproximantG

int64_t ApproximantG::viewVertexCount() const {
    return levels == 0 ? grid->vertexCount() : static_cast<int64_t>(mesh->vertices.size());
}

Vec ApproximantG::vertexPos(int64_t v) const {
    return levels == 0 ? grid->vertexPosition(static_cast<int32_t>(v)) : mesh->vertices[static_cast<size_t>(v)];
}

int64_t ApproximantG::keepSimplexCount() const {
    return levels == 0 ? K->keepCount : mesh->simplexCount(n);
}

int64_t ApproximantG::boundaryFaceCount() const {
    return levels == 0 ? static_cast<int64_t>(K->boundaryFaces.size() / static_cast<size_t>(n))
                       : static_cast<int64_t>(meshBoundaryFaces.size());
}

struct ApproximantG::MeshLocator {
    simplicial::ComplexLocator top;
    // bucket grid over the listed boundary faces
    Vec lo{}, hi{};
    double cell = 1.0;
    int nx = 1, ny = 1, nz = 1;
    std::vector<std::vector<int32_t>> buckets;
    const simplicial::MeshComplex* M = nullptr;
    const std::vector<int32_t>* faces = nullptr;
    int n = 2;

    explicit MeshLocator(const simplicial::MeshComplex& mesh) : top(mesh) {}

    size_t bucketOf(int ix, int iy, int iz) const {
        ix = std::clamp(ix, 0, nx - 1);
        iy = std::clamp(iy, 0, ny - 1);
        iz = std::clamp(iz, 0, nz - 1);
        return (static_cast<size_t>(iz) * ny + iy) * nx + ix;
    }

    void buildFaceIndex(const simplicial::MeshComplex& mesh, const std::vector<int32_t>& faceIdx) {
        M = &mesh;
        faces = &faceIdx;
        n = mesh.n;
        if (mesh.vertices.empty() || faceIdx.empty()) return;
        lo = hi = mesh.vertices[0];
        for (const Vec& v : mesh.vertices)
            for (int d = 0; d < n; ++d) {
                lo[d] = std::min(lo[d], v[d]);
                hi[d] = std::max(hi[d], v[d]);
            }
        double avg = 0.0;
        for (int32_t fi : faceIdx) {
            auto tup = mesh.simplexVertices(n - 1, fi);
            avg += distInf(mesh.vertices[static_cast<size_t>(tup[0])], mesh.vertices[static_cast<size_t>(tup[1 % tup.size()])]);
        }
        cell = std::max(1e-12, avg / static_cast<double>(faceIdx.size()));
        nx = std::max(1, static_cast<int>((hi[0] - lo[0]) / cell) + 1);
        ny = std::max(1, static_cast<int>((hi[1] - lo[1]) / cell) + 1);
        nz = n == 3 ? std::max(1, static_cast<int>((hi[2] - lo[2]) / cell) + 1) : 1;
        buckets.assign(static_cast<size_t>(nx) * ny * nz, {});
        for (size_t k = 0; k < faceIdx.size(); ++k) {
            auto tup = mesh.simplexVertices(n - 1, faceIdx[k]);
            Vec blo = mesh.vertices[static_cast<size_t>(tup[0])], bhi = blo;
            for (int32_t v : tup)
                for (int d = 0; d < n; ++d) {
                    blo[d] = std::min(blo[d], mesh.vertices[static_cast<size_t>(v)][d]);
                    bhi[d] = std::max(bhi[d], mesh.vertices[static_cast<size_t>(v)][d]);
                }
            int x0 = static_cast<int>((blo[0] - lo[0]) / cell), x1 = static_cast<int>((bhi[0] - lo[0]) / cell);
            int y0 = static_cast<int>((blo[1] - lo[1]) / cell), y1 = static_cast<int>((bhi[1] - lo[1]) / cell);
            int z0 = 0, z1 = 0;
            if (n == 3) {
                z0 = static_cast<int>((blo[2] - lo[2]) / cell);
                z1 = static_cast<int>((bhi[2] - lo[2]) / cell);
            }
            for (int z = z0; z <= z1; ++z)
                for (int y = y0; y <= y1; ++y)
                    for (int x = x0; x <= x1; ++x) buckets[bucketOf(x, y, z)].push_back(static_cast<int32_t>(k));
        }
    }
};

void ApproximantG::buildLocator() {
    if (levels == 0) return;
    locator_ = std::make_shared<MeshLocator>(*mesh);
    locator_->buildFaceIndex(*mesh, meshBoundaryFaces);
}

Vec ApproximantG::evalAt(const Vec& z) const {
    Vec out{};
    if (levels == 0) {
        auto hit = grid->locate(z);
        if (!hit)
            throw Error(ErrClass::Internal, "PL evaluation outside the polytope");
        int32_t ids[4];
        grid->vertexIds(hit->simplex, ids);
        for (int j = 0; j <= n; ++j) {
            double l = hit->coords.lambda[static_cast<size_t>(j)];
            out += valueAt(ids[j]) * l;
        }
        return out;
    }
    // mesh path: try the n-simplices, then the boundary faces
    if (auto hit = locator_->top.locate(z)) {
        auto tup = mesh->simplexVertices(n, hit->first);
        for (int j = 0; j <= n; ++j)
            out += valueAt(tup[static_cast<size_t>(j)]) * hit->second.lambda[static_cast<size_t>(j)];
        return out;
    }
    if (!locator_->buckets.empty()) {
        int ix = static_cast<int>((z[0] - locator_->lo[0]) / locator_->cell);
        int iy = static_cast<int>((z[1] - locator_->lo[1]) / locator_->cell);
        int iz = n == 3 ? static_cast<int>((z[2] - locator_->lo[2]) / locator_->cell) : 0;
        Vec pts[4];
        for (int32_t k : locator_->buckets[locator_->bucketOf(ix, iy, iz)]) {
            int32_t fi = meshBoundaryFaces[static_cast<size_t>(k)];
            auto tup = mesh->simplexVertices(n - 1, fi);
            for (size_t j = 0; j < tup.size(); ++j) pts[j] = mesh->vertices[static_cast<size_t>(tup[j])];
            auto lr = simplicial::locateInSimplex({pts, tup.size()}, z, n);
            if (lr.where == simplicial::Location::Outside) continue;
            for (int j = 0; j < n; ++j)
                out += valueAt(tup[static_cast<size_t>(j)]) * lr.coords.lambda[static_cast<size_t>(j)];
            return out;
        }
    }
    throw Error(ErrClass::Internal, "PL evaluation failed to locate the point in K-hat");
}

// ---------------------------------------------------------------------------

simplicial::MeshComplex exportK(const GridTriangulation& T, const ComplexK& K,
                                std::vector<int32_t>& boundaryFacesOut,
                                std::vector<int64_t>& boundaryParentsOut,
                                std::vector<int64_t>& keepParentsOut) {
    simplicial::MeshComplex M;
    const int n = T.n();
    M.n = n;
    const int64_t nv = T.vertexCount();
    M.vertices.resize(static_cast<size_t>(nv));
    for (int64_t v = 0; v < nv; ++v) M.vertices[static_cast<size_t>(v)] = T.vertexPosition(static_cast<int32_t>(v));
    for (int64_t v = 0; v < nv; ++v) M.simplices[0].push_back(static_cast<int32_t>(v));

    boundaryFacesOut.clear();
    boundaryParentsOut.clear();
    keepParentsOut.clear();

    struct KeyHash {
        size_t operator()(const std::array<int32_t, 3>& v) const {
            size_t h = 1469598103934665603ULL;
            for (int32_t x : v) h = (h ^ static_cast<size_t>(x + 1)) * 1099511628211ULL;
            return h;
        }
    };
    std::unordered_map<std::array<int32_t, 3>, int32_t, KeyHash> faceIdx; // (n-1)-simplices
    std::unordered_map<std::array<int32_t, 3>, int32_t, KeyHash> edgeIdx; // 1-simplices (n == 3)

    auto addFace = [&](std::array<int32_t, 3> key) -> int32_t {
        std::sort(key.begin(), key.begin() + n);
        auto it = faceIdx.find(key);
        if (it != faceIdx.end()) return it->second;
        int32_t id = M.simplexCount(n - 1);
        for (int j = 0; j < n; ++j) M.simplices[static_cast<size_t>(n - 1)].push_back(key[static_cast<size_t>(j)]);
        faceIdx.emplace(key, id);
        return id;
    };
    auto addEdge = [&](int32_t a, int32_t b) {
        std::array<int32_t, 3> key{std::min(a, b), std::max(a, b), INT32_MAX};
        auto it = edgeIdx.find(key);
        if (it != edgeIdx.end()) return;
        int32_t id = M.simplexCount(1);
        M.simplices[1].push_back(key[0]);
        M.simplices[1].push_back(key[1]);
        edgeIdx.emplace(key, id);
    };

    // the designated boundary chains come first so their indices are stable
    const size_t faceCount = K.boundaryFaces.size() / static_cast<size_t>(n);
    for (size_t i = 0; i < faceCount; ++i) {
        std::array<int32_t, 3> key{INT32_MAX, INT32_MAX, INT32_MAX};
        for (int j = 0; j < n; ++j) key[static_cast<size_t>(j)] = K.boundaryFaces[i * static_cast<size_t>(n) + static_cast<size_t>(j)];
        boundaryFacesOut.push_back(addFace(key));
        boundaryParentsOut.push_back(K.boundaryParents[i]);
    }

    int32_t ids[4];
    const int64_t count = T.simplexCount();
    for (int64_t s = 0; s < count; ++s) {
        if (T.label(s) != Label::Keep) continue;
        T.vertexIds(s, ids);
        for (int j = 0; j <= n; ++j) M.simplices[static_cast<size_t>(n)].push_back(ids[j]);
        keepParentsOut.push_back(s);
        for (int skip = 0; skip <= n; ++skip) {
            std::array<int32_t, 3> key{INT32_MAX, INT32_MAX, INT32_MAX};
            int w = 0;
            for (int j = 0; j <= n; ++j)
                if (j != skip) key[static_cast<size_t>(w++)] = ids[j];
            addFace(key);
        }
    }

    if (n == 3) {
        for (int32_t f = 0; f < M.simplexCount(2); ++f) {
            auto tup = M.simplexVertices(2, f);
            addEdge(tup[0], tup[1]);
            addEdge(tup[1], tup[2]);
            addEdge(tup[0], tup[2]);
        }
    } else {
        // in 2d the (n-1)-simplices are the edges themselves
    }

    M.buildStars();
    return M;
}

// ---------------------------------------------------------------------------
// pl_snap

namespace {

// deterministic uniform barycentric sample (folded square / cube tricks)
void randomBarycentric(SplitMix64& rng, int count, double lam[4]) {
    if (count == 2) {
        double u = rng.nextDouble();
        lam[0] = 1.0 - u;
        lam[1] = u;
    } else if (count == 3) {
        double u = rng.nextDouble(), v = rng.nextDouble();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        lam[0] = 1.0 - u - v;
        lam[1] = u;
        lam[2] = v;
    } else {
        // Rocchini-Cignoni folding for the tetrahedron
        double u = rng.nextDouble(), v = rng.nextDouble(), w = rng.nextDouble();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        if (v + w > 1.0) {
            double t = w;
            w = 1.0 - u - v;
            v = 1.0 - t;
        } else if (u + v + w > 1.0) {
            double t = w;
            w = u + v + w - 1.0;
            u = 1.0 - v - t;
        }
        lam[0] = 1.0 - u - v - w;
        lam[1] = u;
        lam[2] = v;
        lam[3] = w;
    }
}

struct SnapScan {
    double maxErr = 0.0;
    int64_t samples = 0;
};

// error |g~ - PL| over the pinned sample set of one simplex
template <typename GFun>
void scanSimplex(const Vec pos[4], const Vec val[4], int count, int n, uint64_t seed, int64_t tag,
                 bool inQ, const GFun& g, SnapScan& scan) {
    auto sampleAt = [&](const double lam[4]) {
        Vec x{}, pl{};
        for (int j = 0; j < count; ++j) {
            x += pos[j] * lam[j];
            pl += val[j] * lam[j];
        }
        Vec truth = g(x, inQ);
        double err = norm2(truth - pl);
        if (err > scan.maxErr) scan.maxErr = err;
        ++scan.samples;
    };
    double lam[4] = {0, 0, 0, 0};
    for (int j = 0; j < count; ++j) lam[j] = 1.0 / count;
    sampleAt(lam); // barycenter
    for (int a = 0; a < count; ++a)
        for (int b = a + 1; b < count; ++b) { // edge midpoints
            for (int j = 0; j < count; ++j) lam[j] = 0.0;
            lam[a] = lam[b] = 0.5;
            sampleAt(lam);
        }
    SplitMix64 rng(mixSeed(seed, static_cast<uint64_t>(tag)));
    for (int k = 0; k < 10; ++k) {
        randomBarycentric(rng, count, lam);
        sampleAt(lam);
    }
}

} // namespace

ApproximantG plSnap(const GridTriangulation& T, const ComplexK& K, const GTildeEvaluator& g,
                    double snapBudget, int levelsCap, int64_t maxSimplices, uint64_t seed) {
    const int n = T.n();
    const domain::FieldSpec* field = g.field();

    for (int levels = 0; levels <= levelsCap; ++levels) {
        ApproximantG A;
        A.n = n;
        A.levels = levels;
        A.grid = &T;
        A.K = &K;

        if (levels == 0) {
            const int64_t nv = T.vertexCount();
            A.values.assign(static_cast<size_t>(nv) * n, 0.0);
            for (int64_t v = 0; v < nv; ++v) {
                Vec x = T.vertexPosition(static_cast<int32_t>(v));
                Vec val = K.vertexInQ[static_cast<size_t>(v)] ? field->eval(x) : g.eval(x);
                for (int d = 0; d < n; ++d) A.values[static_cast<size_t>(v) * n + static_cast<size_t>(d)] = val[d];
            }
        } else {
            // materialized subdivision path (small runs)
            simplicial::MeshComplex base = exportK(T, K, A.meshBoundaryFaces, A.meshBoundaryParents,
                                                   A.meshKeepParents);
            int64_t projected = (base.simplexCount(n) * (int64_t(1) << (n * levels))) +
                                static_cast<int64_t>(A.meshBoundaryFaces.size()) *
                                    (int64_t(1) << ((n - 1) * levels));
            if (projected > maxSimplices)
                throw Error(ErrClass::Resource,
                            "subdivision for the snap budget exceeds the simplex cap; use a smaller "
                            "cell size or a larger epsilon");
            auto sub = simplicial::subdivideUniform(base, levels);

            // children of the listed boundary faces, with inherited parents
            std::vector<int32_t> childFaces;
            std::vector<int64_t> childParents;
            for (size_t i = 0; i < A.meshBoundaryFaces.size(); ++i) {
                auto kids = sub.childrenOf(n - 1, A.meshBoundaryFaces[i]);
                for (int32_t kid : kids) {
                    childFaces.push_back(kid);
                    childParents.push_back(A.meshBoundaryParents[i]);
                }
            }
            std::vector<int64_t> keepParents;
            keepParents.resize(static_cast<size_t>(sub.complex.simplexCount(n)));
            for (int32_t parent = 0; parent < base.simplexCount(n); ++parent) {
                for (int32_t kid : sub.childrenOf(n, parent))
                    keepParents[static_cast<size_t>(kid)] = A.meshKeepParents[static_cast<size_t>(parent)];
            }
            A.mesh = std::make_shared<simplicial::MeshComplex>(std::move(sub.complex));
            A.meshBoundaryFaces = std::move(childFaces);
            A.meshBoundaryParents = std::move(childParents);
            A.meshKeepParents = std::move(keepParents);
            A.buildLocator();

            const size_t nv = A.mesh->vertices.size();
            std::vector<uint8_t> inQ(nv, 0);
            for (int32_t i = 0; i < A.mesh->simplexCount(n); ++i)
                for (int32_t v : A.mesh->simplexVertices(n, i)) inQ[static_cast<size_t>(v)] = 1;
            A.values.assign(nv * static_cast<size_t>(n), 0.0);
            for (size_t v = 0; v < nv; ++v) {
                const Vec& x = A.mesh->vertices[v];
                Vec val = inQ[v] ? field->eval(x) : g.eval(x);
                for (int d = 0; d < n; ++d) A.values[v * static_cast<size_t>(n) + static_cast<size_t>(d)] = val[d];
            }
        }

        // sampled snap-error estimate over every K-hat simplex
        SnapScan scan;
        auto gfun = [&](const Vec& x, bool inQ) { return inQ ? field->eval(x) : g.eval(x); };
        Vec pos[4], val[4];
        int32_t idbuf[4];
        A.forEachKeep([&](int64_t tag, const int32_t* ids) {
            for (int j = 0; j <= n; ++j) {
                pos[j] = A.vertexPos(ids[j]);
                val[j] = A.valueAt(ids[j]);
            }
            scanSimplex(pos, val, n + 1, n, seed, tag * 2 + 1, true, gfun, scan);
        });
        (void)idbuf;
        A.forEachBoundaryFace([&](int64_t tag, const int32_t* ids) {
            for (int j = 0; j < n; ++j) {
                pos[j] = A.vertexPos(ids[j]);
                val[j] = A.valueAt(ids[j]);
            }
            scanSimplex(pos, val, n, n, seed, tag * 2, false, gfun, scan);
        });
        A.snapError = scan.maxErr;
        A.sampleCount = scan.samples;
        if (A.snapError < snapBudget || (A.keepSimplexCount() + A.boundaryFaceCount()) == 0)
            return A;
    }
    throw Error(ErrClass::Resource,
                "snap error stayed above the budget up to the subdivision cap; use a smaller cell "
                "size or a larger epsilon");
}

} // namespace zfa::approximate
