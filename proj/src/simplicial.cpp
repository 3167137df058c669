#include "simplicial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace zfa::simplicial {

namespace {

// Dense Gaussian elimination with partial pivoting; returns rank with the
// given relative tolerance.  Rows = points, cols = coordinates.
int matrixRank(double m[4][3], int rows, int cols, double tol) {
    double scale = 0.0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) scale = std::max(scale, std::fabs(m[r][c]));
    if (scale == 0.0) return 0;
    double cut = tol * scale;
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        double best = cut;
        for (int r = rank; r < rows; ++r) {
            if (std::fabs(m[r][col]) > best) {
                best = std::fabs(m[r][col]);
                piv = r;
            }
        }
        if (piv < 0) continue;
        for (int c = 0; c < cols; ++c) std::swap(m[piv][c], m[rank][c]);
        for (int r = rank + 1; r < rows; ++r) {
            double f = m[r][col] / m[rank][col];
            for (int c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    return rank;
}

} // namespace

bool geometricIndependence(std::span<const Vec> pts, int n) {
    int count = static_cast<int>(pts.size());
    if (count <= 1) return count == 1;
    if (count > n + 1) return false; // n+2 points in R^n are always dependent
    double m[4][3] = {};
    for (int i = 1; i < count; ++i)
        for (int c = 0; c < n; ++c) m[i - 1][c] = pts[static_cast<size_t>(i)][c] - pts[0][c];
    return matrixRank(m, count - 1, n, kRankTol) == count - 1;
}

BarycentricCoords barycentric(std::span<const Vec> verts, const Vec& p, int n) {
    int k = static_cast<int>(verts.size()) - 1;
    BarycentricCoords out;
    out.count = k + 1;
    if (k == 0) {
        if (distInf(verts[0], p) > kAffineHullTol)
            throw Error(ErrClass::Internal, "point does not coincide with 0-simplex");
        out.lambda[0] = 1.0;
        return out;
    }
    if (k == n) {
        // solve the (n+1)x(n+1) system [v_j ; 1] lambda = [p ; 1]
        double a[4][5];
        for (int r = 0; r < n; ++r) {
            for (int j = 0; j <= n; ++j) a[r][j] = verts[static_cast<size_t>(j)][r];
            a[r][n + 1] = p[r];
        }
        for (int j = 0; j <= n + 1; ++j) a[n][j] = 1.0;
        int rows = n + 1;
        double scale = 0.0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < rows; ++c) scale = std::max(scale, std::fabs(a[r][c]));
        for (int col = 0; col < rows; ++col) {
            int piv = col;
            for (int r = col + 1; r < rows; ++r)
                if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
            if (std::fabs(a[piv][col]) <= kRankTol * scale)
                throw Error(ErrClass::Internal, "degenerate simplex in barycentric solve");
            if (piv != col)
                for (int c = 0; c <= rows; ++c) std::swap(a[piv][c], a[col][c]);
            for (int r = 0; r < rows; ++r) {
                if (r == col) continue;
                double f = a[r][col] / a[col][col];
                for (int c = col; c <= rows; ++c) a[r][c] -= f * a[col][c];
            }
        }
        double sum = 0.0;
        for (int j = 0; j < rows; ++j) {
            out.lambda[static_cast<size_t>(j)] = a[j][rows] / a[j][j];
            sum += out.lambda[static_cast<size_t>(j)];
        }
        for (int j = 0; j < rows; ++j) out.lambda[static_cast<size_t>(j)] /= sum;
        return out;
    }
    // k < n: least squares on the affine frame, then check the residual.
    double g[3][3] = {}, rhs[3] = {};
    Vec d = p - verts[0];
    Vec e[3];
    for (int i = 0; i < k; ++i) e[i] = verts[static_cast<size_t>(i + 1)] - verts[0];
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) g[i][j] = dot(e[i], e[j]);
        rhs[i] = dot(e[i], d);
    }
    // solve g y = rhs (k <= 2)
    double y[3] = {};
    if (k == 1) {
        if (g[0][0] <= 0.0) throw Error(ErrClass::Internal, "degenerate edge");
        y[0] = rhs[0] / g[0][0];
    } else {
        double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        double scale = std::max(std::fabs(g[0][0]), std::max(std::fabs(g[0][1]), std::fabs(g[1][1])));
        if (std::fabs(det) <= kRankTol * scale * scale)
            throw Error(ErrClass::Internal, "degenerate simplex in barycentric solve");
        y[0] = (rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det;
        y[1] = (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det;
    }
    Vec recon = verts[0];
    for (int i = 0; i < k; ++i) recon += e[i] * y[i];
    if (norm2(recon - p) > kAffineHullTol)
        throw Error(ErrClass::Internal, "point outside affine hull of simplex");
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        out.lambda[static_cast<size_t>(i + 1)] = y[i];
        sum += y[i];
    }
    out.lambda[0] = 1.0 - sum;
    return out;
}

LocateResult locateInSimplex(std::span<const Vec> verts, const Vec& p, int n) {
    LocateResult res;
    BarycentricCoords bc;
    try {
        bc = barycentric(verts, p, n);
    } catch (const Error&) {
        res.where = Location::Outside;
        return res;
    }
    res.coords = bc;
    for (int i = 0; i < bc.count; ++i) {
        if (bc.lambda[static_cast<size_t>(i)] < -kInteriorTol) {
            res.where = Location::Outside;
            return res;
        }
    }
    uint32_t mask = 0;
    bool interior = true;
    for (int i = 0; i < bc.count; ++i) {
        if (bc.lambda[static_cast<size_t>(i)] > kInteriorTol)
            mask |= (1u << i);
        else
            interior = false;
    }
    res.where = interior ? Location::Interior : Location::OnBoundary;
    res.faceMask = mask;
    return res;
}

double signedVolume(std::span<const Vec> verts, int n) {
    double det;
    if (n == 2) {
        Vec a = verts[1] - verts[0], b = verts[2] - verts[0];
        det = a[0] * b[1] - a[1] * b[0];
        return det / 2.0;
    }
    Vec a = verts[1] - verts[0], b = verts[2] - verts[0], c = verts[3] - verts[0];
    det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
          a[2] * (b[0] * c[1] - b[1] * c[0]);
    return det / 6.0;
}

double simplexVolume(std::span<const Vec> verts, int n) {
    int k = static_cast<int>(verts.size()) - 1;
    if (k == 0) return 0.0;
    if (k == n) return std::fabs(signedVolume(verts, n));
    // Gram determinant for lower-dimensional content
    Vec e[3];
    for (int i = 0; i < k; ++i) e[i] = verts[static_cast<size_t>(i + 1)] - verts[0];
    if (k == 1) return norm2(e[0]);
    double g00 = dot(e[0], e[0]), g01 = dot(e[0], e[1]), g11 = dot(e[1], e[1]);
    double gram = g00 * g11 - g01 * g01;
    return std::sqrt(std::max(0.0, gram)) / 2.0;
}

std::vector<std::vector<int32_t>> facesOf(std::span<const int32_t> tuple) {
    std::vector<std::vector<int32_t>> out;
    int k1 = static_cast<int>(tuple.size());
    for (uint32_t mask = 1; mask < (1u << k1); ++mask) {
        std::vector<int32_t> face;
        for (int i = 0; i < k1; ++i)
            if (mask & (1u << i)) face.push_back(tuple[static_cast<size_t>(i)]);
        out.push_back(std::move(face));
    }
    return out;
}

void MeshComplex::buildStars() {
    star.assign(vertices.size(), {});
    for (int d = 0; d <= 3; ++d) {
        int32_t cnt = simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i)
            for (int32_t v : simplexVertices(d, i))
                star[static_cast<size_t>(v)].push_back({d, i});
    }
}

SubComplex skeleton(const MeshComplex& K, int d) {
    SubComplex s;
    s.parent = &K;
    for (int dd = 0; dd <= d; ++dd) {
        int32_t cnt = K.simplexCount(dd);
        s.selected[static_cast<size_t>(dd)].resize(static_cast<size_t>(cnt));
        for (int32_t i = 0; i < cnt; ++i) s.selected[static_cast<size_t>(dd)][static_cast<size_t>(i)] = i;
    }
    return s;
}

std::vector<SimplexRef> vertexStar(const MeshComplex& K, int32_t v) {
    if (v < 0 || static_cast<size_t>(v) >= K.vertices.size())
        throw Error(ErrClass::Internal, "vertexStar: unknown vertex id " + std::to_string(v));
    if (!K.star.empty()) return K.star[static_cast<size_t>(v)];
    std::vector<SimplexRef> out;
    for (int d = 0; d <= 3; ++d) {
        int32_t cnt = K.simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i) {
            auto tup = K.simplexVertices(d, i);
            if (std::find(tup.begin(), tup.end(), v) != tup.end()) out.push_back({d, i});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tiny dense two-phase simplex solver for the pairwise-intersection check.
// max c.x  s.t.  A x = b, x >= 0.  Sizes here are at most 5 x 8.
namespace {

struct LpResult {
    bool feasible = false;
    double value = 0.0;
};

LpResult solveLp(int rows, int cols, const std::vector<double>& A,
                 const std::vector<double>& b, const std::vector<double>& c) {
    int total = cols + rows; // plus artificials
    std::vector<double> T(static_cast<size_t>(rows + 1) * (total + 1), 0.0);
    auto at = [&](int r, int col) -> double& { return T[static_cast<size_t>(r) * (total + 1) + col]; };
    std::vector<int> basis(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        double sign = b[static_cast<size_t>(r)] >= 0 ? 1.0 : -1.0;
        for (int j = 0; j < cols; ++j) at(r, j) = sign * A[static_cast<size_t>(r) * cols + j];
        at(r, cols + r) = 1.0;
        at(r, total) = sign * b[static_cast<size_t>(r)];
        basis[static_cast<size_t>(r)] = cols + r;
    }
    // phase 1 objective: minimize sum of artificials
    for (int j = 0; j <= total; ++j) {
        double s = 0.0;
        for (int r = 0; r < rows; ++r) s += at(r, j);
        at(rows, j) = (j >= cols && j < total) ? s - 1.0 : s;
    }

    auto pivot = [&](int pr, int pc) {
        double pv = at(pr, pc);
        for (int j = 0; j <= total; ++j) at(pr, j) /= pv;
        for (int r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            double f = at(r, pc);
            if (f == 0.0) continue;
            for (int j = 0; j <= total; ++j) at(r, j) -= f * at(pr, j);
        }
        basis[static_cast<size_t>(pr)] = pc;
    };

    auto runSimplex = [&](int usableCols) {
        for (int iter = 0; iter < 500; ++iter) {
            int pc = -1; // Bland's rule
            for (int j = 0; j < usableCols; ++j) {
                if (at(rows, j) > 1e-11) {
                    pc = j;
                    break;
                }
            }
            if (pc < 0) return true;
            int pr = -1;
            double best = 0.0;
            for (int r = 0; r < rows; ++r) {
                if (at(r, pc) > 1e-11) {
                    double ratio = at(r, total) / at(r, pc);
                    if (pr < 0 || ratio < best - 1e-14 ||
                        (std::fabs(ratio - best) <= 1e-14 && basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(pr)])) {
                        best = ratio;
                        pr = r;
                    }
                }
            }
            if (pr < 0) return false; // unbounded
            pivot(pr, pc);
        }
        return false;
    };

    runSimplex(total);
    if (at(rows, total) > 1e-8) return {false, 0.0}; // infeasible
    // drive artificials out of the basis where possible
    for (int r = 0; r < rows; ++r) {
        if (basis[static_cast<size_t>(r)] >= cols) {
            for (int j = 0; j < cols; ++j) {
                if (std::fabs(at(r, j)) > 1e-9) {
                    pivot(r, j);
                    break;
                }
            }
        }
    }
    // phase 2: objective max c.x  ->  row = reduced costs of c
    for (int j = 0; j <= total; ++j) at(rows, j) = 0.0;
    for (int j = 0; j < cols; ++j) at(rows, j) = c[static_cast<size_t>(j)];
    for (int r = 0; r < rows; ++r) {
        int bj = basis[static_cast<size_t>(r)];
        if (bj < cols && c[static_cast<size_t>(bj)] != 0.0) {
            double f = c[static_cast<size_t>(bj)];
            for (int j = 0; j <= total; ++j) at(rows, j) -= f * at(r, j);
        }
    }
    // flip: we maximize, so pivot while a reduced cost is positive
    runSimplex(cols);
    double val = -at(rows, total);
    return {true, val};
}

// Largest total barycentric mass outside the shared vertex set that a point
// common to both simplices can carry.  Zero (up to tolerance) iff the
// intersection is exactly the shared face.
double excessIntersectionMass(const MeshComplex& K, SimplexRef sa, SimplexRef sb) {
    auto ta = K.simplexVertices(sa.dim, sa.idx);
    auto tb = K.simplexVertices(sb.dim, sb.idx);
    int p = sa.dim + 1, q = sb.dim + 1;
    int n = K.n;
    int rows = n + 2, cols = p + q;
    std::vector<double> A(static_cast<size_t>(rows * cols), 0.0), b(static_cast<size_t>(rows), 0.0),
        c(static_cast<size_t>(cols), 0.0);
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < p; ++j) A[static_cast<size_t>(r * cols + j)] = K.vertices[static_cast<size_t>(ta[static_cast<size_t>(j)])][r];
        for (int j = 0; j < q; ++j) A[static_cast<size_t>(r * cols + p + j)] = -K.vertices[static_cast<size_t>(tb[static_cast<size_t>(j)])][r];
    }
    for (int j = 0; j < p; ++j) A[static_cast<size_t>(n * cols + j)] = 1.0;
    b[static_cast<size_t>(n)] = 1.0;
    for (int j = 0; j < q; ++j) A[static_cast<size_t>((n + 1) * cols + p + j)] = 1.0;
    b[static_cast<size_t>(n + 1)] = 1.0;

    double worst = 0.0;
    for (int side = 0; side < 2; ++side) {
        std::fill(c.begin(), c.end(), 0.0);
        int count = side == 0 ? p : q;
        int off = side == 0 ? 0 : p;
        auto& own = side == 0 ? ta : tb;
        auto& other = side == 0 ? tb : ta;
        for (int j = 0; j < count; ++j) {
            bool shared = std::find(other.begin(), other.end(), own[static_cast<size_t>(j)]) != other.end();
            if (!shared) c[static_cast<size_t>(off + j)] = 1.0;
        }
        LpResult res = solveLp(rows, cols, A, b, c);
        if (!res.feasible) return 0.0; // disjoint simplices are fine
        worst = std::max(worst, res.value);
    }
    return worst;
}

struct TupleHash {
    size_t operator()(const std::vector<int32_t>& v) const {
        size_t h = 1469598103934665603ULL;
        for (int32_t x : v) {
            h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ULL;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

std::vector<int32_t> sortedTuple(std::span<const int32_t> t) {
    std::vector<int32_t> v(t.begin(), t.end());
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

ValidationReport validateComplex(const MeshComplex& K, const ValidateOptions& opt) {
    ValidationReport rep;
    std::unordered_map<std::vector<int32_t>, SimplexRef, TupleHash> index;

    for (int d = 0; d <= 3; ++d) {
        int32_t cnt = K.simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i) {
            auto key = sortedTuple(K.simplexVertices(d, i));
            if (std::unique(key.begin(), key.end()) != key.end()) {
                rep.issues.push_back({"repeated vertex in simplex", {d, i}, {}});
                continue;
            }
            auto [it, inserted] = index.emplace(std::move(key), SimplexRef{d, i});
            if (!inserted) rep.issues.push_back({"duplicate simplex", {d, i}, it->second});
        }
    }

    // geometric independence of every simplex
    for (int d = 1; d <= 3; ++d) {
        int32_t cnt = K.simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i) {
            auto tup = K.simplexVertices(d, i);
            Vec pts[4];
            for (int j = 0; j <= d; ++j) pts[j] = K.vertices[static_cast<size_t>(tup[static_cast<size_t>(j)])];
            if (!geometricIndependence({pts, static_cast<size_t>(d + 1)}, K.n))
                rep.issues.push_back({"degenerate simplex (vertices not geometrically independent)", {d, i}, {}});
        }
    }

    // condition (1): face closure
    for (int d = 1; d <= 3; ++d) {
        int32_t cnt = K.simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i) {
            auto tup = K.simplexVertices(d, i);
            for (int skip = 0; skip <= d; ++skip) {
                std::vector<int32_t> face;
                for (int j = 0; j <= d; ++j)
                    if (j != skip) face.push_back(tup[static_cast<size_t>(j)]);
                std::sort(face.begin(), face.end());
                if (!index.count(face))
                    rep.issues.push_back({"missing face (condition 1)", {d, i}, {}});
            }
        }
    }

    // coincident vertices make shared-face reasoning meaningless; report them
    {
        std::map<std::array<double, 3>, int32_t> seen;
        for (int32_t v = 0; v < static_cast<int32_t>(K.vertices.size()); ++v) {
            auto [it, inserted] = seen.emplace(K.vertices[static_cast<size_t>(v)].c, v);
            if (!inserted) rep.issues.push_back({"coincident vertices", {0, v}, {0, it->second}});
        }
    }

    // maximal simplices: those not a proper face of anything else
    std::vector<SimplexRef> maximal;
    for (int d = 0; d <= 3; ++d) {
        int32_t cnt = K.simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i) {
            auto tup = sortedTuple(K.simplexVertices(d, i));
            bool isFace = false;
            for (int dd = d + 1; dd <= 3 && !isFace; ++dd) {
                int32_t c2 = K.simplexCount(dd);
                for (int32_t j = 0; j < c2 && !isFace; ++j) {
                    auto sup = sortedTuple(K.simplexVertices(dd, j));
                    isFace = std::includes(sup.begin(), sup.end(), tup.begin(), tup.end());
                }
            }
            if (!isFace) maximal.push_back({d, i});
        }
    }

    if (opt.requirePureTop) {
        for (const auto& m : maximal)
            if (m.dim != K.n)
                rep.issues.push_back({"maximal simplex of dimension below n", m, {}});
    }

    // condition (2) on bbox-overlapping maximal pairs
    struct Box {
        Vec lo, hi;
    };
    std::vector<Box> boxes(maximal.size());
    for (size_t i = 0; i < maximal.size(); ++i) {
        auto tup = K.simplexVertices(maximal[i].dim, maximal[i].idx);
        Box bx;
        bx.lo = bx.hi = K.vertices[static_cast<size_t>(tup[0])];
        for (int32_t v : tup) {
            for (int c = 0; c < K.n; ++c) {
                bx.lo[c] = std::min(bx.lo[c], K.vertices[static_cast<size_t>(v)][c]);
                bx.hi[c] = std::max(bx.hi[c], K.vertices[static_cast<size_t>(v)][c]);
            }
        }
        boxes[i] = bx;
    }
    const double pad = 1e-12;
    for (size_t i = 0; i < maximal.size(); ++i) {
        for (size_t j = i + 1; j < maximal.size(); ++j) {
            bool overlap = true;
            for (int c = 0; c < K.n && overlap; ++c)
                overlap = boxes[i].lo[c] <= boxes[j].hi[c] + pad && boxes[j].lo[c] <= boxes[i].hi[c] + pad;
            if (!overlap) continue;
            double mass = excessIntersectionMass(K, maximal[i], maximal[j]);
            if (mass > 1e-9)
                rep.issues.push_back({"intersection is not a shared face (condition 2), excess mass " +
                                          std::to_string(mass),
                                      maximal[i], maximal[j]});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Edgewise (red) subdivision.

namespace {

struct SupportMap {
    // child vertex -> sorted parent vertex ids spanning its minimal face
    std::vector<std::vector<int32_t>> supports;
};

} // namespace

Subdivision subdivideOnce(const MeshComplex& K) {
    Subdivision out;
    MeshComplex& C = out.complex;
    C.n = K.n;
    C.vertices = K.vertices;

    std::unordered_map<std::vector<int32_t>, SimplexRef, TupleHash> parentIndex;
    for (int d = 0; d <= 3; ++d)
        for (int32_t i = 0; i < K.simplexCount(d); ++i)
            parentIndex.emplace(sortedTuple(K.simplexVertices(d, i)), SimplexRef{d, i});

    SupportMap sm;
    sm.supports.resize(K.vertices.size());
    for (size_t v = 0; v < K.vertices.size(); ++v) sm.supports[v] = {static_cast<int32_t>(v)};

    // midpoint vertex per parent edge
    int32_t edgeCount = K.simplexCount(1);
    std::vector<int32_t> midOf(static_cast<size_t>(edgeCount));
    std::unordered_map<std::vector<int32_t>, int32_t, TupleHash> midByEdge;
    for (int32_t e = 0; e < edgeCount; ++e) {
        auto tup = K.simplexVertices(1, e);
        Vec mid = (K.vertices[static_cast<size_t>(tup[0])] + K.vertices[static_cast<size_t>(tup[1])]) * 0.5;
        int32_t id = static_cast<int32_t>(C.vertices.size());
        C.vertices.push_back(mid);
        midOf[static_cast<size_t>(e)] = id;
        midByEdge.emplace(sortedTuple(tup), id);
        std::vector<int32_t> sup = {tup[0], tup[1]};
        std::sort(sup.begin(), sup.end());
        sm.supports.push_back(sup);
    }
    auto mid = [&](int32_t a, int32_t b) -> int32_t {
        std::vector<int32_t> key = {std::min(a, b), std::max(a, b)};
        auto it = midByEdge.find(key);
        if (it == midByEdge.end())
            throw Error(ErrClass::Internal, "subdivide: complex is not face-closed (missing edge)");
        return it->second;
    };

    std::unordered_map<std::vector<int32_t>, int32_t, TupleHash> childIndex[4];
    auto addChild = [&](int d, std::array<int32_t, 4> tup, SimplexRef parent) -> int32_t {
        if (d == C.n) {
            Vec pts[4];
            for (int j = 0; j <= d; ++j) pts[j] = C.vertices[static_cast<size_t>(tup[static_cast<size_t>(j)])];
            if (signedVolume({pts, static_cast<size_t>(d + 1)}, C.n) < 0.0)
                std::swap(tup[static_cast<size_t>(d - 1)], tup[static_cast<size_t>(d)]);
        }
        std::vector<int32_t> key(tup.begin(), tup.begin() + d + 1);
        std::sort(key.begin(), key.end());
        auto it = childIndex[d].find(key);
        if (it != childIndex[d].end()) return it->second;
        int32_t id = C.simplexCount(d);
        for (int j = 0; j <= d; ++j) C.simplices[static_cast<size_t>(d)].push_back(tup[static_cast<size_t>(j)]);
        out.ancestry[static_cast<size_t>(d)].push_back(parent);
        childIndex[d].emplace(std::move(key), id);
        return id;
    };

    // 0-simplices: original vertices keep their parent 0-simplex; midpoints
    // descend from their edge.
    for (int32_t i = 0; i < K.simplexCount(0); ++i) {
        auto tup = K.simplexVertices(0, i);
        addChild(0, {tup[0], 0, 0, 0}, {0, i});
    }
    for (int32_t e = 0; e < edgeCount; ++e)
        addChild(0, {midOf[static_cast<size_t>(e)], 0, 0, 0}, {1, e});

    // same-dimension children, dimension by dimension
    out.childrenPerParent = {1, 2, 4, 8};
    out.sameDim[0].resize(static_cast<size_t>(K.simplexCount(0)));
    for (int32_t i = 0; i < K.simplexCount(0); ++i) out.sameDim[0][static_cast<size_t>(i)] = i;

    for (int32_t e = 0; e < edgeCount; ++e) {
        auto t = K.simplexVertices(1, e);
        int32_t m = midOf[static_cast<size_t>(e)];
        out.sameDim[1].push_back(addChild(1, {t[0], m, 0, 0}, {1, e}));
        out.sameDim[1].push_back(addChild(1, {m, t[1], 0, 0}, {1, e}));
    }
    for (int32_t f = 0; f < K.simplexCount(2); ++f) {
        auto t = K.simplexVertices(2, f);
        int32_t ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
        SimplexRef pr{2, f};
        out.sameDim[2].push_back(addChild(2, {t[0], ab, ca, 0}, pr));
        out.sameDim[2].push_back(addChild(2, {ab, t[1], bc, 0}, pr));
        out.sameDim[2].push_back(addChild(2, {ca, bc, t[2], 0}, pr));
        out.sameDim[2].push_back(addChild(2, {ab, bc, ca, 0}, pr));
        addChild(1, {ab, bc, 0, 0}, pr);
        addChild(1, {bc, ca, 0, 0}, pr);
        addChild(1, {ca, ab, 0, 0}, pr);
    }
    for (int32_t s = 0; s < K.simplexCount(3); ++s) {
        auto t = K.simplexVertices(3, s);
        int32_t m01 = mid(t[0], t[1]), m02 = mid(t[0], t[2]), m03 = mid(t[0], t[3]);
        int32_t m12 = mid(t[1], t[2]), m13 = mid(t[1], t[3]), m23 = mid(t[2], t[3]);
        SimplexRef pr{3, s};
        std::array<std::array<int32_t, 4>, 8> kids = {{
            {t[0], m01, m02, m03},
            {m01, t[1], m12, m13},
            {m02, m12, t[2], m23},
            {m03, m13, m23, t[3]},
            // octahedron, split along the m02-m13 diagonal
            {m01, m02, m03, m13},
            {m01, m02, m12, m13},
            {m02, m03, m13, m23},
            {m02, m12, m13, m23},
        }};
        for (auto& kid : kids) out.sameDim[3].push_back(addChild(3, kid, pr));
    }

    // face closure, assigning each new face its minimal parent via supports
    for (int d = topDim; d >= 2; --d) {
        // iterate over a snapshot: closure of dimension d adds (d-1)-faces
        int32_t cnt = C.simplexCount(d);
        for (int32_t i = 0; i < cnt; ++i) {
            std::array<int32_t, 4> tup{};
            auto tv = C.simplexVertices(d, i);
            std::copy(tv.begin(), tv.end(), tup.begin());
            for (int skip = 0; skip <= d; ++skip) {
                std::array<int32_t, 4> face{};
                int w = 0;
                for (int j = 0; j <= d; ++j)
                    if (j != skip) face[static_cast<size_t>(w++)] = tup[static_cast<size_t>(j)];
                std::vector<int32_t> key(face.begin(), face.begin() + d);
                std::sort(key.begin(), key.end());
                if (childIndex[d - 1].count(key)) continue;
                std::vector<int32_t> sup;
                for (int j = 0; j < d; ++j) {
                    const auto& s = sm.supports[static_cast<size_t>(face[static_cast<size_t>(j)])];
                    sup.insert(sup.end(), s.begin(), s.end());
                }
                std::sort(sup.begin(), sup.end());
                sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
                auto pit = parentIndex.find(sup);
                if (pit == parentIndex.end())
                    throw Error(ErrClass::Internal, "subdivide: support face missing in parent");
                addChild(d - 1, face, pit->second);
            }
        }
    }

    C.buildStars();
    return out;
}

Subdivision subdivideUniform(const MeshComplex& K, int levels) {
    if (levels < 0) throw Error(ErrClass::Io, "subdivision levels must be nonnegative");
    Subdivision acc;
    acc.complex = K;
    acc.complex.buildStars();
    for (int d = 0; d <= 3; ++d) {
        int32_t cnt = acc.complex.simplexCount(d);
        acc.ancestry[static_cast<size_t>(d)].resize(static_cast<size_t>(cnt));
        acc.sameDim[static_cast<size_t>(d)].resize(static_cast<size_t>(cnt));
        for (int32_t i = 0; i < cnt; ++i) {
            acc.ancestry[static_cast<size_t>(d)][static_cast<size_t>(i)] = {d, i};
            acc.sameDim[static_cast<size_t>(d)][static_cast<size_t>(i)] = i;
        }
    }

    for (int level = 0; level < levels; ++level) {
        Subdivision next = subdivideOnce(acc.complex);
        // compose ancestry through this level
        for (int d = 0; d <= 3; ++d) {
            for (auto& ref : next.ancestry[static_cast<size_t>(d)]) {
                ref = acc.ancestry[static_cast<size_t>(ref.dim)][static_cast<size_t>(ref.idx)];
            }
        }
        for (int d = 0; d <= 3; ++d) {
            size_t dd = static_cast<size_t>(d);
            int32_t oldStride = acc.childrenPerParent[dd];
            int32_t stepStride = next.childrenPerParent[dd];
            size_t parents = oldStride > 0 && !acc.sameDim[dd].empty()
                                 ? acc.sameDim[dd].size() / static_cast<size_t>(oldStride)
                                 : 0;
            std::vector<int32_t> composed;
            composed.reserve(parents * static_cast<size_t>(oldStride) * static_cast<size_t>(stepStride));
            for (size_t p = 0; p < parents; ++p)
                for (int32_t k = 0; k < oldStride; ++k) {
                    int32_t midId = acc.sameDim[dd][p * static_cast<size_t>(oldStride) + static_cast<size_t>(k)];
                    auto leaves = next.childrenOf(d, midId);
                    composed.insert(composed.end(), leaves.begin(), leaves.end());
                }
            next.sameDim[dd] = std::move(composed);
            next.childrenPerParent[dd] = oldStride * stepStride;
        }
        acc.complex = std::move(next.complex);
        acc.ancestry = std::move(next.ancestry);
        acc.sameDim = std::move(next.sameDim);
        acc.childrenPerParent = next.childrenPerParent;
    }
    return acc;
}

// ---------------------------------------------------------------------------

size_t ComplexLocator::bucketOf(int ix, int iy, int iz) const {
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    iz = std::clamp(iz, 0, nz_ - 1);
    return (static_cast<size_t>(iz) * ny_ + iy) * nx_ + ix;
}

ComplexLocator::ComplexLocator(const MeshComplex& K) : K_(K) {
    for (int d = 1; d <= 3; ++d)
        if (K.simplexCount(d) > 0) topDim_ = d;
    if (K.vertices.empty()) return;
    lo_ = hi_ = K.vertices[0];
    for (const Vec& v : K.vertices)
        for (int c = 0; c < K.n; ++c) {
            lo_[c] = std::min(lo_[c], v[c]);
            hi_[c] = std::max(hi_[c], v[c]);
        }
    double avgEdge = 0.0;
    int32_t cnt = K.simplexCount(topDim_);
    for (int32_t i = 0; i < cnt; ++i) {
        auto tup = K.simplexVertices(topDim_, i);
        avgEdge += distInf(K.vertices[static_cast<size_t>(tup[0])], K.vertices[static_cast<size_t>(tup[1])]);
    }
    cell_ = cnt > 0 ? std::max(1e-12, avgEdge / cnt) : 1.0;
    nx_ = std::max(1, static_cast<int>((hi_[0] - lo_[0]) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((hi_[1] - lo_[1]) / cell_) + 1);
    nz_ = K.n == 3 ? std::max(1, static_cast<int>((hi_[2] - lo_[2]) / cell_) + 1) : 1;
    buckets_.assign(static_cast<size_t>(nx_) * ny_ * nz_, {});
    for (int32_t i = 0; i < cnt; ++i) {
        auto tup = K.simplexVertices(topDim_, i);
        Vec blo = K_.vertices[static_cast<size_t>(tup[0])], bhi = blo;
        for (int32_t v : tup)
            for (int c = 0; c < K.n; ++c) {
                blo[c] = std::min(blo[c], K.vertices[static_cast<size_t>(v)][c]);
                bhi[c] = std::max(bhi[c], K.vertices[static_cast<size_t>(v)][c]);
            }
        int x0 = static_cast<int>((blo[0] - lo_[0]) / cell_), x1 = static_cast<int>((bhi[0] - lo_[0]) / cell_);
        int y0 = static_cast<int>((blo[1] - lo_[1]) / cell_), y1 = static_cast<int>((bhi[1] - lo_[1]) / cell_);
        int z0 = 0, z1 = 0;
        if (K.n == 3) {
            z0 = static_cast<int>((blo[2] - lo_[2]) / cell_);
            z1 = static_cast<int>((bhi[2] - lo_[2]) / cell_);
        }
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) buckets_[bucketOf(x, y, z)].push_back(i);
    }
}

std::optional<std::pair<int32_t, BarycentricCoords>> ComplexLocator::locate(const Vec& p) const {
    if (buckets_.empty()) return std::nullopt;
    for (int c = 0; c < K_.n; ++c)
        if (p[c] < lo_[c] - kContainTol || p[c] > hi_[c] + kContainTol) return std::nullopt;
    int ix = static_cast<int>((p[0] - lo_[0]) / cell_);
    int iy = static_cast<int>((p[1] - lo_[1]) / cell_);
    int iz = K_.n == 3 ? static_cast<int>((p[2] - lo_[2]) / cell_) : 0;
    const auto& cand = buckets_[bucketOf(ix, iy, iz)];
    Vec pts[4];
    for (int32_t i : cand) {
        auto tup = K_.simplexVertices(topDim_, i);
        for (size_t j = 0; j < tup.size(); ++j) pts[j] = K_.vertices[static_cast<size_t>(tup[j])];
        LocateResult lr = locateInSimplex({pts, tup.size()}, p, K_.n);
        if (lr.where != Location::Outside) return std::make_pair(i, lr.coords);
        // tolerate slightly-outside points on shared faces
        if (lr.coords.count == static_cast<int>(tup.size()) && lr.coords.min() >= -kContainTol)
            return std::make_pair(i, lr.coords);
    }
    return std::nullopt;
}

} // namespace zfa::simplicial
