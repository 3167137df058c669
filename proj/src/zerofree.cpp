#include "zerofree.hpp"

#include <algorithm>
#include <cmath>

namespace zfa::zerofree {

Vec clampR(const Vec& x, double rho, int n) {
    (void)n;
    double r = norm2(x);
    if (r == 0.0) throw Error(ErrClass::Io, "clamp map is undefined at the origin");
    if (r >= rho) return x;
    return x * (rho / r);
}

// ---------------------------------------------------------------------------
// distance from the origin to the hull of up to four points

namespace {

double segMinNorm(const Vec& p, const Vec& q) {
    Vec d = q - p;
    double len2 = norm2sq(d);
    double t = len2 > 0.0 ? -dot(p, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm2(p + d * t);
}

double triMinNorm(const Vec& a, const Vec& b, const Vec& c, int n) {
    if (n == 2) {
        auto cross = [](const Vec& u, const Vec& v) { return u[0] * v[1] - u[1] * v[0]; };
        double d0 = cross(a, b), d1 = cross(b, c), d2 = cross(c, a);
        bool nonNeg = d0 >= 0 && d1 >= 0 && d2 >= 0;
        bool nonPos = d0 <= 0 && d1 <= 0 && d2 <= 0;
        bool degenerate = d0 == 0 && d1 == 0 && d2 == 0;
        if ((nonNeg || nonPos) && !degenerate) return 0.0;
        return std::min({segMinNorm(a, b), segMinNorm(b, c), segMinNorm(a, c)});
    }
    // origin-to-triangle in space
    Vec e0 = b - a, e1 = c - a;
    double g00 = dot(e0, e0), g01 = dot(e0, e1), g11 = dot(e1, e1);
    double det = g00 * g11 - g01 * g01;
    if (std::fabs(det) > 1e-30) {
        double r0 = -dot(e0, a), r1 = -dot(e1, a);
        double u = (r0 * g11 - r1 * g01) / det;
        double v = (g00 * r1 - g01 * r0) / det;
        if (u >= 0.0 && v >= 0.0 && u + v <= 1.0) return norm2(a + e0 * u + e1 * v);
    }
    return std::min({segMinNorm(a, b), segMinNorm(b, c), segMinNorm(a, c)});
}

} // namespace

double certifiedMinNorm(const Vec vals[], int count, int n) {
    if (count == 1) return norm2(vals[0]);
    if (count == 2) return segMinNorm(vals[0], vals[1]);
    if (count == 3) return triMinNorm(vals[0], vals[1], vals[2], n);
    // tetrahedron of values in R^3: zero iff the origin is inside
    double v0 = simplicial::signedVolume(std::span<const Vec>{vals, 4}, 3);
    if (std::fabs(v0) > 1e-300) {
        bool inside = true;
        for (int j = 0; j <= 3 && inside; ++j) {
            Vec sub[4];
            for (int k = 0; k <= 3; ++k) sub[k] = vals[k];
            sub[j] = Vec{};
            if (simplicial::signedVolume(std::span<const Vec>{sub, 4}, 3) * v0 < 0.0) inside = false;
        }
        if (inside) return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    for (auto& f : faces) best = std::min(best, triMinNorm(vals[f[0]], vals[f[1]], vals[f[2]], 3));
    return best;
}

// ---------------------------------------------------------------------------
// exact origin-avoidance verdicts

namespace {

using quad = __float128;

inline quad qcross2(const Vec& p, const Vec& q) {
    return static_cast<quad>(p[0]) * static_cast<quad>(q[1]) - static_cast<quad>(p[1]) * static_cast<quad>(q[0]);
}

inline quad qdot(const Vec& p, const Vec& q, int n) {
    quad s = 0;
    for (int d = 0; d < n; ++d) s += static_cast<quad>(p[d]) * static_cast<quad>(q[d]);
    return s;
}

// origin on the closed segment [p, q]?
bool originOnSegment(const Vec& p, const Vec& q, int n) {
    // double filter on the collinearity defect
    if (n == 2) {
        double cr = p[0] * q[1] - p[1] * q[0];
        double mag = std::fabs(p[0] * q[1]) + std::fabs(p[1] * q[0]);
        if (std::fabs(cr) > 4e-16 * mag) return false;
    } else {
        double mags = 0.0, crs = 0.0;
        const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
        for (auto& pr : pairs) {
            double c = p[pr[0]] * q[pr[1]] - p[pr[1]] * q[pr[0]];
            crs = std::max(crs, std::fabs(c));
            mags = std::max(mags, std::fabs(p[pr[0]] * q[pr[1]]) + std::fabs(p[pr[1]] * q[pr[0]]));
        }
        if (crs > 4e-16 * mags) return false;
    }
    // exact: products of doubles are exact in quad precision
    if (n == 2) {
        if (qcross2(p, q) != 0) return false;
    } else {
        const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
        for (auto& pr : pairs) {
            Vec p2{{p[pr[0]], p[pr[1]], 0}}, q2{{q[pr[0]], q[pr[1]], 0}};
            if (qcross2(p2, q2) != 0) return false;
        }
    }
    return qdot(p, q, n) <= 0; // origin between the endpoints (or at one)
}

// origin in the closed planar triangle?
bool originInTriangle2(const Vec& a, const Vec& b, const Vec& c) {
    quad d0 = qcross2(a, b), d1 = qcross2(b, c), d2 = qcross2(c, a);
    if (d0 == 0 && d1 == 0 && d2 == 0) {
        // degenerate hull: a segment (or point); the extreme pair is one edge
        return originOnSegment(a, b, 2) || originOnSegment(b, c, 2) || originOnSegment(a, c, 2);
    }
    bool nonNeg = d0 >= 0 && d1 >= 0 && d2 >= 0;
    bool nonPos = d0 <= 0 && d1 <= 0 && d2 <= 0;
    return nonNeg || nonPos;
}

// origin in the closed triangle embedded in R^3 (conservative: answers true
// when coplanarity cannot be excluded and every axis projection contains
// the origin)
bool originInTriangle3(const Vec& a, const Vec& b, const Vec& c) {
    // coplanarity defect det[a b c]; quad evaluation with an error bound
    quad det = static_cast<quad>(a[0]) * (static_cast<quad>(b[1]) * static_cast<quad>(c[2]) -
                                          static_cast<quad>(b[2]) * static_cast<quad>(c[1])) -
               static_cast<quad>(a[1]) * (static_cast<quad>(b[0]) * static_cast<quad>(c[2]) -
                                          static_cast<quad>(b[2]) * static_cast<quad>(c[0])) +
               static_cast<quad>(a[2]) * (static_cast<quad>(b[0]) * static_cast<quad>(c[1]) -
                                          static_cast<quad>(b[1]) * static_cast<quad>(c[0]));
    double mag = std::fabs(a[0] * b[1] * c[2]) + std::fabs(a[0] * b[2] * c[1]) + std::fabs(a[1] * b[0] * c[2]) +
                 std::fabs(a[1] * b[2] * c[0]) + std::fabs(a[2] * b[0] * c[1]) + std::fabs(a[2] * b[1] * c[0]);
    double detd = static_cast<double>(det);
    if (std::fabs(detd) > 1e-32 * mag) return false; // safely non-coplanar
    // treat as coplanar; the origin must then lie in every projection
    const int drop[3][2] = {{1, 2}, {0, 2}, {0, 1}};
    for (auto& pr : drop) {
        Vec a2{{a[pr[0]], a[pr[1]], 0}}, b2{{b[pr[0]], b[pr[1]], 0}}, c2{{c[pr[0]], c[pr[1]], 0}};
        if (!originInTriangle2(a2, b2, c2)) return false;
    }
    return true;
}

} // namespace

bool hullAvoidsOrigin(const Vec vals[], int count, int n) {
    if (count == 1) {
        for (int d = 0; d < n; ++d)
            if (vals[0][d] != 0.0) return true;
        return false;
    }
    if (count == 2) {
        // fast double filter: clearly nonzero cross or positive dot
        if (n == 2) {
            double cr = vals[0][0] * vals[1][1] - vals[0][1] * vals[1][0];
            double mag = std::fabs(vals[0][0] * vals[1][1]) + std::fabs(vals[0][1] * vals[1][0]);
            if (std::fabs(cr) > 4e-16 * mag) return true;
        }
        return !originOnSegment(vals[0], vals[1], n);
    }
    if (count == 3) {
        if (n == 2) return !originInTriangle2(vals[0], vals[1], vals[2]);
        return !originInTriangle3(vals[0], vals[1], vals[2]);
    }
    return certifiedMinNorm(vals, count, n) > 0.0;
}

// ---------------------------------------------------------------------------

namespace {

// lower bound on dist(0, hull): |v_0| minus the spread around v_0
inline double hullDistLowerBound(const Vec vals[], int count, int n) {
    double base = 0.0;
    for (int d = 0; d < n; ++d) base += vals[0][d] * vals[0][d];
    base = std::sqrt(base);
    double spread = 0.0;
    for (int j = 1; j < count; ++j) spread = std::max(spread, norm2(vals[j] - vals[0]));
    return base - spread;
}

struct MarginTracker {
    static constexpr size_t kCap = 16;
    std::vector<std::pair<double, int64_t>> worst; // ascending

    double threshold() const {
        return worst.size() < kCap ? std::numeric_limits<double>::infinity() : worst.back().first;
    }
    void offer(double margin, int64_t tag) {
        if (worst.size() >= kCap && margin >= worst.back().first) return;
        auto it = std::lower_bound(worst.begin(), worst.end(), std::make_pair(margin, tag));
        worst.insert(it, {margin, tag});
        if (worst.size() > kCap) worst.pop_back();
    }
};

} // namespace

double certifiedMinNormKeep(const ApproximantG& A, bool requirePositive) {
    const int n = A.n;
    double mA = std::numeric_limits<double>::infinity();
    Vec vals[4];
    A.forEachKeep([&](int64_t, const int32_t* ids) {
        for (int j = 0; j <= n; ++j) vals[j] = A.valueAt(ids[j]);
        if (hullDistLowerBound(vals, n + 1, n) >= mA) return;
        double d = certifiedMinNorm(vals, n + 1, n);
        if (d < mA) mA = d;
    });
    if (requirePositive && !(mA > 0.0))
        throw Error(ErrClass::Precondition,
                    "the input map has a zero (or numerically vanishing value) on the Keep region Q; "
                    "the theorem's hypothesis requires f zero-free on the interior of E");
    return mA;
}

AvoidanceConstant chooseAvoidanceConstant(const ApproximantG& A, double mA, double epsilon, uint64_t seed) {
    const int n = A.n;
    AvoidanceConstant out;
    out.bound = std::min(mA, epsilon / 8.0);
    if (!(out.bound > 0.0) || !std::isfinite(out.bound)) out.bound = epsilon / 8.0;

    const int64_t lowerCount = A.keepSimplexCount() + A.boundaryFaceCount();
    if (lowerCount == 0) {
        out.c = Vec{};
        out.draws = 0;
        out.drawRadius = 0.0;
        return out; // no lower skeleton: zero shift is vacuously fine
    }

    SplitMix64 rng(mixSeed(seed, 2));
    double r0 = out.bound / 2.0;

    for (int draw = 1; draw <= 1000; ++draw) {
        double radius = std::ldexp(r0, -((draw - 1) / 50));
        Vec c{};
        for (;;) {
            double s2 = 0.0;
            for (int d = 0; d < n; ++d) {
                c[d] = 2.0 * rng.nextDouble() - 1.0;
                s2 += c[d] * c[d];
            }
            if (s2 <= 1.0) break;
        }
        c = c * radius;

        bool ok = true;
        int64_t checked = 0;
        Vec shifted[4];
        auto shiftedOf = [&](int32_t v, Vec& out2) {
            out2 = A.valueAt(v) + c;
        };
        // vertices of K-hat
        const int64_t nv = A.viewVertexCount();
        for (int64_t v = 0; v < nv && ok; ++v) {
            Vec s;
            shiftedOf(static_cast<int32_t>(v), s);
            ++checked;
            if (!hullAvoidsOrigin(&s, 1, n)) ok = false;
        }
        // edges (and for n=3 the triangles) of every Keep simplex
        if (ok) {
            A.forEachKeep([&](int64_t, const int32_t* ids) {
                if (!ok) return;
                Vec vv[4];
                for (int j = 0; j <= n; ++j) shiftedOf(ids[j], vv[j]);
                for (int a = 0; a <= n && ok; ++a)
                    for (int b = a + 1; b <= n && ok; ++b) {
                        shifted[0] = vv[a];
                        shifted[1] = vv[b];
                        ++checked;
                        if (!hullAvoidsOrigin(shifted, 2, n)) ok = false;
                    }
                if (n == 3 && ok) {
                    const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
                    for (auto& f : faces) {
                        shifted[0] = vv[f[0]];
                        shifted[1] = vv[f[1]];
                        shifted[2] = vv[f[2]];
                        ++checked;
                        if (!hullAvoidsOrigin(shifted, 3, n)) {
                            ok = false;
                            break;
                        }
                    }
                }
            });
        }
        // boundary chain faces and their edges
        if (ok) {
            A.forEachBoundaryFace([&](int64_t, const int32_t* ids) {
                if (!ok) return;
                Vec vv[3];
                for (int j = 0; j < n; ++j) shiftedOf(ids[j], vv[j]);
                ++checked;
                if (!hullAvoidsOrigin(vv, n, n)) {
                    ok = false;
                    return;
                }
                if (n == 3) {
                    for (int a = 0; a < 3 && ok; ++a)
                        for (int b = a + 1; b < 3 && ok; ++b) {
                            shifted[0] = vv[a];
                            shifted[1] = vv[b];
                            ++checked;
                            if (!hullAvoidsOrigin(shifted, 2, n)) ok = false;
                        }
                }
            });
        }
        if (ok) {
            out.c = c;
            out.draws = draw;
            out.drawRadius = radius;
            out.lowerSimplicesChecked = checked;
            return out;
        }
    }
    throw Error(ErrClass::Internal,
                "avoidance-constant draw budget exhausted: the PL image of the lower skeleton "
                "behaves degenerately (every sampled shift hit it)");
}

ZeroFreeMap assembleZeroFree(ApproximantG& A, const AvoidanceConstant& cst, double mA) {
    const int n = A.n;
    ZeroFreeMap Z;
    Z.c = cst.c;
    Z.mA = mA;
    A.shift = cst.c;

    double mu = std::numeric_limits<double>::infinity();
    MarginTracker keepTrack, lowerTrack;
    Vec vals[4];

    A.forEachKeep([&](int64_t tag, const int32_t* ids) {
        for (int j = 0; j <= n; ++j) vals[j] = A.valueAt(ids[j]);
        double screen = std::min(mu, keepTrack.threshold());
        if (hullDistLowerBound(vals, n + 1, n) >= screen) return;
        double d = certifiedMinNorm(vals, n + 1, n);
        keepTrack.offer(d, tag);
        if (d < mu) mu = d;
    });

    auto lowerCheck = [&](const Vec* v, int count, int64_t tag) {
        double screen = std::min(mu, lowerTrack.threshold());
        if (hullDistLowerBound(v, count, n) >= screen) return;
        double d = certifiedMinNorm(v, count, n);
        if (d <= 1e-12 && !hullAvoidsOrigin(v, count, n))
            throw Error(ErrClass::Internal,
                        "zero-freeness certificate failed on the lower skeleton after the shift");
        lowerTrack.offer(d, tag);
        if (d < mu) mu = d;
    };

    const int64_t nv = A.viewVertexCount();
    for (int64_t v = 0; v < nv; ++v) {
        Vec s = A.valueAt(v);
        lowerCheck(&s, 1, -1 - v);
    }
    A.forEachKeep([&](int64_t tag, const int32_t* ids) {
        Vec vv[4];
        for (int j = 0; j <= n; ++j) vv[j] = A.valueAt(ids[j]);
        Vec pair[2];
        for (int a = 0; a <= n; ++a)
            for (int b = a + 1; b <= n; ++b) {
                pair[0] = vv[a];
                pair[1] = vv[b];
                lowerCheck(pair, 2, tag);
            }
        if (n == 3) {
            const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
            Vec tri[3];
            for (auto& f : faces) {
                tri[0] = vv[f[0]];
                tri[1] = vv[f[1]];
                tri[2] = vv[f[2]];
                lowerCheck(tri, 3, tag);
            }
        }
    });
    A.forEachBoundaryFace([&](int64_t tag, const int32_t* ids) {
        Vec vv[3];
        for (int j = 0; j < n; ++j) vv[j] = A.valueAt(ids[j]);
        lowerCheck(vv, n, tag);
        if (n == 3) {
            Vec pair[2];
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b) {
                    pair[0] = vv[a];
                    pair[1] = vv[b];
                    lowerCheck(pair, 2, tag);
                }
        }
    });

    if (!(mu > 0.0))
        throw Error(ErrClass::Internal, "global zero-freeness certificate failed (mu <= 0)");
    Z.mu = mu;
    Z.worstKeep = std::move(keepTrack.worst);
    Z.worstLower = std::move(lowerTrack.worst);
    return Z;
}

Vec evalFinal(const ApproximantG& A, const GridTriangulation& T, const Vec& z) {
    if (!T.domainE().pointInE(z))
        throw Error(ErrClass::Io, "final map evaluated outside E");
    Vec y = approximate::retractH(T, z);
    return A.evalAt(y);
}

} // namespace zfa::zerofree
