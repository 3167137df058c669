#include "verify.hpp"

#include <cmath>

namespace zfa::verify {

using triangulate::Label;

void forEachESample(const domain::DomainE& D, int resolution, int64_t randomCount, uint64_t seed,
                    const std::function<void(const Vec&)>& fn) {
    const auto& grid = D.grid();
    const int n = grid.n;
    domain::CellIdx lo, hi;
    D.cellBounds(lo, hi);

    // lattice pass
    int64_t gx0 = static_cast<int64_t>(lo[0]) * resolution, gx1 = static_cast<int64_t>(hi[0]) * resolution;
    int64_t gy0 = static_cast<int64_t>(lo[1]) * resolution, gy1 = static_cast<int64_t>(hi[1]) * resolution;
    int64_t gz0 = n == 3 ? static_cast<int64_t>(lo[2]) * resolution : 0;
    int64_t gz1 = n == 3 ? static_cast<int64_t>(hi[2]) * resolution : 0;
    const double step = grid.spacing / resolution;
    for (int64_t gz = gz0; gz <= gz1; ++gz)
        for (int64_t gy = gy0; gy <= gy1; ++gy)
            for (int64_t gx = gx0; gx <= gx1; ++gx) {
                domain::CellIdx g{static_cast<int32_t>(gx), static_cast<int32_t>(gy), static_cast<int32_t>(gz)};
                if (!D.latticeInE(g, resolution)) continue;
                Vec p;
                for (int d = 0; d < n; ++d)
                    p[d] = grid.origin[d] + step * static_cast<double>(g[static_cast<size_t>(d)]);
                fn(p);
            }

    // random pass: uniform over full cells; if none, uniform over the listed
    // lower faces (both land exactly inside E)
    SplitMix64 rng(mixSeed(seed, 11));
    const auto& cells = D.fullCells();
    const auto& faces = D.lowerFaces();
    for (int64_t k = 0; k < randomCount; ++k) {
        Vec p{};
        if (!cells.empty()) {
            const auto& c = cells[static_cast<size_t>(rng.next() % cells.size())];
            for (int d = 0; d < n; ++d)
                p[d] = grid.origin[d] + grid.spacing * (c[static_cast<size_t>(d)] + rng.nextDouble());
        } else {
            const auto& f = faces[static_cast<size_t>(rng.next() % faces.size())];
            p = grid.nodePos(f.base);
            if (f.dim == 1) {
                p[f.axis] += grid.spacing * rng.nextDouble();
            } else if (f.dim == 2) {
                for (int d = 0; d < n; ++d)
                    if (d != f.axis) p[d] += grid.spacing * rng.nextDouble();
            }
        }
        fn(p);
    }
}

InteriorScan scanInteriorZeros(const domain::FieldSpec& f, const domain::DomainE& D, int resolution,
                               int64_t randomCount, uint64_t seed) {
    InteriorScan scan;
    forEachESample(D, resolution, randomCount, seed, [&](const Vec& p) {
        Vec v = f.eval(p);
        double nv = norm2(v);
        scan.maxNorm = std::max(scan.maxNorm, nv);
        if (D.pointInInteriorE(p)) {
            scan.hasInteriorSamples = true;
            if (nv < scan.minNorm) {
                scan.minNorm = nv;
                scan.argmin = p;
            }
        }
    });
    return scan;
}

OracleReport oracleScanE(const domain::FieldSpec& f, const PointFn& finalMap, const domain::DomainE& D,
                         int resolution, int64_t randomCount, uint64_t seed) {
    OracleReport rep;
    rep.resolution = resolution;
    rep.seed = seed;
    int64_t count = 0;
    forEachESample(D, resolution, randomCount, seed, [&](const Vec& p) {
        ++count;
        Vec fv = f.eval(p);
        Vec Fv = finalMap(p);
        double err = norm2(fv - Fv);
        if (err > rep.supError) {
            rep.supError = err;
            rep.supArg = p;
        }
        double nf = norm2(Fv);
        if (nf < rep.minNormFinal) {
            rep.minNormFinal = nf;
            rep.minArgFinal = p;
        }
        double ni = norm2(fv);
        rep.minNormInput = std::min(rep.minNormInput, ni);
        rep.maxNormInput = std::max(rep.maxNormInput, ni);
    });
    rep.randomSamples = randomCount;
    rep.gridSamples = count - randomCount;
    return rep;
}

double oracleMinOverK(const ApproximantG& A, uint64_t seed) {
    const int n = A.n;
    double best = std::numeric_limits<double>::infinity();
    const int64_t nv = A.viewVertexCount();
    for (int64_t v = 0; v < nv; ++v) best = std::min(best, norm2(A.valueAt(v)));

    auto scan = [&](int64_t tag, const int32_t* ids, int count) {
        Vec vals[4];
        for (int j = 0; j < count; ++j) vals[j] = A.valueAt(ids[j]);
        Vec bary{};
        for (int j = 0; j < count; ++j) bary += vals[j];
        best = std::min(best, norm2(bary * (1.0 / count)));
        SplitMix64 rng(mixSeed(seed, 7000 + static_cast<uint64_t>(tag)));
        Vec x{};
        double rest = 1.0;
        for (int j = 0; j < count - 1; ++j) {
            double u = rng.nextDouble() * rest;
            x += vals[j] * u;
            rest -= u;
        }
        x += vals[count - 1] * rest;
        best = std::min(best, norm2(x));
    };
    A.forEachKeep([&](int64_t tag, const int32_t* ids) { scan(2 * tag + 1, ids, n + 1); });
    A.forEachBoundaryFace([&](int64_t tag, const int32_t* ids) { scan(2 * tag, ids, n); });
    return best;
}

bool bruteForceAvoidanceCheck(const ApproximantG& A, int resolution) {
    const int n = A.n;
    bool ok = true;
    Vec vals[4];

    auto checkEdge = [&](const Vec& a, const Vec& b) {
        for (int i = 0; i <= resolution && ok; ++i) {
            double t = static_cast<double>(i) / resolution;
            Vec x = a * (1.0 - t) + b * t;
            if (norm2(x) <= 0.0) ok = false;
        }
    };
    auto checkTri = [&](const Vec& a, const Vec& b, const Vec& c) {
        for (int i = 0; i <= resolution && ok; ++i)
            for (int j = 0; j + i <= resolution && ok; ++j) {
                double u = static_cast<double>(i) / resolution;
                double v = static_cast<double>(j) / resolution;
                Vec x = a * (1.0 - u - v) + b * u + c * v;
                if (norm2(x) <= 0.0) ok = false;
            }
    };

    const int64_t nv = A.viewVertexCount();
    for (int64_t v = 0; v < nv && ok; ++v)
        if (norm2(A.valueAt(v)) <= 0.0) ok = false;

    A.forEachKeep([&](int64_t, const int32_t* ids) {
        if (!ok) return;
        for (int j = 0; j <= n; ++j) vals[j] = A.valueAt(ids[j]);
        for (int a = 0; a <= n && ok; ++a)
            for (int b = a + 1; b <= n && ok; ++b) checkEdge(vals[a], vals[b]);
        if (n == 3 && ok) {
            const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
            for (auto& f : faces) {
                checkTri(vals[f[0]], vals[f[1]], vals[f[2]]);
                if (!ok) break;
            }
        }
    });
    A.forEachBoundaryFace([&](int64_t, const int32_t* ids) {
        if (!ok) return;
        for (int j = 0; j < n; ++j) vals[j] = A.valueAt(ids[j]);
        if (n == 2)
            checkEdge(vals[0], vals[1]);
        else
            checkTri(vals[0], vals[1], vals[2]);
    });
    return ok;
}

PartitionCheck partitionSumCheck(const GTildeEvaluator& g, const GridTriangulation& T,
                                 const approximate::ComplexK& K, int64_t count, uint64_t seed) {
    PartitionCheck out;
    const int n = T.n();
    SplitMix64 rng(mixSeed(seed, 13));
    approximate::PartitionBreakdown bd;

    // random points of the polytope P
    for (int64_t k = 0; k < count; ++k) {
        int64_t rank = static_cast<int64_t>(rng.next() % static_cast<uint64_t>(T.cellCount()));
        auto c = T.cellAtRank(rank);
        Vec origin = T.latticePos({0, 0, 0});
        Vec p{};
        for (int d = 0; d < n; ++d)
            p[d] = origin[d] + T.cellSize() * (c[static_cast<size_t>(d)] + rng.nextDouble());
        g.eval(p, &bd);
        out.worstDeviation = std::max(out.worstDeviation, std::fabs(1.0 - bd.phiSum));
        ++out.samples;
    }

    // targeted samples on Q: phi_W must be exactly 1
    int64_t qSamples = 0;
    const int64_t total = T.simplexCount();
    for (int64_t s = 0; s < total && qSamples < 256; ++s) {
        if (T.label(s) != Label::Keep) continue;
        g.eval(T.barycenterOf(s), &bd);
        out.worstPhiWOnQ = std::min(out.worstPhiWOnQ, bd.phiW);
        ++qSamples;
        s += std::max<int64_t>(1, total / 509);
    }
    (void)K;

    // targeted samples on the boundary of E: phi_W must vanish
    int64_t bSamples = 0;
    for (int64_t v = 0; v < T.vertexCount() && bSamples < 256; ++v) {
        if (T.nodeStatus(static_cast<int32_t>(v)) != 1 || T.vertexMoved(static_cast<int32_t>(v))) continue;
        g.eval(T.vertexPosition(static_cast<int32_t>(v)), &bd);
        out.worstPhiWOffInterior = std::max(out.worstPhiWOffInterior, bd.phiW);
        ++bSamples;
    }
    return out;
}

} // namespace zfa::verify
