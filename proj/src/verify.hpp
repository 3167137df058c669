#ifndef ZFA_VERIFY_HPP
#define ZFA_VERIFY_HPP

#include <functional>

#include "approximate.hpp"
#include "field.hpp"

namespace zfa::verify {

using approximate::ApproximantG;
using approximate::GTildeEvaluator;
using triangulate::GridTriangulation;

struct OracleReport {
    double supError = 0.0; // max |f - F| over the E samples
    Vec supArg{};
    double minNormFinal = std::numeric_limits<double>::infinity(); // min |F| over E
    Vec minArgFinal{};
    double minNormInput = std::numeric_limits<double>::infinity(); // min |f| over E
    double maxNormInput = 0.0;
    double minNormK = std::numeric_limits<double>::infinity(); // sampled min |h-hat| over |K|
    int resolution = 4;
    int64_t gridSamples = 0;
    int64_t randomSamples = 0;
    uint64_t seed = 0;
};

using PointFn = std::function<Vec(const Vec&)>;

// Deterministic sample stream over E: all lattice points of the R-fold
// refined grid that lie in E, then `randomCount` seeded random points.
void forEachESample(const domain::DomainE& D, int resolution, int64_t randomCount, uint64_t seed,
                    const std::function<void(const Vec&)>& fn);

// Interior-zero precondition scan: min |f| over interior samples, rejection
// threshold 1e-12 * (1 + max sampled |f|).  Returns the sampled minimum.
struct InteriorScan {
    double minNorm = std::numeric_limits<double>::infinity();
    Vec argmin{};
    double maxNorm = 0.0;
    bool hasInteriorSamples = false;
    double threshold() const { return 1e-12 * (1.0 + maxNorm); }
    bool reject() const { return hasInteriorSamples && minNorm < threshold(); }
};
InteriorScan scanInteriorZeros(const domain::FieldSpec& f, const domain::DomainE& D, int resolution,
                               int64_t randomCount, uint64_t seed);

// sup |f - F| and min |F| over the common E sample stream
OracleReport oracleScanE(const domain::FieldSpec& f, const PointFn& finalMap, const domain::DomainE& D,
                         int resolution, int64_t randomCount, uint64_t seed);

// sampled min |h-hat| over |K|: vertex values, barycenters, and one seeded
// interior sample per simplex
double oracleMinOverK(const ApproximantG& A, uint64_t seed);

// barycentric-grid re-check of the avoidance certificate on the lower
// skeleton; must agree with the exact hull verdicts
bool bruteForceAvoidanceCheck(const ApproximantG& A, int resolution);

struct PartitionCheck {
    double worstDeviation = 0.0; // max |1 - sum phi|
    double worstPhiWOnQ = 1.0;   // min phi_W over Q samples (should be 1)
    double worstPhiWOffInterior = 0.0; // max phi_W over boundary samples (should be 0)
    int64_t samples = 0;
};
PartitionCheck partitionSumCheck(const GTildeEvaluator& g, const GridTriangulation& T,
                                 const approximate::ComplexK& K, int64_t count, uint64_t seed);

} // namespace zfa::verify

#endif
