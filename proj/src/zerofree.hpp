#ifndef ZFA_ZEROFREE_HPP
#define ZFA_ZEROFREE_HPP

#include "approximate.hpp"

namespace zfa::zerofree {

using approximate::ApproximantG;
using triangulate::GridTriangulation;

// Radial clamp: identity for |x| >= rho, projection onto the rho-sphere for
// 0 < |x| < rho.  Undefined at the origin.
Vec clampR(const Vec& x, double rho, int n);

// Euclidean distance from the origin to the convex hull of `count` value
// vectors (the image of an affine map on a simplex); exact active-set
// reasoning over the faces for count <= 4, n <= 3.
double certifiedMinNorm(const Vec vals[], int count, int n);

// Exact verdict that the origin avoids the hull, with a floating filter and
// a quad-precision fallback for near-degenerate data.  Conservative: may
// report false on ties, never reports true when the origin is in the hull.
bool hullAvoidsOrigin(const Vec vals[], int count, int n);

struct AvoidanceConstant {
    Vec c{};
    double bound = 0.0;      // |c| must stay under min(m_A, eps/8)
    double drawRadius = 0.0; // radius of the accepted draw
    int draws = 0;           // 1-based index of the accepted draw
    int64_t lowerSimplicesChecked = 0;
};

// m_A: certified minimum over the Keep-descended n-simplices of K-hat
// (pre-shift); +infinity when A is empty.  Throws Precondition when it is
// not strictly positive.
double certifiedMinNormKeep(const ApproximantG& A, bool requirePositive);

// Seeded rejection sampling of the constant c: uniform in the ball of radius
// min(m_A, eps/8)/2, accepted iff every lower-skeleton simplex of K-hat
// avoids -c exactly; at most 1000 draws, radius halved every 50 rejections.
AvoidanceConstant chooseAvoidanceConstant(const ApproximantG& A, double mA, double epsilon, uint64_t seed);

struct ZeroFreeMap {
    Vec c{};
    double mA = 0.0; // pre-shift Keep minimum
    double mu = 0.0; // post-shift global minimum over every K-hat simplex
    std::vector<std::pair<double, int64_t>> worstKeep;  // (margin, tag) ascending
    std::vector<std::pair<double, int64_t>> worstLower; // (margin, tag) ascending
};

// Shifts the vertex values by c in place and certifies mu > 0 over all
// simplices of K-hat (n-dimensional and lower).
ZeroFreeMap assembleZeroFree(ApproximantG& A, const AvoidanceConstant& c, double mA);

// F(z) = PL(h-hat, retract(z)); |F| >= mu on E by the certificates.
Vec evalFinal(const ApproximantG& A, const GridTriangulation& T, const Vec& z);

} // namespace zfa::zerofree

#endif
