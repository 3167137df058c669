#ifndef ZFA_INTERVAL_HPP
#define ZFA_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>

namespace zfa {

// Closed interval arithmetic with outward rounding by one ulp per
// operation.  Not the tightest possible enclosures, but sound for the
// derivative bounds they back.
struct Ival {
    double lo = 0.0, hi = 0.0;

    static Ival point(double v) { return {v, v}; }
    bool contains(double v) const { return lo <= v && v <= hi; }
    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
    bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

namespace detail {
inline double down(double v) {
    return std::nextafter(v, -std::numeric_limits<double>::infinity());
}
inline double up(double v) {
    return std::nextafter(v, std::numeric_limits<double>::infinity());
}
} // namespace detail

inline Ival widen(double lo, double hi) { return {detail::down(lo), detail::up(hi)}; }

inline Ival operator+(const Ival& a, const Ival& b) { return widen(a.lo + b.lo, a.hi + b.hi); }
inline Ival operator-(const Ival& a, const Ival& b) { return widen(a.lo - b.hi, a.hi - b.lo); }
inline Ival operator-(const Ival& a) { return {-a.hi, -a.lo}; }

inline Ival operator*(const Ival& a, const Ival& b) {
    double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return widen(std::min(std::min(p1, p2), std::min(p3, p4)),
                 std::max(std::max(p1, p2), std::max(p3, p4)));
}

struct IntervalDomainError {};

inline Ival operator/(const Ival& a, const Ival& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) throw IntervalDomainError{};
    double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
    return widen(std::min(std::min(p1, p2), std::min(p3, p4)),
                 std::max(std::max(p1, p2), std::max(p3, p4)));
}

inline Ival ipow(const Ival& a, int k) {
    if (k == 0) return Ival::point(1.0);
    if (k == 1) return a;
    bool even = (k % 2) == 0;
    double pl = std::pow(a.lo, k), ph = std::pow(a.hi, k);
    if (!even || a.lo >= 0.0) return widen(pl, ph);
    if (a.hi <= 0.0) return widen(ph, pl);
    return widen(0.0, std::max(pl, ph));
}

inline Ival isqrt(const Ival& a) {
    if (a.lo < 0.0) throw IntervalDomainError{};
    return widen(std::sqrt(a.lo), std::sqrt(a.hi));
}

inline Ival iexp(const Ival& a) { return widen(std::exp(a.lo), std::exp(a.hi)); }

// Trig enclosures: scan the critical points k*pi/2 inside the interval.
inline Ival isin(const Ival& a) {
    if (a.hi - a.lo >= 2.0 * M_PI) return {-1.0, 1.0};
    double lo = std::min(std::sin(a.lo), std::sin(a.hi));
    double hi = std::max(std::sin(a.lo), std::sin(a.hi));
    double k0 = std::floor(a.lo / M_PI_2) - 1.0, k1 = std::ceil(a.hi / M_PI_2) + 1.0;
    for (double k = k0; k <= k1; k += 1.0) {
        double x = k * M_PI_2;
        if (x > a.lo && x < a.hi) {
            lo = std::min(lo, std::sin(x));
            hi = std::max(hi, std::sin(x));
        }
    }
    return {std::max(-1.0, detail::down(lo)), std::min(1.0, detail::up(hi))};
}

inline Ival icos(const Ival& a) {
    if (a.hi - a.lo >= 2.0 * M_PI) return {-1.0, 1.0};
    double lo = std::min(std::cos(a.lo), std::cos(a.hi));
    double hi = std::max(std::cos(a.lo), std::cos(a.hi));
    double k0 = std::floor(a.lo / M_PI_2) - 1.0, k1 = std::ceil(a.hi / M_PI_2) + 1.0;
    for (double k = k0; k <= k1; k += 1.0) {
        double x = k * M_PI_2;
        if (x > a.lo && x < a.hi) {
            lo = std::min(lo, std::cos(x));
            hi = std::max(hi, std::cos(x));
        }
    }
    return {std::max(-1.0, detail::down(lo)), std::min(1.0, detail::up(hi))};
}

} // namespace zfa

#endif
