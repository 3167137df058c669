#ifndef ZFA_GEOM_HPP
#define ZFA_GEOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace zfa {

// Ambient dimension is 2 or 3, fixed per run.  Vec always carries three
// slots; unused ones stay zero so norms and comparisons work uniformly.
struct Vec {
    std::array<double, 3> c{0.0, 0.0, 0.0};

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }

    Vec operator+(const Vec& o) const { return {{c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2]}}; }
    Vec operator-(const Vec& o) const { return {{c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2]}}; }
    Vec operator*(double t) const { return {{c[0] * t, c[1] * t, c[2] * t}}; }
    Vec& operator+=(const Vec& o) {
        c[0] += o.c[0]; c[1] += o.c[1]; c[2] += o.c[2];
        return *this;
    }
    bool operator==(const Vec& o) const { return c == o.c; }
};

inline double dot(const Vec& a, const Vec& b) { return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2]; }
inline double norm2sq(const Vec& a) { return dot(a, a); }
inline double norm2(const Vec& a) { return std::sqrt(norm2sq(a)); }
inline double normInf(const Vec& a) {
    return std::max(std::fabs(a.c[0]), std::max(std::fabs(a.c[1]), std::fabs(a.c[2])));
}
inline double distInf(const Vec& a, const Vec& b) { return normInf(a - b); }

// Error classes map one-to-one onto the CLI exit codes.
enum class ErrClass : int {
    Precondition = 2,   // input field has a zero (or near-zero) on the interior of E
    Resource = 3,       // configured caps exceeded
    Io = 4,             // file/parse/format problems, uncertifiable inputs
    Internal = 5,       // a certificate that must hold failed
};

class Error : public std::runtime_error {
  public:
    Error(ErrClass cls, const std::string& msg) : std::runtime_error(msg), cls_(cls) {}
    ErrClass cls() const { return cls_; }

  private:
    ErrClass cls_;
};

// Deterministic splittable generator (splitmix64).  All sampling in the
// project derives from (seed, stream id) pairs through this, so results
// are a pure function of the recorded seed.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t s) : state(s) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double nextDouble() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline uint64_t mixSeed(uint64_t seed, uint64_t stream) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    g.next();
    return g.next();
}

} // namespace zfa

#endif
