#ifndef ZFA_FIELD_HPP
#define ZFA_FIELD_HPP

#include <optional>
#include <string>
#include <vector>

#include "domain.hpp"
#include "expr.hpp"
#include "geom.hpp"
#include "interval.hpp"

namespace zfa::domain {

struct Box {
    Vec lo, hi;
    bool contains(const Vec& p, int n, double slack = 0.0) const {
        for (int d = 0; d < n; ++d)
            if (p[d] < lo[d] - slack || p[d] > hi[d] + slack) return false;
        return true;
    }
};

enum class LipschitzMethod { SymbolicInterval, SampledFallback, UserSupplied };

struct LipschitzBound {
    double value = 0.0;
    Box box{};
    LipschitzMethod method = LipschitzMethod::SymbolicInterval;
    bool certified() const { return method == LipschitzMethod::SymbolicInterval; }
};

// The input map f, either as parsed component expressions or as a sampled
// grid of vectors with componentwise multilinear interpolation.
class FieldSpec {
  public:
    static FieldSpec fromExpressions(std::vector<std::string> texts, int n);
    static FieldSpec fromSamples(GridSpec sampleGrid, std::vector<double> values);

    int dim() const { return n_; }
    bool isExpression() const { return !exprs_.empty(); }
    const std::vector<expr::Ast>& expressions() const { return exprs_; }
    const std::vector<std::string>& sourceTexts() const { return texts_; }
    const GridSpec& sampleGrid() const { return sampleGrid_; }
    const std::vector<double>& sampleValues() const { return samples_; }

    // user-supplied Lipschitz override (from the field file)
    std::optional<double> lipschitzOverride;

    Vec eval(const Vec& p) const;

    // Certified bound over `box`: for expression fields the Frobenius norm of
    // the componentwise interval enclosures of all partial derivatives (a true
    // Lipschitz majorant; equals the sqrt(n)*max-partial value on the fields
    // exercised here).  Sampled fields fall back to 2x the worst adjacent
    // difference quotient, flagged non-certified.
    LipschitzBound lipschitzBound(const Box& box) const;

  private:
    int n_ = 2;
    std::vector<expr::Ast> exprs_;
    std::vector<std::string> texts_;
    GridSpec sampleGrid_{};
    std::vector<double> samples_; // node-major, n components per node
    mutable std::vector<double> scratch_;

    Vec evalSampled(const Vec& p) const;
    size_t nodeIndex(int ix, int iy, int iz) const;
};

} // namespace zfa::domain

#endif
