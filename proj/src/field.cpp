#include "field.hpp"

#include <cmath>

namespace zfa::domain {

FieldSpec FieldSpec::fromExpressions(std::vector<std::string> texts, int n) {
    if (texts.size() != static_cast<size_t>(n))
        throw Error(ErrClass::Io, "field needs exactly n component expressions");
    FieldSpec f;
    f.n_ = n;
    f.texts_ = std::move(texts);
    for (const std::string& t : f.texts_) f.exprs_.push_back(expr::parse(t, n));
    return f;
}

FieldSpec FieldSpec::fromSamples(GridSpec sampleGrid, std::vector<double> values) {
    FieldSpec f;
    f.n_ = sampleGrid.n;
    size_t nodes = 1;
    for (int d = 0; d < f.n_; ++d) nodes *= static_cast<size_t>(sampleGrid.shape[static_cast<size_t>(d)] + 1);
    if (values.size() != nodes * static_cast<size_t>(f.n_))
        throw Error(ErrClass::Io, "sampled field value count does not match grid nodes");
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrClass::Io, "sampled field contains non-finite values");
    f.sampleGrid_ = sampleGrid;
    f.samples_ = std::move(values);
    return f;
}

size_t FieldSpec::nodeIndex(int ix, int iy, int iz) const {
    size_t nx = static_cast<size_t>(sampleGrid_.shape[0] + 1);
    size_t ny = static_cast<size_t>(sampleGrid_.shape[1] + 1);
    return ((static_cast<size_t>(iz) * ny + static_cast<size_t>(iy)) * nx + static_cast<size_t>(ix)) *
           static_cast<size_t>(n_);
}

Vec FieldSpec::evalSampled(const Vec& p) const {
    int n = n_;
    double u[3] = {0, 0, 0};
    int base[3] = {0, 0, 0};
    double fr[3] = {0, 0, 0};
    for (int d = 0; d < n; ++d) {
        u[d] = (p[d] - sampleGrid_.origin[d]) / sampleGrid_.spacing;
        int32_t cells = sampleGrid_.shape[static_cast<size_t>(d)];
        if (u[d] < -1e-9 || u[d] > cells + 1e-9)
            throw Error(ErrClass::Io, "sampled field evaluated outside its grid box");
        double b = std::floor(u[d]);
        if (b >= cells) b = cells - 1;
        if (b < 0) b = 0;
        base[d] = static_cast<int>(b);
        fr[d] = u[d] - b;
        // interpolation identity at the nodes
        if (std::fabs(fr[d]) < 1e-12) fr[d] = 0.0;
        if (std::fabs(fr[d] - 1.0) < 1e-12) fr[d] = 1.0;
    }
    Vec out{};
    int corners = 1 << n;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        int idx[3] = {base[0], base[1], base[2]};
        for (int d = 0; d < n; ++d) {
            if ((m >> d) & 1) {
                w *= fr[d];
                idx[d] += 1;
            } else {
                w *= 1.0 - fr[d];
            }
        }
        if (w == 0.0) continue;
        size_t off = nodeIndex(idx[0], idx[1], n == 3 ? idx[2] : 0);
        for (int comp = 0; comp < n; ++comp) out[comp] += w * samples_[off + static_cast<size_t>(comp)];
    }
    return out;
}

Vec FieldSpec::eval(const Vec& p) const {
    if (isExpression()) {
        Vec out{};
        for (int comp = 0; comp < n_; ++comp)
            out[comp] = expr::eval(exprs_[static_cast<size_t>(comp)], p, scratch_);
        return out;
    }
    return evalSampled(p);
}

LipschitzBound FieldSpec::lipschitzBound(const Box& box) const {
    LipschitzBound out;
    out.box = box;
    if (lipschitzOverride) {
        if (!(*lipschitzOverride >= 0.0) || !std::isfinite(*lipschitzOverride))
            throw Error(ErrClass::Io, "user lipschitz bound must be finite and nonnegative");
        out.value = *lipschitzOverride;
        out.method = LipschitzMethod::UserSupplied;
        return out;
    }
    if (isExpression()) {
        Ival ibox[3];
        for (int d = 0; d < n_; ++d) ibox[d] = {box.lo[d], box.hi[d]};
        std::vector<Ival> scratch;
        double sumSq = 0.0;
        for (int comp = 0; comp < n_; ++comp) {
            for (int d = 0; d < n_; ++d) {
                expr::Ast partial = expr::differentiate(exprs_[static_cast<size_t>(comp)], d);
                Ival enc = expr::evalInterval(partial, ibox, scratch);
                if (!enc.finite())
                    throw Error(ErrClass::Io,
                                "derivative enclosure is unbounded on the box; supply an explicit "
                                "\"lipschitz\" bound in the field file");
                double m = enc.mag();
                sumSq += m * m;
            }
        }
        out.value = std::sqrt(sumSq);
        out.method = LipschitzMethod::SymbolicInterval;
        return out;
    }
    // sampled fallback: worst adjacent difference quotient with a safety
    // factor of 2, flagged non-certified downstream
    double h = sampleGrid_.spacing;
    double worst = 0.0;
    int nx = sampleGrid_.shape[0] + 1, ny = sampleGrid_.shape[1] + 1;
    int nz = n_ == 3 ? sampleGrid_.shape[2] + 1 : 1;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                size_t a = nodeIndex(ix, iy, iz);
                for (int axis = 0; axis < n_; ++axis) {
                    int jx = ix + (axis == 0), jy = iy + (axis == 1), jz = iz + (axis == 2);
                    if (jx >= nx || jy >= ny || jz >= nz) continue;
                    size_t b = nodeIndex(jx, jy, jz);
                    double s2 = 0.0;
                    for (int comp = 0; comp < n_; ++comp) {
                        double dv = samples_[b + static_cast<size_t>(comp)] - samples_[a + static_cast<size_t>(comp)];
                        s2 += dv * dv;
                    }
                    worst = std::max(worst, std::sqrt(s2) / h);
                }
            }
    out.value = 2.0 * worst;
    out.method = LipschitzMethod::SampledFallback;
    return out;
}

} // namespace zfa::domain
