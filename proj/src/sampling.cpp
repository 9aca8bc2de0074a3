#include "mmc/sampling.hpp"

#include <cmath>
#include <string>

#include "mmc/error.hpp"
#include "mmc/normal.hpp"

namespace mmc {

SampleBatch::SampleBatch(std::size_t n_samples, std::size_t dim)
    : n_samples_(n_samples), dim_(dim), values_(n_samples * dim, 0.0) {
    if (n_samples == 0 || dim == 0) throw Error(ErrorCode::InvalidParams, "SampleBatch: empty shape");
}

SampleBatch::SampleBatch(std::size_t n_samples, std::size_t dim, std::vector<double> values)
    : n_samples_(n_samples), dim_(dim), values_(std::move(values)) {
    if (n_samples == 0 || dim == 0) throw Error(ErrorCode::InvalidParams, "SampleBatch: empty shape");
    if (values_.size() != n_samples * dim) {
        throw Error(ErrorCode::DimensionMismatch, "SampleBatch: expected " + std::to_string(n_samples * dim) +
                                                      " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "SampleBatch: non-finite entry");
    }
}

SampleBatch SampleBatch::from_scalars(std::vector<double> values) {
    const std::size_t n = values.size();
    return SampleBatch(n, 1, std::move(values));
}

MomentSpec::MomentSpec(Vector mean, SymMatrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() != cov_.dim()) throw Error(ErrorCode::DimensionMismatch, "MomentSpec: mean/cov size");
    try {
        cholesky(cov_);
    } catch (const Error& e) {
        throw Error(ErrorCode::NotPositiveDefinite, std::string("MomentSpec: covariance ") + e.what());
    }
    cov_sqrt_ = sym_sqrt(cov_);
    cov_inv_ = spd_inverse(cov_);
}

MomentSpec MomentSpec::standard(std::size_t dim) { return MomentSpec(Vector(dim, 0.0), SymMatrix::identity(dim)); }

SampleBatch draw_standard_batch(RngStream& stream, std::size_t n_samples, std::size_t dim) {
    SampleBatch out(n_samples, dim);
    for (std::size_t k = 0; k < n_samples; ++k) {
        auto r = out.row(k);
        for (double& v : r) v = standard_normal_quantile(stream.next_uniform());
    }
    return out;
}

SampleBatch correlate(const SampleBatch& z, const MomentSpec& spec) {
    const std::size_t n = spec.dim();
    if (z.dim() != n) throw Error(ErrorCode::DimensionMismatch, "correlate: batch/spec dimension");
    const Matrix& root = spec.cov_sqrt().matrix();
    SampleBatch out(z.n_samples(), n);
    for (std::size_t k = 0; k < z.n_samples(); ++k) {
        const auto in = z.row(k);
        auto dst = out.row(k);
        for (std::size_t i = 0; i < n; ++i) {
            double s = spec.mean()[i];
            for (std::size_t j = 0; j < n; ++j) s += root(i, j) * in[j];
            dst[i] = s;
        }
    }
    return out;
}

SampleMoments sample_moments(const SampleBatch& x) {
    const std::size_t big_n = x.n_samples();
    const std::size_t n = x.dim();
    if (big_n < 2) throw Error(ErrorCode::TooFewSamples, "sample_moments: need at least 2 samples");

    Vector mean(n, 0.0);
    for (std::size_t k = 0; k < big_n; ++k) {
        const auto r = x.row(k);
        for (std::size_t i = 0; i < n; ++i) mean[i] += r[i];
    }
    for (double& m : mean) m /= static_cast<double>(big_n);

    // Two-pass form of N⁻¹ΣX Xᵀ − X̄X̄ᵀ.
    Matrix cov(n, n);
    Vector d(n);
    for (std::size_t k = 0; k < big_n; ++k) {
        const auto r = x.row(k);
        for (std::size_t i = 0; i < n; ++i) d[i] = r[i] - mean[i];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) cov(i, j) += d[i] * d[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cov(i, j) /= static_cast<double>(big_n);
            cov(j, i) = cov(i, j);
        }
    return {std::move(mean), SymMatrix(std::move(cov))};
}

}  // namespace mmc
