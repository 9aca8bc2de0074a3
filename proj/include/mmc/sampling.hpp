#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmc/linalg.hpp"
#include "mmc/rng.hpp"

namespace mmc {

/// N×n matrix of draws, one sample X(k) per row.
class SampleBatch {
public:
    SampleBatch() = default;
    /// Zero-filled batch; throws InvalidParams for an empty shape.
    SampleBatch(std::size_t n_samples, std::size_t dim);
    /// Takes row-major values; throws DimensionMismatch on size and NonFiniteValue on NaN/inf.
    SampleBatch(std::size_t n_samples, std::size_t dim, std::vector<double> values);

    /// Convenience for one-dimensional batches.
    static SampleBatch from_scalars(std::vector<double> values);

    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> row(std::size_t k) const noexcept { return {values_.data() + k * dim_, dim_}; }
    std::span<double> row(std::size_t k) noexcept { return {values_.data() + k * dim_, dim_}; }
    double operator()(std::size_t k, std::size_t i) const noexcept { return values_[k * dim_ + i]; }
    double& operator()(std::size_t k, std::size_t i) noexcept { return values_[k * dim_ + i]; }

    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const SampleBatch&) const = default;

private:
    std::size_t n_samples_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

/// Target mean μ and covariance Σ (SPD) with cached Σ^{1/2} and Σ⁻¹.
class MomentSpec {
public:
    MomentSpec(Vector mean, SymMatrix cov);

    static MomentSpec standard(std::size_t dim);

    std::size_t dim() const noexcept { return mean_.size(); }
    const Vector& mean() const noexcept { return mean_; }
    const SymMatrix& cov() const noexcept { return cov_; }
    const SymMatrix& cov_sqrt() const noexcept { return cov_sqrt_; }
    const SymMatrix& cov_inv() const noexcept { return cov_inv_; }

private:
    Vector mean_;
    SymMatrix cov_;
    SymMatrix cov_sqrt_;
    SymMatrix cov_inv_;
};

struct SampleMoments {
    Vector mean;
    SymMatrix cov;
};

/// N×n i.i.d. standard normals as quantile(uniform), consuming N·n draws from the
/// stream in row-major order.
SampleBatch draw_standard_batch(RngStream& stream, std::size_t n_samples, std::size_t dim);

/// Row-wise μ + Σ^{1/2}·z(k).
SampleBatch correlate(const SampleBatch& z, const MomentSpec& spec);

/// Sample mean and biased (divisor N) sample covariance. Throws TooFewSamples for N < 2.
SampleMoments sample_moments(const SampleBatch& x);

}  // namespace mmc
