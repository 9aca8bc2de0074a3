#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mmc/sampling.hpp"

namespace mmc {

/// A continuous one-dimensional target given by its CDF and quantile function.
struct DistributionMap {
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
    std::string description;

    static DistributionMap exponential(double rate = 1.0);
    static DistributionMap uniform(double lo, double hi);
    static DistributionMap normal(double mean = 0.0, double sd = 1.0);
};

struct MatchedBatch {
    SampleBatch values;
    int order = 1;
    SampleMoments source_moments;
    /// Nonlinear matching only: the matched normal scores behind `values`.
    std::optional<SampleBatch> latent;
};

/// X(k) − X̄ + μ.
MatchedBatch match_first_order(const SampleBatch& x, std::span<const double> mu);

/// Σ^{1/2}·Σ̄^{-1/2}·(X(k) − X̄) + μ with Σ̄ the biased sample covariance. Requires
/// N ≥ n + 1; throws SingularSampleCovariance when λmin(Σ̄) ≤ 1e-10·tr(Σ̄)/n.
MatchedBatch match_second_order(const SampleBatch& x, const MomentSpec& spec);

/// Quantile-transform matching of a one-dimensional batch: maps Y to normal scores
/// X = Φ⁻¹(F(Y)), centres (order 1) or standardises (order 2) them, and maps back
/// through F⁻¹∘Φ.
MatchedBatch nonlinear_match(const SampleBatch& y, const DistributionMap& dist, int order);

/// CDF values are clamped into this range before normal quantiles are taken.
inline constexpr double kCdfFloor = 1e-300;
inline constexpr double kCdfCeil = 1.0 - 1e-16;

}  // namespace mmc
