#include "mmc/moment_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmc/error.hpp"
#include "mmc/normal.hpp"

namespace mmc {

namespace {

double clamp_probability(double p) { return std::clamp(p, kCdfFloor, kCdfCeil); }

/// Scalar mean and biased variance, two-pass.
std::pair<double, double> scalar_moments(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    return {mean, var};
}

}  // namespace

DistributionMap DistributionMap::exponential(double rate) {
    if (!(rate > 0.0)) throw Error(ErrorCode::InvalidParams, "exponential: rate must be positive");
    return {[rate](double y) { return y <= 0.0 ? 0.0 : -std::expm1(-rate * y); },
            [rate](double p) { return -std::log1p(-p) / rate; },
            "Exp(" + std::to_string(rate) + ")"};
}

DistributionMap DistributionMap::uniform(double lo, double hi) {
    if (!(hi > lo)) throw Error(ErrorCode::InvalidParams, "uniform: empty interval");
    return {[lo, hi](double y) { return std::clamp((y - lo) / (hi - lo), 0.0, 1.0); },
            [lo, hi](double p) { return lo + p * (hi - lo); },
            "U(" + std::to_string(lo) + "," + std::to_string(hi) + ")"};
}

DistributionMap DistributionMap::normal(double mean, double sd) {
    if (!(sd > 0.0)) throw Error(ErrorCode::InvalidParams, "normal: sd must be positive");
    return {[mean, sd](double y) { return standard_normal_cdf((y - mean) / sd); },
            [mean, sd](double p) { return mean + sd * standard_normal_quantile(p); },
            "N(" + std::to_string(mean) + "," + std::to_string(sd) + ")"};
}

MatchedBatch match_first_order(const SampleBatch& x, std::span<const double> mu) {
    const std::size_t n = x.dim();
    if (mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "match_first_order: mu dimension");

    Vector mean(n, 0.0);
    for (std::size_t k = 0; k < x.n_samples(); ++k) {
        const auto r = x.row(k);
        for (std::size_t i = 0; i < n; ++i) mean[i] += r[i];
    }
    for (double& m : mean) m /= static_cast<double>(x.n_samples());

    SampleBatch out(x.n_samples(), n);
    for (std::size_t k = 0; k < x.n_samples(); ++k) {
        const auto in = x.row(k);
        auto dst = out.row(k);
        for (std::size_t i = 0; i < n; ++i) dst[i] = in[i] - mean[i] + mu[i];
    }

    SampleMoments source = x.n_samples() >= 2 ? sample_moments(x) : SampleMoments{mean, SymMatrix(Matrix(n, n))};
    return {std::move(out), 1, std::move(source), std::nullopt};
}

MatchedBatch match_second_order(const SampleBatch& x, const MomentSpec& spec) {
    const std::size_t n = x.dim();
    if (spec.dim() != n) throw Error(ErrorCode::DimensionMismatch, "match_second_order: batch/spec dimension");
    if (x.n_samples() < n + 1) {
        throw Error(ErrorCode::TooFewSamples, "match_second_order: need N >= n + 1, got N = " +
                                                  std::to_string(x.n_samples()));
    }

    SampleMoments source = sample_moments(x);
    const SymEigen e = eigen_sym(source.cov);
    const double threshold = 1e-10 * trace(source.cov.matrix()) / static_cast<double>(n);
    if (!(e.values.front() > threshold)) {
        throw Error(ErrorCode::SingularSampleCovariance,
                    "match_second_order: smallest sample-covariance eigenvalue " + std::to_string(e.values.front()));
    }

    const Matrix map = spec.cov_sqrt().matrix() * sym_inv_sqrt(source.cov).matrix();
    const Vector& mu = spec.mean();

    SampleBatch out(x.n_samples(), n);
    Vector d(n);
    for (std::size_t k = 0; k < x.n_samples(); ++k) {
        const auto in = x.row(k);
        auto dst = out.row(k);
        for (std::size_t i = 0; i < n; ++i) d[i] = in[i] - source.mean[i];
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += map(i, j) * d[j];
            dst[i] = s + mu[i];
        }
    }
    return {std::move(out), 2, std::move(source), std::nullopt};
}

MatchedBatch nonlinear_match(const SampleBatch& y, const DistributionMap& dist, int order) {
    if (y.dim() != 1) throw Error(ErrorCode::DimensionMismatch, "nonlinear_match: only one-dimensional batches");
    if (order != 1 && order != 2) throw Error(ErrorCode::InvalidParams, "nonlinear_match: order must be 1 or 2");
    const std::size_t big_n = y.n_samples();
    if (order == 2 && big_n < 2) throw Error(ErrorCode::TooFewSamples, "nonlinear_match: order 2 needs N >= 2");

    std::vector<double> scores(big_n);
    for (std::size_t k = 0; k < big_n; ++k) {
        const double p = dist.cdf(y(k, 0));
        if (!(p > 0.0 && p < 1.0)) {
            throw Error(ErrorCode::SupportViolation,
                        "nonlinear_match: sample " + std::to_string(y(k, 0)) + " has CDF " + std::to_string(p));
        }
        scores[k] = standard_normal_quantile(clamp_probability(p));
    }

    const auto [mean, var] = scalar_moments(scores);
    double scale = 1.0;
    if (order == 2) {
        if (!(var > 1e-14)) {
            throw Error(ErrorCode::DegenerateVariance, "nonlinear_match: normal-score variance " + std::to_string(var));
        }
        scale = 1.0 / std::sqrt(var);
    }

    SampleBatch latent(big_n, 1);
    SampleBatch out(big_n, 1);
    for (std::size_t k = 0; k < big_n; ++k) {
        const double z = (scores[k] - mean) * scale;
        latent(k, 0) = z;
        out(k, 0) = dist.quantile(clamp_probability(standard_normal_cdf(z)));
    }
    SampleMoments source{Vector{mean}, SymMatrix(Matrix(1, 1, var))};
    return {std::move(out), order, std::move(source), std::move(latent)};
}

}  // namespace mmc
