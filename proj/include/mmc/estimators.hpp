#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "mmc/linalg.hpp"
#include "mmc/moment_match.hpp"
#include "mmc/quadrature.hpp"
#include "mmc/rng.hpp"
#include "mmc/sampling.hpp"

namespace mmc {

/// Integrand evaluated on one sample row.
using Integrand = std::function<double(std::span<const double>)>;

enum class Method { Plain, MM1, MM2, NonlinearMM1, NonlinearMM2 };

std::string_view to_string(Method m) noexcept;

/// Terms of the by-product variance estimate: plain − first − second.
struct VarianceComponents {
    double plain_term = 0.0;
    double first_order_correction = 0.0;
    double second_order_correction = 0.0;
};

struct EstimateReport {
    Method method = Method::Plain;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::optional<VarianceComponents> variance_components;
    /// Set when the variance estimate came out negative and was floored to zero.
    bool floored = false;
};

/// Sample mean with SE sqrt((mean(f²) − mean(f)²)/N). Needs N ≥ 2.
EstimateReport plain_estimate(std::span<const double> f_values);
EstimateReport plain_estimate(const Integrand& f, const SampleBatch& x);

/// First-order matched estimate with the by-product SE
/// N⁻¹·[var(f) − mᵀΣ⁻¹m], m = mean((X̃ − μ)·f).
EstimateReport mm1_estimate(const Integrand& f, const SampleBatch& x, const MomentSpec& spec);

/// Second-order matched estimate with SE² = N⁻¹·[var(f) − mᵀΣ⁻¹m − ½·tr(Q²)],
/// Q = mean((Σ⁻¹(X̃ − μ)(X̃ − μ)ᵀ − I)·f).
EstimateReport mm2_estimate(const Integrand& f, const SampleBatch& x, const MomentSpec& spec);

/// Quantile-transform matched estimate for a one-dimensional target; the SE is the
/// first/second order by-product formula applied to the matched normal scores.
EstimateReport nonlinear_estimate(const Integrand& f, const SampleBatch& y, const DistributionMap& dist, int order);

/// Estimate and SE from f already evaluated on a matched batch. `order` selects which
/// correction terms enter the SE. Exposed so callers can reuse one matched batch for
/// several integrands.
EstimateReport matched_report(std::span<const double> f_values, const SampleBatch& matched, const MomentSpec& spec,
                              int order, Method method);

/// Population moments of an integrand. Unset fields are reported as MissingMoment by
/// the oracles that need them.
struct IntegrandMoments {
    std::optional<double> var_f;
    std::optional<double> mean_f;
    std::optional<Vector> grad_mean;       // 𝔼[∂f(X)]
    std::optional<SymMatrix> hess_mean;    // 𝔼[∂²f(X)]; scalar non-normal oracle: 𝔼[f'(X)X]
    std::optional<Vector> xf_mean;         // 𝔼[X f(X)]
    std::optional<Vector> xmu_f_mean;      // 𝔼[(X − μ) f(X)]
    std::optional<Matrix> quad_mean;       // 𝔼[(Σ⁻¹XXᵀ − I) f(X)]
    std::optional<double> x2f_mean;        // 𝔼[f(X)X²], scalar
    std::optional<double> third_moment;    // 𝔼[X³], scalar
    std::optional<double> fourth_moment;   // 𝔼[X⁴], scalar
};

// Large-N limits of N·Var[estimator] (the 1 + O(N^{-1/2}) factor is taken as 1).

/// General underlying, first order: Var[f] − 2·𝔼[∂f]·𝔼[(X−μ)f] + 𝔼[∂f]ᵀΣ𝔼[∂f]. Not floored.
double asym_var_mm1_general(const IntegrandMoments& m, const SymMatrix& sigma);
/// Normal underlying, smooth f: Var[f] − 𝔼[∂f]ᵀΣ𝔼[∂f], floored at 0.
double asym_var_mm1_normal_smooth(const IntegrandMoments& m, const SymMatrix& sigma);
/// Normal underlying (mean zero), measurable f: Var[f] − 𝔼[Xf]ᵀΣ⁻¹𝔼[Xf], floored at 0.
double asym_var_mm1_normal_rough(const IntegrandMoments& m, const SymMatrix& sigma);
/// Scalar underlying with 𝔼X = 0, 𝔼X² = 1, second order. hess_mean holds 𝔼[f'(X)X].
double asym_var_mm2_general_scalar(const IntegrandMoments& m);
/// Normal underlying, smooth f: Var[f] − 𝔼[∂f]ᵀΣ𝔼[∂f] − ½tr((Σ𝔼[∂²f])²), floored at 0.
double asym_var_mm2_normal_smooth(const IntegrandMoments& m, const SymMatrix& sigma);
/// Normal underlying (mean zero), measurable f: Var[f] − 𝔼[Xf]ᵀΣ⁻¹𝔼[Xf] − ½tr(Q²), floored at 0.
double asym_var_mm2_normal_rough(const IntegrandMoments& m, const SymMatrix& sigma);
/// Published closed form for U(−√3, √3) under second-order matching:
/// Var[f] + 𝔼[fX²] − (4/5)·𝔼[f]². Kept verbatim for comparison against the empirical limit
/// and asym_var_mm2_general_scalar; the two disagree, see the counterexample report.
double asym_var_mm2_uniform_published(const IntegrandMoments& m);

/// Monte Carlo estimates of the moments under N(μ, Σ). Gradient and Hessian means come
/// from Stein identities (valid for normal specs only): 𝔼[∂f] = Σ⁻¹𝔼[(X−μ)f] and
/// 𝔼[∂²f] = Σ⁻¹𝔼[((X−μ)(X−μ)ᵀ − Σ)f]Σ⁻¹. Needs n_samples ≥ 100.
IntegrandMoments estimate_integrand_moments(const Integrand& f, const MomentSpec& spec, RngStream& stream,
                                            std::size_t n_samples);

/// Scalar integrand with optional analytic derivatives, for quadrature oracles.
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;         // may be empty
    std::function<double(double)> second_derivative;  // may be empty
    std::vector<double> breakpoints;                  // kinks, jumps, support ends
};

enum class HessianSlot { SecondDerivative, FirstDerivativeTimesX };

/// Deterministic quadrature (adaptive Simpson, 1e-10) of every scalar moment field.
/// grad_mean needs `derivative`; hess_mean is 𝔼[f''] or 𝔼[f'X] according to `slot`.
/// quad_mean is 𝔼[((X−μ)²/σ² − 1)f]; xf_mean is 𝔼[Xf]; xmu_f_mean is 𝔼[(X−μ)f].
IntegrandMoments quadrature_moments(const ScalarFunction& f, const ScalarDensity& density,
                                    HessianSlot slot = HessianSlot::SecondDerivative);

}  // namespace mmc
