#pragma once

#include <span>
#include <vector>

#include "mmc/estimators.hpp"
#include "mmc/linalg.hpp"
#include "mmc/sampling.hpp"

namespace mmc {

/// Black-Scholes market for the down-and-in put experiments. Strike and barrier are in
/// performance units S_T/S_0.
struct MarketParams {
    Vector vols;
    double rate = 0.05;
    Vector spots;
    double strike = 1.0;
    double maturity = 1.0;
    double barrier = 0.8;
    SymMatrix correlation;

    std::size_t n_assets() const noexcept { return vols.size(); }

    /// Throws InvalidParams when an invariant is broken.
    void validate() const;

    /// σ = 0.3, r = 0.05, S = 1, K = 1, T = 1, B = 0.8.
    static MarketParams single_asset();
    /// σ = (0.3, 0.2, 0.4), ρ = [[1, .3, .1], [.3, 1, .5], [.1, .5, 1]], otherwise as above.
    static MarketParams worst_of_three();
};

/// Maps standard normal rows to terminal performances through w = chol(ρ)·z.
class GbmTerminal {
public:
    explicit GbmTerminal(const MarketParams& params);

    std::size_t dim() const noexcept { return drift_.size(); }
    /// Writes exp((r − σᵢ²/2)T + σᵢ√T·wᵢ) into `out`.
    void performances(std::span<const double> z, std::span<double> out) const;
    /// Minimum performance across assets, without materialising the vector.
    double worst_performance(std::span<const double> z) const;

private:
    Matrix chol_;
    Vector drift_;
    Vector diffusion_;
};

SampleBatch gbm_terminal(const SampleBatch& z, const MarketParams& params);

/// e^{−rT}·(K − W)⁺·1{W ≤ B}, W = min of the performances. Barrier is inclusive.
double down_in_put(std::span<const double> performances, const MarketParams& params);

/// Analytic price of the terminal-observation down-in put on one asset with B < K:
/// e^{−rT}K·Φ(−d₂) − Φ(−d₁), d₂ = (ln(1/B) + (r − σ²/2)T)/(σ√T), d₁ = d₂ + σ√T.
double down_in_put_closed_form(const MarketParams& params);

/// Integrand over standard normal rows: worst-of down-in put on the simulated performances.
Integrand down_in_put_integrand(const MarketParams& params);

/// Analytic, one-dimensional test functions (evaluated on the first coordinate).
struct TestIntegrand {
    enum class Kind { Polynomial, Heaviside, Bump, Sin };

    Kind kind = Kind::Polynomial;
    /// Polynomial coefficients c₀, c₁, ...
    std::vector<double> coefficients;
    /// Bump: scale·exp(−1/(1 − t²)), t = (x − center)/half_width, zero for |t| ≥ 1.
    /// Heaviside: 1{x ≥ center}. Sin: scale·sin(x).
    double center = 0.0;
    double half_width = 1.0;
    double scale = 1.0;

    static TestIntegrand polynomial(std::vector<double> coefficients);
    static TestIntegrand heaviside(double threshold = 0.0);
    static TestIntegrand bump(double center, double half_width, double scale = 1.0);
    static TestIntegrand sin(double scale = 1.0);

    double value(double x) const;
    /// Throws UnsupportedDerivative for the Heaviside kind.
    double derivative(double x) const;
    double second_derivative(double x) const;

    double operator()(std::span<const double> x) const { return value(x[0]); }

    ScalarFunction as_scalar_function() const;
};

double eval_test_integrand(const TestIntegrand& f, std::span<const double> x);

}  // namespace mmc
