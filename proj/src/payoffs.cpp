#include "mmc/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmc/error.hpp"
#include "mmc/normal.hpp"

namespace mmc {

void MarketParams::validate() const {
    const std::size_t n = vols.size();
    if (n == 0) throw Error(ErrorCode::InvalidParams, "market: no assets");
    if (spots.size() != n) throw Error(ErrorCode::InvalidParams, "market: spots/vols length mismatch");
    if (correlation.dim() != n) throw Error(ErrorCode::InvalidParams, "market: correlation dimension mismatch");
    for (double v : vols)
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "market: vols must be positive");
    for (double s : spots)
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidParams, "market: spots must be positive");
    if (!(maturity > 0.0)) throw Error(ErrorCode::InvalidParams, "market: maturity must be positive");
    if (!std::isfinite(rate)) throw Error(ErrorCode::InvalidParams, "market: rate must be finite");
    if (!(barrier > 0.0 && barrier < strike)) throw Error(ErrorCode::InvalidParams, "market: need 0 < barrier < strike");
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(correlation(i, i) - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidParams, "market: correlation diagonal must be 1");
        }
    }
    try {
        cholesky(correlation);
    } catch (const Error&) {
        throw Error(ErrorCode::InvalidParams, "market: correlation is not positive definite");
    }
}

MarketParams MarketParams::single_asset() {
    MarketParams p;
    p.vols = {0.3};
    p.rate = 0.05;
    p.spots = {1.0};
    p.strike = 1.0;
    p.maturity = 1.0;
    p.barrier = 0.8;
    p.correlation = SymMatrix::identity(1);
    return p;
}

MarketParams MarketParams::worst_of_three() {
    MarketParams p = single_asset();
    p.vols = {0.3, 0.2, 0.4};
    p.spots = {1.0, 1.0, 1.0};
    p.correlation = SymMatrix{{1.0, 0.3, 0.1}, {0.3, 1.0, 0.5}, {0.1, 0.5, 1.0}};
    return p;
}

GbmTerminal::GbmTerminal(const MarketParams& params) {
    params.validate();
    chol_ = cholesky(params.correlation);
    const std::size_t n = params.n_assets();
    drift_.resize(n);
    diffusion_.resize(n);
    const double sqrt_t = std::sqrt(params.maturity);
    for (std::size_t i = 0; i < n; ++i) {
        drift_[i] = (params.rate - 0.5 * params.vols[i] * params.vols[i]) * params.maturity;
        diffusion_[i] = params.vols[i] * sqrt_t;
    }
}

void GbmTerminal::performances(std::span<const double> z, std::span<double> out) const {
    const std::size_t n = dim();
    if (z.size() != n || out.size() != n) throw Error(ErrorCode::DimensionMismatch, "gbm: row dimension");
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j <= i; ++j) w += chol_(i, j) * z[j];
        out[i] = std::exp(drift_[i] + diffusion_[i] * w);
    }
}

double GbmTerminal::worst_performance(std::span<const double> z) const {
    const std::size_t n = dim();
    if (z.size() != n) throw Error(ErrorCode::DimensionMismatch, "gbm: row dimension");
    double worst_log = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j <= i; ++j) w += chol_(i, j) * z[j];
        worst_log = std::min(worst_log, drift_[i] + diffusion_[i] * w);
    }
    return std::exp(worst_log);
}

SampleBatch gbm_terminal(const SampleBatch& z, const MarketParams& params) {
    const GbmTerminal model(params);
    if (z.dim() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "gbm_terminal: batch/asset count");
    SampleBatch out(z.n_samples(), z.dim());
    for (std::size_t k = 0; k < z.n_samples(); ++k) model.performances(z.row(k), out.row(k));
    return out;
}

namespace {

double down_in_put_on_worst(double worst, double discount, const MarketParams& p) {
    if (!(worst <= p.barrier)) return 0.0;
    return discount * std::max(p.strike - worst, 0.0);
}

}  // namespace

double down_in_put(std::span<const double> performances, const MarketParams& params) {
    const double worst = *std::min_element(performances.begin(), performances.end());
    return down_in_put_on_worst(worst, std::exp(-params.rate * params.maturity), params);
}

double down_in_put_closed_form(const MarketParams& p) {
    if (p.n_assets() != 1) throw Error(ErrorCode::InvalidParams, "closed form: single asset only");
    if (!(p.barrier < p.strike)) throw Error(ErrorCode::InvalidParams, "closed form: requires barrier < strike");
    if (!(p.barrier > 0.0)) return 0.0;
    const double discount = std::exp(-p.rate * p.maturity);
    const double vol_sqrt_t = p.vols[0] * std::sqrt(p.maturity);
    const double log_drift = (p.rate - 0.5 * p.vols[0] * p.vols[0]) * p.maturity;
    if (vol_sqrt_t == 0.0) return down_in_put_on_worst(std::exp(log_drift), discount, p);
    const double d2 = (std::log(1.0 / p.barrier) + log_drift) / vol_sqrt_t;
    const double d1 = d2 + vol_sqrt_t;
    return discount * p.strike * standard_normal_cdf(-d2) - standard_normal_cdf(-d1);
}

Integrand down_in_put_integrand(const MarketParams& params) {
    GbmTerminal model(params);
    const double discount = std::exp(-params.rate * params.maturity);
    return [model = std::move(model), discount, params](std::span<const double> z) {
        return down_in_put_on_worst(model.worst_performance(z), discount, params);
    };
}

TestIntegrand TestIntegrand::polynomial(std::vector<double> coefficients) {
    TestIntegrand t;
    t.kind = Kind::Polynomial;
    t.coefficients = std::move(coefficients);
    return t;
}

TestIntegrand TestIntegrand::heaviside(double threshold) {
    TestIntegrand t;
    t.kind = Kind::Heaviside;
    t.center = threshold;
    return t;
}

TestIntegrand TestIntegrand::bump(double center, double half_width, double scale) {
    if (!(half_width > 0.0)) throw Error(ErrorCode::InvalidParams, "bump: half_width must be positive");
    TestIntegrand t;
    t.kind = Kind::Bump;
    t.center = center;
    t.half_width = half_width;
    t.scale = scale;
    return t;
}

TestIntegrand TestIntegrand::sin(double scale) {
    TestIntegrand t;
    t.kind = Kind::Sin;
    t.scale = scale;
    return t;
}

double TestIntegrand::value(double x) const {
    switch (kind) {
        case Kind::Polynomial: {
            double acc = 0.0;
            for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
            return acc;
        }
        case Kind::Heaviside: return x >= center ? 1.0 : 0.0;
        case Kind::Bump: {
            const double t = (x - center) / half_width;
            if (!(std::abs(t) < 1.0)) return 0.0;
            return scale * std::exp(-1.0 / (1.0 - t * t));
        }
        case Kind::Sin: return scale * std::sin(x);
    }
    return 0.0;
}

double TestIntegrand::derivative(double x) const {
    switch (kind) {
        case Kind::Polynomial: {
            double acc = 0.0;
            for (std::size_t i = coefficients.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * coefficients[i];
            return acc;
        }
        case Kind::Heaviside: throw Error(ErrorCode::UnsupportedDerivative, "heaviside has no classical derivative");
        case Kind::Bump: {
            const double t = (x - center) / half_width;
            if (!(std::abs(t) < 1.0)) return 0.0;
            const double u = 1.0 - t * t;
            return value(x) * (-2.0 * t / (u * u)) / half_width;
        }
        case Kind::Sin: return scale * std::cos(x);
    }
    return 0.0;
}

double TestIntegrand::second_derivative(double x) const {
    switch (kind) {
        case Kind::Polynomial: {
            double acc = 0.0;
            for (std::size_t i = coefficients.size(); i-- > 2;) {
                acc = acc * x + static_cast<double>(i * (i - 1)) * coefficients[i];
            }
            return acc;
        }
        case Kind::Heaviside: throw Error(ErrorCode::UnsupportedDerivative, "heaviside has no classical derivative");
        case Kind::Bump: {
            const double t = (x - center) / half_width;
            if (!(std::abs(t) < 1.0)) return 0.0;
            const double u = 1.0 - t * t;
            const double g = 4.0 * t * t / (u * u * u * u) - 2.0 / (u * u) - 8.0 * t * t / (u * u * u);
            return value(x) * g / (half_width * half_width);
        }
        case Kind::Sin: return -scale * std::sin(x);
    }
    return 0.0;
}

ScalarFunction TestIntegrand::as_scalar_function() const {
    ScalarFunction f;
    f.value = [self = *this](double x) { return self.value(x); };
    if (kind != Kind::Heaviside) {
        f.derivative = [self = *this](double x) { return self.derivative(x); };
        f.second_derivative = [self = *this](double x) { return self.second_derivative(x); };
    }
    if (kind == Kind::Heaviside) f.breakpoints = {center};
    if (kind == Kind::Bump) f.breakpoints = {center - half_width, center, center + half_width};
    return f;
}

double eval_test_integrand(const TestIntegrand& f, std::span<const double> x) {
    if (x.empty()) throw Error(ErrorCode::DimensionMismatch, "test integrand: empty input");
    return f.value(x[0]);
}

}  // namespace mmc
