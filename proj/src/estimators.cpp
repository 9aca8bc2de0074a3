#include "mmc/estimators.hpp"

#include <cmath>
#include <string>

#include "mmc/detail/reduce.hpp"
#include "mmc/error.hpp"

namespace mmc {

namespace {

template <class T>
const T& require(const std::optional<T>& field, const char* name) {
    if (!field) throw Error(ErrorCode::MissingMoment, std::string("moment '") + name + "' is not populated");
    return *field;
}

double quadratic_form(const Matrix& a, std::span<const double> x) {
    const Vector ax = a * x;
    return dot(x, ax);
}

double trace_of_square(const Matrix& q) {
    double t = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) t += q(i, j) * q(j, i);
    return t;
}

std::vector<double> evaluate(const Integrand& f, const SampleBatch& x) {
    std::vector<double> out(x.n_samples());
    for (std::size_t k = 0; k < x.n_samples(); ++k) out[k] = f(x.row(k));
    return out;
}

struct CentredSums {
    double ff = 0.0;
    Vector yf;   // Σ (x − μ)(f − f̄)
    Matrix yyf;  // Σ (x − μ)(x − μ)ᵀ(f − f̄), upper triangle filled

    void operator+=(const CentredSums& o) {
        ff += o.ff;
        for (std::size_t i = 0; i < yf.size(); ++i) yf[i] += o.yf[i];
        for (std::size_t i = 0; i < yyf.rows(); ++i)
            for (std::size_t j = i; j < yyf.cols(); ++j) yyf(i, j) += o.yyf(i, j);
    }
};

CentredSums centred_sums(std::span<const double> f, double f_mean, const SampleBatch& x, std::span<const double> mu,
                         bool want_second) {
    const std::size_t n = x.dim();
    return detail::blocked_reduce<CentredSums>(
        f.size(),
        [&](std::size_t b, std::size_t e) {
            CentredSums s{0.0, Vector(n, 0.0), want_second ? Matrix(n, n) : Matrix()};
            Vector y(n);
            for (std::size_t k = b; k < e; ++k) {
                const double g = f[k] - f_mean;
                s.ff += g * g;
                const auto r = x.row(k);
                for (std::size_t i = 0; i < n; ++i) {
                    y[i] = r[i] - mu[i];
                    s.yf[i] += y[i] * g;
                }
                if (want_second) {
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = i; j < n; ++j) s.yyf(i, j) += y[i] * y[j] * g;
                }
            }
            return s;
        },
        [](CentredSums& a, const CentredSums& b) { a += b; });
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::Plain: return "plain";
        case Method::MM1: return "mm1";
        case Method::MM2: return "mm2";
        case Method::NonlinearMM1: return "nonlinear-mm1";
        case Method::NonlinearMM2: return "nonlinear-mm2";
    }
    return "unknown";
}

EstimateReport plain_estimate(std::span<const double> f) {
    const std::size_t big_n = f.size();
    if (big_n < 2) throw Error(ErrorCode::TooFewSamples, "plain_estimate: need at least 2 values");
    const double inv_n = 1.0 / static_cast<double>(big_n);
    const double mean = detail::pairwise_sum(f) * inv_n;
    const double ss = detail::blocked_reduce<double>(
        big_n,
        [&](std::size_t b, std::size_t e) {
            double s = 0.0;
            for (std::size_t k = b; k < e; ++k) s += (f[k] - mean) * (f[k] - mean);
            return s;
        },
        [](double& a, double b) { a += b; });
    const double var = ss * inv_n;
    return {Method::Plain, mean, std::sqrt(var * inv_n), big_n, VarianceComponents{var, 0.0, 0.0}, false};
}

EstimateReport plain_estimate(const Integrand& f, const SampleBatch& x) { return plain_estimate(evaluate(f, x)); }

EstimateReport matched_report(std::span<const double> f, const SampleBatch& matched, const MomentSpec& spec,
                              int order, Method method) {
    const std::size_t big_n = f.size();
    if (big_n < 2) throw Error(ErrorCode::TooFewSamples, "matched_report: need at least 2 samples");
    if (matched.n_samples() != big_n) throw Error(ErrorCode::DimensionMismatch, "matched_report: f/batch length");
    if (matched.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "matched_report: batch/spec dim");

    const double inv_n = 1.0 / static_cast<double>(big_n);
    const double mean = detail::pairwise_sum(f) * inv_n;
    // Centring f is exact here: the matched batch has sample mean μ (and covariance Σ),
    // so the f̄ terms of the by-product formulas cancel.
    const CentredSums s = centred_sums(f, mean, matched, spec.mean(), order == 2);

    VarianceComponents c;
    c.plain_term = s.ff * inv_n;
    Vector m = s.yf;
    for (double& v : m) v *= inv_n;
    c.first_order_correction = quadratic_form(spec.cov_inv().matrix(), m);
    if (order == 2) {
        const std::size_t n = spec.dim();
        Matrix sm(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) sm(i, j) = sm(j, i) = s.yyf(i, j) * inv_n;
        c.second_order_correction = 0.5 * trace_of_square(spec.cov_inv().matrix() * sm);
    }
    const double var = c.plain_term - c.first_order_correction - c.second_order_correction;
    const bool floored = var < 0.0;
    return {method, mean, floored ? 0.0 : std::sqrt(var * inv_n), big_n, c, floored};
}

EstimateReport mm1_estimate(const Integrand& f, const SampleBatch& x, const MomentSpec& spec) {
    if (x.n_samples() < 2) throw Error(ErrorCode::TooFewSamples, "mm1_estimate: need at least 2 samples");
    if (x.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "mm1_estimate: batch/spec dimension");
    const MatchedBatch matched = match_first_order(x, spec.mean());
    return matched_report(evaluate(f, matched.values), matched.values, spec, 1, Method::MM1);
}

EstimateReport mm2_estimate(const Integrand& f, const SampleBatch& x, const MomentSpec& spec) {
    const MatchedBatch matched = match_second_order(x, spec);
    return matched_report(evaluate(f, matched.values), matched.values, spec, 2, Method::MM2);
}

EstimateReport nonlinear_estimate(const Integrand& f, const SampleBatch& y, const DistributionMap& dist, int order) {
    if (y.n_samples() < 2) throw Error(ErrorCode::TooFewSamples, "nonlinear_estimate: need at least 2 samples");
    const MatchedBatch matched = nonlinear_match(y, dist, order);
    return matched_report(evaluate(f, matched.values), *matched.latent, MomentSpec::standard(1), order,
                          order == 1 ? Method::NonlinearMM1 : Method::NonlinearMM2);
}

double asym_var_mm1_general(const IntegrandMoments& m, const SymMatrix& sigma) {
    const double var = require(m.var_f, "var_f");
    const Vector& g = require(m.grad_mean, "grad_mean");
    const Vector& xmu = require(m.xmu_f_mean, "xmu_f_mean");
    return var - 2.0 * dot(g, xmu) + quadratic_form(sigma.matrix(), g);
}

double asym_var_mm1_normal_smooth(const IntegrandMoments& m, const SymMatrix& sigma) {
    const double var = require(m.var_f, "var_f");
    const Vector& g = require(m.grad_mean, "grad_mean");
    return std::max(0.0, var - quadratic_form(sigma.matrix(), g));
}

double asym_var_mm1_normal_rough(const IntegrandMoments& m, const SymMatrix& sigma) {
    const double var = require(m.var_f, "var_f");
    const Vector& xf = require(m.xf_mean, "xf_mean");
    return std::max(0.0, var - quadratic_form(spd_inverse(sigma).matrix(), xf));
}

double asym_var_mm2_general_scalar(const IntegrandMoments& m) {
    const double var = require(m.var_f, "var_f");
    const double d1 = require(m.grad_mean, "grad_mean").at(0);
    const double d1x = require(m.hess_mean, "hess_mean")(0, 0);
    const double ef = require(m.mean_f, "mean_f");
    const double efx = require(m.xf_mean, "xf_mean").at(0);
    const double efx2 = require(m.x2f_mean, "x2f_mean");
    const double m3 = require(m.third_moment, "third_moment");
    const double m4 = require(m.fourth_moment, "fourth_moment");
    return var + 0.25 * d1x * d1x * (m4 - 1.0) + d1 * d1 + d1x * (ef - efx2) - 2.0 * d1 * efx + d1x * d1 * m3;
}

double asym_var_mm2_normal_smooth(const IntegrandMoments& m, const SymMatrix& sigma) {
    const double var = require(m.var_f, "var_f");
    const Vector& g = require(m.grad_mean, "grad_mean");
    const SymMatrix& h = require(m.hess_mean, "hess_mean");
    const double trace_term = 0.5 * trace_of_square(sigma.matrix() * h.matrix());
    return std::max(0.0, var - quadratic_form(sigma.matrix(), g) - trace_term);
}

double asym_var_mm2_normal_rough(const IntegrandMoments& m, const SymMatrix& sigma) {
    const double var = require(m.var_f, "var_f");
    const Vector& xf = require(m.xf_mean, "xf_mean");
    const Matrix& q = require(m.quad_mean, "quad_mean");
    if (q.rows() != sigma.dim() || q.cols() != sigma.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "asym_var_mm2_normal_rough: quad_mean shape");
    }
    return std::max(0.0, var - quadratic_form(spd_inverse(sigma).matrix(), xf) - 0.5 * trace_of_square(q));
}

double asym_var_mm2_uniform_published(const IntegrandMoments& m) {
    const double var = require(m.var_f, "var_f");
    const double ef = require(m.mean_f, "mean_f");
    const double efx2 = require(m.x2f_mean, "x2f_mean");
    return var + efx2 - 0.8 * ef * ef;
}

IntegrandMoments estimate_integrand_moments(const Integrand& f, const MomentSpec& spec, RngStream& stream,
                                            std::size_t n_samples) {
    if (n_samples < 100) throw Error(ErrorCode::TooFewSamples, "estimate_integrand_moments: need n_samples >= 100");
    const std::size_t n = spec.dim();
    const SampleBatch x = correlate(draw_standard_batch(stream, n_samples, n), spec);
    const std::vector<double> fv = evaluate(f, x);
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    const double mean_f = detail::pairwise_sum(fv) * inv_n;

    // Raw (uncentred in f) sums: Σ f², Σ (x−μ)f, Σ (x−μ)(x−μ)ᵀf, plus scalar extras.
    struct Sums {
        double ff = 0.0, x2f = 0.0, m3 = 0.0, m4 = 0.0;
        Vector yf, xf;
        Matrix yyf;
        void operator+=(const Sums& o) {
            ff += o.ff;
            x2f += o.x2f;
            m3 += o.m3;
            m4 += o.m4;
            for (std::size_t i = 0; i < yf.size(); ++i) {
                yf[i] += o.yf[i];
                xf[i] += o.xf[i];
            }
            for (std::size_t i = 0; i < yyf.rows(); ++i)
                for (std::size_t j = 0; j < yyf.cols(); ++j) yyf(i, j) += o.yyf(i, j);
        }
    };
    const Vector& mu = spec.mean();
    const Sums s = detail::blocked_reduce<Sums>(
        n_samples,
        [&](std::size_t b, std::size_t e) {
            Sums t{0.0, 0.0, 0.0, 0.0, Vector(n, 0.0), Vector(n, 0.0), Matrix(n, n)};
            Vector y(n);
            for (std::size_t k = b; k < e; ++k) {
                const auto r = x.row(k);
                const double fk = fv[k];
                const double g = fk - mean_f;
                t.ff += g * g;
                for (std::size_t i = 0; i < n; ++i) {
                    y[i] = r[i] - mu[i];
                    t.yf[i] += y[i] * fk;
                    t.xf[i] += r[i] * fk;
                }
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i; j < n; ++j) t.yyf(i, j) += y[i] * y[j] * fk;
                if (n == 1) {
                    t.x2f += r[0] * r[0] * fk;
                    t.m3 += r[0] * r[0] * r[0];
                    t.m4 += r[0] * r[0] * r[0] * r[0];
                }
            }
            return t;
        },
        [](Sums& a, const Sums& b) { a += b; });

    IntegrandMoments out;
    out.mean_f = mean_f;
    out.var_f = s.ff * inv_n;
    Vector xmu(n), xf(n);
    for (std::size_t i = 0; i < n; ++i) {
        xmu[i] = s.yf[i] * inv_n;
        xf[i] = s.xf[i] * inv_n;
    }
    // E[(X−μ)(X−μ)ᵀ f] − Σ E[f]
    Matrix centred(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            centred(i, j) = centred(j, i) = s.yyf(i, j) * inv_n - spec.cov()(i, j) * mean_f;
    const Matrix& sinv = spec.cov_inv().matrix();
    out.quad_mean = sinv * centred;
    out.grad_mean = sinv * std::span<const double>(xmu);
    out.hess_mean = SymMatrix(sinv * centred * sinv);
    out.xmu_f_mean = std::move(xmu);
    out.xf_mean = std::move(xf);
    if (n == 1) {
        out.x2f_mean = s.x2f * inv_n;
        out.third_moment = s.m3 * inv_n;
        out.fourth_moment = s.m4 * inv_n;
    }
    return out;
}

IntegrandMoments quadrature_moments(const ScalarFunction& f, const ScalarDensity& density, HessianSlot slot) {
    const auto& nodes = f.breakpoints;
    const auto& v = f.value;
    const double mu = density.mean;
    const double s2 = density.variance;

    IntegrandMoments out;
    const double ef = expectation(density, v, nodes);
    out.mean_f = ef;
    out.var_f = expectation(density, [&](double x) { const double g = v(x) - ef; return g * g; }, nodes);
    out.xf_mean = Vector{expectation(density, [&](double x) { return x * v(x); }, nodes)};
    out.xmu_f_mean = Vector{expectation(density, [&](double x) { return (x - mu) * v(x); }, nodes)};
    out.x2f_mean = expectation(density, [&](double x) { return x * x * v(x); }, nodes);
    out.quad_mean =
        Matrix(1, 1, expectation(density, [&](double x) { return ((x - mu) * (x - mu) / s2 - 1.0) * v(x); }, nodes));
    out.third_moment = expectation(density, [](double x) { return x * x * x; });
    out.fourth_moment = expectation(density, [](double x) { return x * x * x * x; });
    if (f.derivative) {
        out.grad_mean = Vector{expectation(density, f.derivative, nodes)};
        if (slot == HessianSlot::FirstDerivativeTimesX) {
            out.hess_mean = SymMatrix(Matrix(1, 1, expectation(density, [&](double x) { return f.derivative(x) * x; },
                                                               nodes)));
        }
    }
    if (slot == HessianSlot::SecondDerivative && f.second_derivative) {
        out.hess_mean = SymMatrix(Matrix(1, 1, expectation(density, f.second_derivative, nodes)));
    }
    return out;
}

}  // namespace mmc
