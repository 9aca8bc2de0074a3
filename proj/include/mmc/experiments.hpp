#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmc/estimators.hpp"
#include "mmc/payoffs.hpp"

namespace mmc {

enum class Experiment { Table1, Table2, Convergence, VerifyAsymptotics, Counterexamples, Price };

std::string_view to_string(Experiment e) noexcept;
/// Throws ConfigError for unknown names.
Experiment parse_experiment(std::string_view name);

inline constexpr std::uint64_t kDefaultSeed = 20240521;

struct RunConfig {
    Experiment experiment = Experiment::Table1;
    std::vector<std::size_t> sample_sizes;
    std::size_t n_outer_runs = 500;
    std::uint64_t seed = kDefaultSeed;
    MarketParams market;
    std::string output_path;  // empty: no file written
    unsigned workers = 0;     // 0: one per hardware thread

    /// Per-experiment defaults (sample sizes, market preset, output file name).
    static RunConfig defaults(Experiment e);

    /// Throws ConfigError: sizes must be strictly increasing and ≥ 2, outer runs ≥ 2.
    void validate() const;
};

/// One row of the pricing tables. se_mm1/se_mm2 are the by-product formula SEs of the
/// primary run; se_mms1/se_mms2 are the standard deviations of the estimates over the
/// independent outer runs.
struct TableRow {
    std::size_t n_samples = 0;
    double pv_iid = 0.0;
    double pv_mm1 = 0.0;
    double pv_mm2 = 0.0;
    double se_iid = 0.0;
    double se_mm1 = 0.0;
    double se_mms1 = 0.0;
    double se_mm2 = 0.0;
    double se_mms2 = 0.0;
};

/// Header and rows, 6 significant digits.
std::string format_table_csv(const std::vector<TableRow>& rows);

/// Writes `contents` to `path`; throws IoError.
void write_text_file(const std::string& path, std::string_view contents);

/// Down-in put tables (plain, MM1, MM2) for config.market. Primary run uses stream 0,
/// outer run r = 1..R uses stream r. Writes the CSV when output_path is set.
std::vector<TableRow> run_table(const RunConfig& config);

/// Same procedure for an arbitrary integrand over standard normal rows of width `dim`.
std::vector<TableRow> simulate_table(const RunConfig& config, const Integrand& f, std::size_t dim);

/// Least-squares slope of log(se) against log(N); empty when any se is not positive
/// or fewer than two points are given.
std::optional<double> loglog_slope(std::span<const std::size_t> sizes, std::span<const double> se);

struct MethodSlope {
    std::string method;
    std::optional<double> slope;
};

struct ConvergenceReport {
    std::vector<TableRow> rows;
    std::vector<MethodSlope> slopes;  // iid, mm1, mm2, mms1, mms2
};

/// Needs at least three sample sizes. `integrand` overrides the market payoff.
ConvergenceReport run_convergence(const RunConfig& config, const Integrand* integrand = nullptr,
                                  std::size_t dim = 0);
std::string format_convergence_csv(const ConvergenceReport& report);

struct AsymptoticCheck {
    std::string integrand;
    Method method = Method::MM1;
    double oracle = 0.0;
    std::vector<std::size_t> sizes;
    std::vector<double> n_var;  // N·Var of the estimator at each size
    double relative_error = 0.0;  // at the largest size; absolute when the oracle is 0
    bool passed = false;
};

struct VerifyReport {
    std::vector<AsymptoticCheck> checks;
    bool all_passed = false;
};

/// Tolerances for the asymptotic comparisons.
inline constexpr double kAsymRelTol = 0.10;
inline constexpr double kZeroVarianceTol = 1e-9;

/// N·Var over outer runs for standard-normal test integrands, against the rough-form
/// oracles with quadrature-computed moments.
VerifyReport run_verify_asymptotics(const RunConfig& config);
std::string format_verify_csv(const VerifyReport& report);

struct EmpiricalVariance {
    double mean = 0.0;   // average estimate over the runs
    double n_var = 0.0;  // N times the unbiased variance of the estimates
};

using BatchDrawer = std::function<SampleBatch(RngStream&, std::size_t)>;
/// Returns one estimate per estimator for a batch.
using BatchEstimators = std::function<std::vector<double>(const SampleBatch&)>;

/// Runs r = 1..n_runs draw a batch of n_samples from stream (seed, r) and apply every
/// estimator to it; results are gathered in run order, so the output does not depend on
/// the worker count.
std::vector<EmpiricalVariance> empirical_n_var(std::size_t n_samples, std::size_t n_runs, std::uint64_t seed,
                                               unsigned workers, const BatchDrawer& draw,
                                               const BatchEstimators& estimators);

struct CounterexampleReport {
    // Uniform U(−√3, √3), interior bump, first order.
    double uniform_var_f = 0.0;
    double uniform_n_var_mm1 = 0.0;
    bool uniform_mm1_passed = false;
    // Exp(1), non-negative bump in (0, 1), first order.
    double exp_var_f = 0.0;
    double exp_closed_form = 0.0;
    double exp_n_var_mm1 = 0.0;
    bool exp_exceeds_plain = false;
    bool exp_matches_closed_form = false;
    // Uniform, second order: empirical limit vs the published closed form and the
    // scalar general expansion evaluated with quadrature moments.
    double uniform_n_var_mm2 = 0.0;
    double uniform_mm2_published = 0.0;
    double uniform_mm2_expansion = 0.0;

    std::size_t n_samples = 0;
    std::size_t n_outer_runs = 0;
    bool all_passed = false;
};

/// Uses the largest configured sample size.
CounterexampleReport run_counterexamples(const RunConfig& config);
std::string format_counterexamples_csv(const CounterexampleReport& report);

/// Integrands used by the counterexample suite.
TestIntegrand uniform_counterexample_bump();
TestIntegrand exponential_counterexample_bump();

/// Single pricing run (stream 0) at the first sample size: plain, MM1, MM2.
std::vector<EstimateReport> run_price(const RunConfig& config);
std::string format_price_csv(const std::vector<EstimateReport>& reports);

}  // namespace mmc
