#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mmc/experiments.hpp"
#include "test_util.hpp"

using namespace mmc;

namespace {

RunConfig small_table(Experiment e, std::vector<std::size_t> sizes, std::size_t runs) {
    RunConfig c = RunConfig::defaults(e);
    c.sample_sizes = std::move(sizes);
    c.n_outer_runs = runs;
    c.output_path.clear();
    return c;
}

}  // namespace

TEST(Experiment, NamesRoundTrip) {
    for (Experiment e : {Experiment::Table1, Experiment::Table2, Experiment::Convergence,
                         Experiment::VerifyAsymptotics, Experiment::Counterexamples, Experiment::Price}) {
        EXPECT_EQ(parse_experiment(to_string(e)), e);
    }
    EXPECT_EQ(to_string(Experiment::VerifyAsymptotics), "verify-asymptotics");
    EXPECT_MMC_ERROR(parse_experiment("table3"), ErrorCode::ConfigError);
}

TEST(RunConfig, Defaults) {
    const RunConfig t1 = RunConfig::defaults(Experiment::Table1);
    EXPECT_EQ(t1.n_outer_runs, 500u);
    EXPECT_EQ(t1.seed, kDefaultSeed);
    EXPECT_EQ(t1.sample_sizes, (std::vector<std::size_t>{10000, 20000, 40000, 80000, 160000, 320000, 640000}));
    EXPECT_EQ(t1.market.n_assets(), 1u);
    EXPECT_EQ(t1.output_path, "table1.csv");
    EXPECT_EQ(RunConfig::defaults(Experiment::Table2).market.n_assets(), 3u);
    EXPECT_EQ(RunConfig::defaults(Experiment::VerifyAsymptotics).output_path, "verify_asymptotics.csv");
    EXPECT_NO_THROW(RunConfig::defaults(Experiment::Counterexamples).validate());
}

TEST(RunConfig, Validation) {
    RunConfig c = small_table(Experiment::Table1, {100, 100}, 10);
    EXPECT_MMC_ERROR(c.validate(), ErrorCode::ConfigError);
    c.sample_sizes = {200, 100};
    EXPECT_MMC_ERROR(c.validate(), ErrorCode::ConfigError);
    c.sample_sizes = {};
    EXPECT_MMC_ERROR(c.validate(), ErrorCode::ConfigError);
    c.sample_sizes = {1, 100};
    EXPECT_MMC_ERROR(c.validate(), ErrorCode::ConfigError);
    c.sample_sizes = {100};
    c.n_outer_runs = 1;
    EXPECT_MMC_ERROR(c.validate(), ErrorCode::ConfigError);
    c.n_outer_runs = 2;
    EXPECT_NO_THROW(c.validate());
    c.market.barrier = 2.0;
    EXPECT_MMC_ERROR(c.validate(), ErrorCode::ConfigError);
    EXPECT_MMC_ERROR(run_table(c), ErrorCode::ConfigError);

    RunConfig t2 = small_table(Experiment::Table2, {4, 8}, 2);
    EXPECT_MMC_ERROR(t2.validate(), ErrorCode::ConfigError);  // three assets need N ≥ 5

    RunConfig conv = small_table(Experiment::Convergence, {100, 200}, 5);
    EXPECT_MMC_ERROR(run_convergence(conv), ErrorCode::ConfigError);
}

TEST(RunTable, DeterministicCsvRegardlessOfWorkers) {
    RunConfig c = small_table(Experiment::Table2, {500, 1000}, 20);
    c.workers = 1;
    const std::string a = format_table_csv(run_table(c));
    c.workers = 4;
    const std::string b = format_table_csv(run_table(c));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, a.find('\n')), "n_samples,pv_iid,pv_mm1,pv_mm2,se_iid,se_mm1,se_mms1,se_mm2,se_mms2");
    c.seed += 1;
    EXPECT_NE(format_table_csv(run_table(c)), a);
}

TEST(RunTable, WritesCsvFile) {
    RunConfig c = small_table(Experiment::Table1, {300}, 3);
    c.output_path = testing::TempDir() + "mmc_table_test.csv";
    const auto rows = run_table(c);
    std::ifstream in(c.output_path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), format_table_csv(rows));
    c.output_path = "/nonexistent-dir/x.csv";
    EXPECT_MMC_ERROR(run_table(c), ErrorCode::IoError);
}

TEST(FormatTableCsv, SixSignificantDigits) {
    const std::vector<TableRow> rows = {{10000, 0.0680123456, 1.0, 2.0, 0.001351234, 0.0, 3e-9, 123456789.0, 0.5}};
    EXPECT_EQ(format_table_csv(rows),
              "n_samples,pv_iid,pv_mm1,pv_mm2,se_iid,se_mm1,se_mms1,se_mm2,se_mms2\n"
              "10000,0.0680123,1,2,0.00135123,0,3e-09,1.23457e+08,0.5\n");
}

TEST(RunTable, ColumnConsistencyAndOrdering) {
    for (Experiment e : {Experiment::Table1, Experiment::Table2}) {
        const RunConfig c = small_table(e, {10000}, 500);
        for (const TableRow& r : run_table(c)) {
            EXPECT_GE(r.se_iid, 0.0);
            EXPECT_GE(r.se_mms1, 0.0);
            EXPECT_GE(r.se_mms2, 0.0);
            EXPECT_NEAR(r.se_mm1 / r.se_mms1, 1.0, 0.15) << to_string(e);
            EXPECT_NEAR(r.se_mm2 / r.se_mms2, 1.0, 0.15) << to_string(e);
            EXPECT_LT(r.se_mm2, r.se_mm1);
            EXPECT_LT(r.se_mm1, r.se_iid);
        }
    }
}

TEST(LoglogSlope, FitsAndUndefinedCases) {
    const std::vector<std::size_t> n = {100, 400, 1600};
    const std::vector<double> se = {0.1, 0.05, 0.025};
    ASSERT_TRUE(loglog_slope(n, se).has_value());
    EXPECT_NEAR(*loglog_slope(n, se), -0.5, 1e-14);
    const std::vector<double> zeros = {0.0, 0.0, 0.0};
    EXPECT_FALSE(loglog_slope(n, zeros).has_value());
    const std::vector<double> two = {0.1, 0.2};
    EXPECT_FALSE(loglog_slope(n, two).has_value());
}

TEST(RunConvergence, ConstantPayoffHasUndefinedSlopes) {
    const RunConfig c = small_table(Experiment::Convergence, {100, 200, 400}, 5);
    const Integrand constant = [](std::span<const double>) { return 1.25; };
    const ConvergenceReport rep = run_convergence(c, &constant, 1);
    ASSERT_EQ(rep.slopes.size(), 5u);
    for (const auto& row : rep.rows) {
        EXPECT_EQ(row.se_iid, 0.0);
        EXPECT_EQ(row.se_mm1, 0.0);
        EXPECT_EQ(row.se_mm2, 0.0);
    }
    for (const auto& s : rep.slopes) EXPECT_FALSE(s.slope.has_value()) << s.method;
    EXPECT_NE(format_convergence_csv(rep).find("n_samples,se_iid"), std::string::npos);
}

TEST(RunConvergence, DoublingHalvesPlainVariance) {
    const RunConfig c = small_table(Experiment::Convergence, {20000, 40000, 80000}, 2);
    const ConvergenceReport rep = run_convergence(c);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const double ratio = std::pow(rep.rows[i].se_iid / rep.rows[i - 1].se_iid, 2);
        EXPECT_NEAR(ratio, 0.5, 0.1);
    }
    EXPECT_EQ(rep.slopes[0].method, "iid");
    EXPECT_NEAR(*rep.slopes[0].slope, -0.5, 0.05);
}

TEST(EmpiricalNVar, IidMeanHasUnitScaledVariance) {
    const BatchDrawer draw = [](RngStream& s, std::size_t n) { return draw_standard_batch(s, n, 1); };
    const BatchEstimators est = [](const SampleBatch& x) {
        double s = 0.0;
        for (double v : x.values()) s += v;
        return std::vector<double>{s / double(x.n_samples())};
    };
    const auto one = empirical_n_var(200, 2000, 71, 1, draw, est);
    const auto many = empirical_n_var(200, 2000, 71, 3, draw, est);
    EXPECT_EQ(one[0].n_var, many[0].n_var);
    EXPECT_EQ(one[0].mean, many[0].mean);
    // Relative SE of a sample variance over 2000 runs is about √(2/2000) ≈ 3%.
    EXPECT_NEAR(one[0].n_var, 1.0, 0.13);
    EXPECT_MMC_ERROR(empirical_n_var(200, 1, 71, 1, draw, est), ErrorCode::ConfigError);
}

TEST(VerifyAsymptotics, SmallRunStructure) {
    RunConfig c = small_table(Experiment::VerifyAsymptotics, {2000, 4000}, 50);
    const VerifyReport rep = run_verify_asymptotics(c);
    ASSERT_EQ(rep.checks.size(), 10u);
    for (const auto& ch : rep.checks) {
        EXPECT_EQ(ch.sizes, c.sample_sizes);
        EXPECT_EQ(ch.n_var.size(), 2u);
    }
    // Deterministic integrands are flagged through the absolute branch.
    for (const auto& ch : rep.checks) {
        if ((ch.integrand == "x") || (ch.integrand == "x^2" && ch.method == Method::MM2)) {
            EXPECT_EQ(ch.oracle, 0.0);
            EXPECT_TRUE(ch.passed);
        }
    }
    EXPECT_NE(format_verify_csv(rep).find("heaviside,mm1,2000,"), std::string::npos);
}

TEST(Counterexamples, SmallRunStructure) {
    RunConfig c = small_table(Experiment::Counterexamples, {5000}, 100);
    const CounterexampleReport r = run_counterexamples(c);
    EXPECT_EQ(r.n_samples, 5000u);
    EXPECT_GT(r.exp_closed_form, r.exp_var_f);
    EXPECT_GT(r.uniform_mm2_published, r.uniform_mm2_expansion);
    const std::string csv = format_counterexamples_csv(r);
    EXPECT_NE(csv.find("uniform_mm2,published_limit,"), std::string::npos);
    EXPECT_NE(csv.find("exponential_mm1,closed_form,"), std::string::npos);
}

TEST(RunPrice, ThreeMethods) {
    RunConfig c = small_table(Experiment::Price, {20000}, 2);
    const auto reps = run_price(c);
    ASSERT_EQ(reps.size(), 3u);
    EXPECT_EQ(reps[0].method, Method::Plain);
    EXPECT_EQ(reps[2].method, Method::MM2);
    for (const auto& r : reps) EXPECT_NEAR(r.estimate, 0.0681213663845444, 5.0 * r.std_error);
    EXPECT_EQ(format_price_csv(reps).substr(0, 35), "method,estimate,std_error,n_samples");
}
