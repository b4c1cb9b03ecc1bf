#include "nafem/errors.hpp"
#include "nafem/experiments.hpp"
#include "nafem/report.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace nafem;
using nlohmann::json;

namespace {

ExperimentConfig small_config(StudyKind kind, std::vector<int> levels) {
    ExperimentConfig c;
    c.study = kind;
    c.levels = std::move(levels);
    return c;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(Eoc, QuarterErrorIsOrderTwo) {
    const auto eoc = compute_eoc({1e-2, 2.5e-3}, {0.1, 0.05});
    ASSERT_EQ(eoc.size(), 1u);
    EXPECT_NEAR(eoc[0], 2.0, 1e-14);
}

TEST(Eoc, EqualErrorsGiveZero) {
    EXPECT_EQ(compute_eoc({3e-3, 3e-3}, {0.1, 0.05})[0], 0.0);
}

TEST(Eoc, ThreeLevelsTwoOrders) {
    EXPECT_EQ(compute_eoc({1.0, 0.5, 0.25}, {1.0, 0.5, 0.25}).size(), 2u);
}

TEST(Eoc, RejectsBadInput) {
    EXPECT_THROW(compute_eoc({1.0, 0.0}, {1.0, 0.5}), ConfigError);
    EXPECT_THROW(compute_eoc({1.0, -1.0}, {1.0, 0.5}), ConfigError);
    EXPECT_THROW(compute_eoc({1.0}, {1.0, 0.5}), ConfigError);
    EXPECT_THROW(compute_eoc({1.0, 0.5}, {0.5, 1.0}), ConfigError);
}

TEST(EocProperty, RecoversPowerLaws) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> order(0.3, 4.0), scale(1e-3, 1e3);
    for (int trial = 0; trial < 100; ++trial) {
        const double p = order(rng), c = scale(rng);
        std::vector<double> hs, es;
        for (int k = 0; k < 5; ++k) {
            hs.push_back(std::pow(0.5, k + 2));
            es.push_back(c * std::pow(hs.back(), p));
        }
        for (double e : compute_eoc(es, hs)) EXPECT_NEAR(e, p, 1e-10);
        EXPECT_NEAR(loglog_slope(hs, es), p, 1e-10);
    }
}

TEST(Config, ValidationRejectsBadSettings) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    auto expect_bad = [](auto mutate) {
        ExperimentConfig bad;
        mutate(bad);
        EXPECT_THROW(bad.validate(), ConfigError);
    };
    expect_bad([](ExperimentConfig& x) { x.levels = {16, 8}; });
    expect_bad([](ExperimentConfig& x) { x.levels = {}; });
    expect_bad([](ExperimentConfig& x) { x.beta = 0.0; });
    expect_bad([](ExperimentConfig& x) { x.beta = 2.5; });
    expect_bad([](ExperimentConfig& x) { x.t_eval = 2.0; });
    expect_bad([](ExperimentConfig& x) { x.dim = 3; });
    expect_bad([](ExperimentConfig& x) { x.field = "unknown"; });
    expect_bad([](ExperimentConfig& x) { x.nonlinearity = "quartic"; });
    expect_bad([](ExperimentConfig& x) { x.reference_level = 100; });
    expect_bad([](ExperimentConfig& x) { x.t = 0.1; });
}

TEST(Config, StepAndEvaluationRules) {
    ExperimentConfig c;
    EXPECT_EQ(c.step_for(0.5), 1e-3);
    EXPECT_EQ(c.step_for(1.0 / 64), 1.0 / 64 / 64 / 4);
    c.dt_rule = DtRule::QuarterHSquared;
    EXPECT_EQ(c.step_for(0.5), 0.0625);
    c.dt_rule = DtRule::Fixed;
    c.dt = 0.01;
    EXPECT_EQ(c.step_for(0.5), 0.01);
    EXPECT_EQ(c.evaluation_time(0.1), 1.0);
    c.teval_rule = TEvalRule::H;
    EXPECT_EQ(c.evaluation_time(0.1), 0.1);
    c.teval_rule = TEvalRule::HSquared;
    EXPECT_EQ(c.evaluation_time(0.5), 0.25);
}

TEST(Config, EnumRoundTrip) {
    for (StudyKind k : {StudyKind::Manufactured, StudyKind::Nonsmooth, StudyKind::Lemma, StudyKind::Smoothing})
        EXPECT_EQ(parse_study_kind(to_string(k)), k);
    for (TEvalRule r : {TEvalRule::Fixed, TEvalRule::H, TEvalRule::HSquared})
        EXPECT_EQ(parse_teval_rule(to_string(r)), r);
    for (DtRule r : {DtRule::Auto, DtRule::QuarterHSquared, DtRule::Fixed})
        EXPECT_EQ(parse_dt_rule(to_string(r)), r);
    EXPECT_THROW(parse_study_kind("ritz"), ConfigError);
    EXPECT_THROW(parse_output_format("xml"), ConfigError);
}

TEST(Manufactured, SingleLevelHasNoEoc) {
    const ErrorTable t = run_manufactured_study(small_config(StudyKind::Manufactured, {8}));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_FALSE(t.rows[0].eoc.has_value());
    EXPECT_FALSE(t.final_eoc().has_value());
    EXPECT_GT(t.rows[0].error_l2, 0.0);
}

TEST(Manufactured, RateApproachesTwo) {
    ExperimentConfig c = small_config(StudyKind::Manufactured, {4, 8, 16, 32});
    c.dt_rule = DtRule::QuarterHSquared;
    const ErrorTable t = run_manufactured_study(c);
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_FALSE(t.aborted.has_value());
    EXPECT_NEAR(*t.final_eoc(), 2.0, 0.1);
    EXPECT_LE(std::abs(*t.rows.back().eoc - 2.0), std::abs(*t.rows[1].eoc - 2.0));
    EXPECT_NEAR(t.rows.back().error_l2 / t.rows[2].error_l2, 0.25, 0.02);
}

TEST(Manufactured, RejectsRobin) {
    ExperimentConfig c = small_config(StudyKind::Manufactured, {8});
    c.bc = BoundarySpec::robin(1.0);
    EXPECT_THROW(run_manufactured_study(c), ConfigError);
}

TEST(Nonsmooth, ReferenceMustBeFineEnough) {
    ExperimentConfig c = small_config(StudyKind::Nonsmooth, {4, 8});
    c.reference_level = 8;
    EXPECT_THROW(run_nonsmooth_study(c), ConfigError);
    c.reference_level = 24;
    c.levels = {5, 12};
    EXPECT_THROW(run_nonsmooth_study(c), ConfigError);
}

TEST(Nonsmooth, SmallStudyProducesTable) {
    ExperimentConfig c = small_config(StudyKind::Nonsmooth, {4, 8, 16});
    c.beta = 2.0;
    const ErrorTable t = run_nonsmooth_study(c);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_GT(*t.final_eoc(), 1.5);
    for (const ErrorRow& r : t.rows) EXPECT_EQ(r.t_eval, 1.0);
}

TEST(Lemma, SweepRatiosAndAbort) {
    ExperimentConfig c = small_config(StudyKind::Lemma, {8, 16});
    const ErrorTable t = run_lemma_study(c);
    ASSERT_EQ(t.rows.size(), 2u);
    ASSERT_GE(t.sweep.size(), 2u);
    EXPECT_NEAR(t.sweep[0].elapsed, 0.5, 1e-15);
    EXPECT_FALSE(t.sweep[0].ratio.has_value());
    for (std::size_t k = 1; k < t.sweep.size(); ++k) {
        EXPECT_NEAR(t.sweep[k].elapsed, t.sweep[k - 1].elapsed / 2, 1e-15);
        EXPECT_NEAR(*t.sweep[k].ratio, t.sweep[k].error_l2 / t.sweep[k - 1].error_l2, 1e-15);
    }

    ExperimentConfig runaway = small_config(StudyKind::Lemma, {8, 16});
    runaway.expressions = {{"q0", "80"}};
    EXPECT_THROW(run_lemma_study(runaway), NumericalError);
}

TEST(Smoothing, ConstantFieldFollowsInverseTau) {
    ExperimentConfig c = small_config(StudyKind::Smoothing, {24});
    c.field = "constant";
    const SmoothingTable t = run_smoothing_probe(c);
    EXPECT_EQ(t.level, 24);
    EXPECT_EQ(t.rows.size(), 9u);
    EXPECT_NEAR(t.alpha, 1.0, 0.1);
    for (const SmoothingRow& r : t.rows) {
        EXPECT_EQ(r.in_fit, r.tau * t.lambda_min <= 0.25);
        if (r.in_fit) EXPECT_NEAR(r.norm * std::exp(1.0) * r.tau, 1.0, 0.1);
    }
}

TEST(Ritz, StudyRates) {
    ExperimentConfig c = small_config(StudyKind::Manufactured, {8, 16, 32});
    const auto rows = run_ritz_study(c, 0.5);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NEAR(std::log2(rows[1].error_l2 / rows[2].error_l2), 2.0, 0.1);
    EXPECT_NEAR(std::log2(rows[1].error_h1 / rows[2].error_h1), 1.0, 0.1);
}

TEST(IdentityResidual, QuadratureConsistency) {
    ExperimentConfig c;
    const IdentityResidual coarse = operator_identity_residual(c, 16, 0.5, LoadQuadrature::Assembly);
    const IdentityResidual fine = operator_identity_residual(c, 32, 0.5, LoadQuadrature::Assembly);
    EXPECT_GT(coarse.scale, 1.0);
    EXPECT_LT(fine.residual, 1e-4 * fine.scale);
    EXPECT_GT(coarse.residual / fine.residual, 3.5);
}

TEST(IdentityResidual, ExactWithAccurateLoads) {
    ExperimentConfig c;
    for (double t : {0.0, 1.0}) {
        const IdentityResidual r = operator_identity_residual(c, 32, t);
        EXPECT_LT(r.residual, 1e-11 * r.scale) << t;
    }
    c.dim = 2;
    c.field = "anisotropic";
    const IdentityResidual r2 = operator_identity_residual(c, 8, 0.3);
    EXPECT_LT(r2.residual, 1e-5 * r2.scale);
}

TEST(Report, CsvLayout) {
    ErrorTable t;
    t.rows.push_back({8, 0.125, 0.001, 1.0, 0.0123, std::nullopt});
    t.rows.push_back({16, 0.0625, 0.001, 1.0, 0.003, 2.03});
    const std::string csv = render_csv(t);
    const auto lines = lines_of(csv);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "level,h,dt,t_eval,error_l2,eoc");
    EXPECT_EQ(lines[1], "8,0.125,0.001,1,0.0123,");
    EXPECT_EQ(lines[2], "16,0.0625,0.001,1,0.003,2.03");
    EXPECT_EQ(csv.back(), '\n');
}

TEST(Report, EmptyTableIsHeaderOnly) {
    EXPECT_EQ(render_csv(ErrorTable{}), "level,h,dt,t_eval,error_l2,eoc\n");
}

TEST(Report, NumbersRoundTrip) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(mant(rng), expo(rng));
        EXPECT_EQ(std::stod(format_number(x)), x);
    }
    EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(Report, JsonRoundTrip) {
    ExperimentConfig c = small_config(StudyKind::Manufactured, {4, 8});
    c.seed = 1234567;
    const ErrorTable t = run_manufactured_study(c);
    const json j = json::parse(render_json(t));
    EXPECT_EQ(j["config"]["seed"].get<std::uint64_t>(), 1234567u);
    EXPECT_EQ(j["config"]["levels"].get<std::vector<int>>(), c.levels);
    ASSERT_EQ(j["rows"].size(), t.rows.size());
    EXPECT_TRUE(j["rows"][0]["eoc"].is_null());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        EXPECT_EQ(j["rows"][i]["h"].get<double>(), t.rows[i].h);
        EXPECT_EQ(j["rows"][i]["dt"].get<double>(), t.rows[i].dt);
        EXPECT_EQ(j["rows"][i]["error_l2"].get<double>(), t.rows[i].error_l2);
    }
    EXPECT_EQ(j["rows"][1]["eoc"].get<double>(), *t.rows[1].eoc);
    EXPECT_TRUE(j["aborted"].is_null());
}

TEST(Report, WritesFileAndReportsIoFailure) {
    const auto dir = std::filesystem::temp_directory_path() / "nafem_report_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "table.csv").string();
    ErrorTable t;
    t.rows.push_back({8, 0.125, 0.001, 1.0, 0.5, std::nullopt});
    emit_report(t, OutputFormat::Csv, path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), render_csv(t));
    EXPECT_THROW(emit_report(t, OutputFormat::Csv, (dir / "missing" / "x.csv").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST(Determinism, SameConfigSameReport) {
    ExperimentConfig c = small_config(StudyKind::Nonsmooth, {4, 8});
    c.beta = 1.0;
    c.teval_rule = TEvalRule::HSquared;
    EXPECT_EQ(render_json(run_nonsmooth_study(c)), render_json(run_nonsmooth_study(c)));
    c.seed = 43;
    const std::string other = render_json(run_nonsmooth_study(c));
    c.seed = 42;
    EXPECT_NE(other, render_json(run_nonsmooth_study(c)));
}
