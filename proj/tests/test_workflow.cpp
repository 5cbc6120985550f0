#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "bookend/simulate.hpp"
#include "bookend/workflow.hpp"
#include "test_data.hpp"

using namespace bookend;

namespace {

FitResult fe_fit(const Dataset& data, std::uint64_t seed = 20240611) {
  SamplerConfig cfg;
  cfg.seed = seed;
  return fit(data, ModelSpec{}, cfg);
}

Dataset simulated(double mu2, std::int64_t n, std::uint64_t seed) {
  ScenarioParams p;
  p.mu2 = mu2;
  p.arm_size = n;
  return simulate(SimDesign::three_study(p, seed));
}

// Normal approximation to the FE posterior mean of each baseline: the
// precision-weighted blend of the control logit and the active logit minus
// the inverse-variance pooled effect.
std::vector<double> approx_fe_baselines(const Dataset& data) {
  const auto logit_var = [](const ArmData& a) {
    const double r = static_cast<double>(a.events);
    const double f = static_cast<double>(a.size - a.events);
    return std::pair{std::log(r / f), 1.0 / r + 1.0 / f};
  };
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : data.studies()) {
    const auto [lc, vc] = logit_var(s.control);
    const auto [la, va] = logit_var(s.active);
    num += (la - lc) / (vc + va);
    den += 1.0 / (vc + va);
  }
  const double d = num / den;
  std::vector<double> out;
  for (const auto& s : data.studies()) {
    const auto [lc, vc] = logit_var(s.control);
    const auto [la, va] = logit_var(s.active);
    out.push_back((lc / vc + (la - d) / va) / (1.0 / vc + 1.0 / va));
  }
  return out;
}

StudyBaseline baseline(std::string id, double mu, std::int64_t size) { return {std::move(id), mu, mu, size}; }

}  // namespace

TEST(Spread, Table1IsFlagged) {
  const Dataset data = testdata::table1();
  const SpreadAssessment a = assess_baseline_spread(data, fe_fit(data));
  ASSERT_EQ(a.baselines.size(), 3u);
  const std::vector<double> approx = approx_fe_baselines(data);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.baselines[j].mu_hat, approx[j], 0.02) << j;
  EXPECT_NEAR(a.baselines[0].empirical_logit, std::log(514.0 / 486.0), 1e-12);
  EXPECT_NEAR(a.baselines[1].empirical_logit, std::log(118.0 / 882.0), 1e-12);
  EXPECT_NEAR(a.baselines[1].mu_hat, std::log(118.0 / 882.0), 0.05);
  EXPECT_NEAR(a.spread, 2.0, 0.1);
  EXPECT_TRUE(a.flag);
  EXPECT_DOUBLE_EQ(a.threshold, 1.0);
}

TEST(Spread, SmallSpreadNotFlagged) {
  const Dataset data({{"a", Treatment::Control, 5000, 10000},
                      {"a", Treatment::Active, 4000, 10000},
                      {"b", Treatment::Control, 3775, 10000},
                      {"b", Treatment::Active, 2900, 10000}});
  const SpreadAssessment a = assess_baseline_spread(data, fe_fit(data));
  EXPECT_NEAR(a.spread, 0.0 - std::log(3775.0 / 6225.0), 0.05);
  EXPECT_FALSE(a.flag);
  EXPECT_TRUE(assess_baseline_spread(data, fe_fit(data), 0.3).flag);
}

TEST(Spread, IdenticalStudiesNotFlagged) {
  const Dataset data({{"a", Treatment::Control, 300, 1000},
                      {"a", Treatment::Active, 250, 1000},
                      {"b", Treatment::Control, 300, 1000},
                      {"b", Treatment::Active, 250, 1000},
                      {"c", Treatment::Control, 300, 1000},
                      {"c", Treatment::Active, 250, 1000}});
  const SpreadAssessment a = assess_baseline_spread(data, fe_fit(data));
  EXPECT_GE(a.spread, 0.0);
  EXPECT_LT(a.spread, 0.02);
  EXPECT_FALSE(a.flag);
}

TEST(Spread, NeedsStandardFitAndTwoStudies) {
  const Dataset one({{"a", Treatment::Control, 3, 10}, {"a", Treatment::Active, 4, 10}});
  EXPECT_THROW(assess_baseline_spread(one, fe_fit(one)), std::invalid_argument);
  const Dataset data = testdata::table1();
  ModelSpec b;
  b.kind = ModelKind::Bookend;
  b.bookend_low = "2";
  b.bookend_high = "1";
  EXPECT_THROW(assess_baseline_spread(data, fit(data, b, SamplerConfig{})), std::invalid_argument);
}

TEST(Bookends, Table1) {
  const Dataset data = testdata::table1();
  const BookendPair p = identify_bookends(data, fe_fit(data));
  EXPECT_EQ(p.low, "2");
  EXPECT_EQ(p.high, "1");
}

TEST(Bookends, TiesGoToLargerStudies) {
  const BookendPair p = identify_bookends({baseline("a", -1.0, 100), baseline("b", -1.0, 200), baseline("c", -1.0, 300)});
  EXPECT_EQ(p.low, "c");
  EXPECT_EQ(p.high, "b");
  const BookendPair q = identify_bookends({baseline("z", 0.0, 100), baseline("y", 0.0, 100), baseline("x", 0.0, 100)});
  EXPECT_EQ(q.low, "x");
  EXPECT_EQ(q.high, "y");
}

TEST(Bookends, FiveStudyExtremes) {
  const BookendPair p = identify_bookends({baseline("s1", -1.0, 100), baseline("s2", 1.0, 100),
                                           baseline("s3", -3.0, 100), baseline("s4", 0.0, 100),
                                           baseline("s5", -2.0, 100)});
  EXPECT_EQ(p.low, "s3");
  EXPECT_EQ(p.high, "s2");
}

TEST(Bookends, NeedThreeStudies) {
  EXPECT_THROW(identify_bookends({baseline("a", 0.0, 10), baseline("b", 1.0, 10)}), std::invalid_argument);
}

TEST(Bookends, InvariantToStudyOrderAndSeed) {
  const Dataset data = testdata::table1();
  const auto& arms = data.arms();
  const Dataset reordered({arms[4], arms[5], arms[2], arms[3], arms[0], arms[1]});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const BookendPair p = identify_bookends(reordered, fe_fit(reordered, seed));
    EXPECT_EQ(p.low, "2");
    EXPECT_EQ(p.high, "1");
  }
}

TEST(Sensitivity, Table1) {
  FitResult fe;
  FitResult bk;
  const DiagnosticsReport r =
      sensitivity_compare(testdata::table1(), SamplerConfig{}, {}, Execution::Parallel, &fe, &bk);
  EXPECT_NEAR(r.d_standard.mean, -0.458, 0.02);
  EXPECT_NEAR(r.d_bookend.mean, -0.492, 0.02);
  EXPECT_NEAR(r.discrepancy, 0.034, 0.02);
  EXPECT_DOUBLE_EQ(r.discrepancy, std::abs(r.d_standard.mean - r.d_bookend.mean));
  EXPECT_DOUBLE_EQ(r.discrepancy_threshold, 0.5 * r.d_standard.sd);
  EXPECT_EQ(r.flag_discrepancy, r.discrepancy > r.discrepancy_threshold);
  EXPECT_TRUE(r.flag_spread);
  EXPECT_EQ(r.bookend_low, "2");
  EXPECT_EQ(r.bookend_high, "1");
  ASSERT_EQ(r.w_summaries.size(), 1u);
  EXPECT_EQ(r.w_summaries[0].study_id, "3");
  EXPECT_FALSE(r.w_summaries[0].boundary_warning);
  EXPECT_EQ(fe.effect(), r.d_standard);
  EXPECT_EQ(bk.effect(), r.d_bookend);
}

TEST(Sensitivity, NoGapNoDiscrepancy) {
  const DiagnosticsReport r = sensitivity_compare(simulated(0.0, 1000, 3), SamplerConfig{});
  EXPECT_FALSE(r.flag_spread);
  EXPECT_FALSE(r.flag_discrepancy);
  EXPECT_LT(r.discrepancy, r.discrepancy_threshold);
}

TEST(Sensitivity, WideGapRecoversTruth) {
  const DiagnosticsReport r = sensitivity_compare(simulated(-4.0, 100000, 4), SamplerConfig{});
  EXPECT_EQ(r.bookend_low, "2");
  EXPECT_EQ(r.bookend_high, "1");
  EXPECT_NEAR(r.d_bookend.mean, -0.5, 0.03);
  EXPECT_LT(std::abs(r.d_standard.mean), 0.5);
  EXPECT_TRUE(r.flag_discrepancy);
}

TEST(Sensitivity, BoundaryShareWarns) {
  const Dataset data({{"hi", Treatment::Control, 50000, 100000},
                      {"hi", Treatment::Active, 37754, 100000},
                      {"lo", Treatment::Control, 11920, 100000},
                      {"lo", Treatment::Active, 7586, 100000},
                      {"mx", Treatment::Control, 11920, 100000},
                      {"mx", Treatment::Active, 7586, 100000}});
  WorkflowOptions opt;
  opt.bookends = BookendPair{"lo", "hi"};
  const DiagnosticsReport r = sensitivity_compare(data, SamplerConfig{}, opt);
  ASSERT_EQ(r.w_summaries.size(), 1u);
  EXPECT_GT(r.w_summaries[0].posterior.mean, 0.95);
  EXPECT_TRUE(r.w_summaries[0].boundary_warning);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Sensitivity, StandardIsAttenuatedAcrossSweepGrid) {
  SweepOptions opt;
  ScenarioParams p;
  p.arm_size = 100000;
  opt.design_template = SimDesign::three_study(p, 1);
  opt.replications = 2;
  opt.seed = 12;
  const auto rows = bias_sweep(sweep_grid({2.0, 4.0}, {0.25, 0.5, 0.75}, {-0.5, 0.5}), opt);
  int checked = 0;
  for (const auto& row : rows) {
    ASSERT_TRUE(row.attenuation_factor);
    if (*row.attenuation_factor >= 0.95) continue;
    ++checked;
    EXPECT_LT(std::abs(row.fe_mean), std::abs(row.bookend_mean)) << row.cell.gap << " " << row.cell.w;
    EXPECT_GT(row.fe_mean * row.cell.d, 0.0);
  }
  EXPECT_GT(checked, 0);
}

TEST(Report, JsonRoundTrip) {
  const DiagnosticsReport r = sensitivity_compare(testdata::table1(), SamplerConfig{});
  const nlohmann::json j = r;
  const DiagnosticsReport back = j.get<DiagnosticsReport>();
  EXPECT_TRUE(back == r);
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<DiagnosticsReport>(), r);

  ParameterSummary undefined{"c", 1.0, 0.0, 1.0, 1.0, 1.0, std::nullopt, std::nullopt};
  const nlohmann::json uj = undefined;
  EXPECT_TRUE(uj.at("rhat").is_null());
  EXPECT_EQ(uj.get<ParameterSummary>(), undefined);
}
