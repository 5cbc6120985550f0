#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bookend/meta_core.hpp"
#include "oracles.hpp"
#include "test_data.hpp"

using namespace bookend;

TEST(InverseLogit, KnownValues) {
  EXPECT_DOUBLE_EQ(inverse_logit(0.0), 0.5);
  EXPECT_NEAR(inverse_logit(-2.0), 0.11920, 5e-6);
  EXPECT_NEAR(inverse_logit(-0.5), 0.37754, 5e-6);
  // Rounds to the 0.12 quoted for non-smokers.
  EXPECT_NEAR(inverse_logit(-2.0), 0.12, 5e-3);
}

TEST(InverseLogit, StableAtExtremes) {
  EXPECT_EQ(inverse_logit(800.0), 1.0);
  EXPECT_EQ(inverse_logit(-800.0), 0.0);
  EXPECT_FALSE(std::isnan(inverse_logit(-1000.0)));
  EXPECT_NEAR(log_inverse_logit(-800.0), -800.0, 1e-12);
  EXPECT_NEAR(log_inverse_logit(800.0), 0.0, 1e-12);
}

TEST(InverseLogit, RejectsNonFinite) {
  EXPECT_THROW(inverse_logit(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  EXPECT_THROW(inverse_logit(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST(InverseLogit, MonotoneAndInverseOfLogit) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
  for (int i = 0; i < 10000; ++i) {
    const double p = u(gen);
    EXPECT_NEAR(inverse_logit(logit(p)), p, 1e-12);
  }
  double prev = 0.0;
  for (double x = -30.0; x <= 30.0; x += 0.25) {
    const double v = inverse_logit(x);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(ExactMixtureOr, LungDiseaseExample) {
  const AttenuationReport r = exact_mixture_or({0.0, -2.0, -0.5, 0.5, 1000});
  const auto ref = oracle::mixture_or(0.0L, -2.0L, -0.5L, 0.5L);
  EXPECT_NEAR(r.log_or_mix, static_cast<double>(ref.log_or), 1e-12);
  EXPECT_NEAR(r.log_or_mix, -0.42506, 5e-6);
  EXPECT_NEAR(r.or_mix, 0.65373, 5e-6);
  ASSERT_TRUE(r.attenuation_factor.has_value());
  EXPECT_NEAR(*r.attenuation_factor, 0.850, 5e-4);
  EXPECT_NEAR(r.p11, 0.5, 1e-15);
  EXPECT_NEAR(r.p21, 0.11920, 5e-6);
}

TEST(ExactMixtureOr, NullEffectCollapses) {
  for (double mu2 : {-4.0, -1.0, 0.0, 3.0}) {
    const AttenuationReport r = exact_mixture_or({0.7, mu2, 0.0, 0.5, 100});
    EXPECT_NEAR(r.or_mix, 1.0, 1e-12);
    EXPECT_FALSE(r.attenuation_factor.has_value());
  }
}

TEST(ExactMixtureOr, DegenerateMixtureIsPopulationOne) {
  const AttenuationReport r = exact_mixture_or({0.0, -2.0, -0.5, 1.0, 1000});
  EXPECT_NEAR(r.log_or_mix, -0.5, 1e-12);
  EXPECT_NEAR(*r.attenuation_factor, 1.0, 1e-12);
}

TEST(ExactMixtureOr, RejectsBadMixingShare) {
  EXPECT_THROW(exact_mixture_or({0.0, -2.0, -0.5, 1.5, 10}), std::invalid_argument);
  EXPECT_THROW(exact_mixture_or({0.0, -2.0, -0.5, -0.1, 10}), std::invalid_argument);
}

TEST(ScenarioParams, RegressionAliases) {
  const ScenarioParams p{0.0, -2.0, -0.5, 0.5, 1000};
  EXPECT_EQ(p.beta0(), 0.0);
  EXPECT_EQ(p.beta1(), -2.0);
  EXPECT_EQ(p.beta2(), -0.5);
}

// Property: the OR of (sigma(mu), sigma(mu + d)) is exp(d) for any mu, d.
TEST(MetaCoreProperties, HomogeneousOddsRatioIdentity) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mu(-6.0, 6.0);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 5000; ++i) {
    const double m = mu(gen);
    const double e = d(gen);
    const double p1 = inverse_logit(m);
    const double p2 = inverse_logit(m + e);
    const double odds_ratio = (p2 / (1.0 - p2)) / (p1 / (1.0 - p1));
    EXPECT_NEAR(odds_ratio, std::exp(e), 1e-12 * std::max(1.0, std::exp(e)));
  }
}

TEST(MetaCoreProperties, AttenuationBounds) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> w(0.01, 0.99);
  std::uniform_real_distribution<double> gap(0.1, 6.0);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::uniform_real_distribution<double> mu(-3.0, 3.0);
  std::bernoulli_distribution sign(0.5);
  for (int i = 0; i < 5000; ++i) {
    double effect = d(gen);
    if (std::abs(effect) < 1e-3) effect = 0.5;
    const double mu1 = mu(gen);
    const double mu2 = mu1 + (sign(gen) ? 1.0 : -1.0) * gap(gen);
    const AttenuationReport r = exact_mixture_or({mu1, mu2, effect, w(gen), 100});
    ASSERT_TRUE(r.attenuation_factor);
    EXPECT_GT(*r.attenuation_factor, 0.0);
    EXPECT_LT(*r.attenuation_factor, 1.0);
    EXPECT_LT(std::abs(r.log_or_mix), std::abs(effect));
    EXPECT_GE(r.p_mix_control, std::min(r.p11, r.p21));
    EXPECT_LE(r.p_mix_control, std::max(r.p11, r.p21));
    EXPECT_GE(r.p_mix_active, std::min(r.p12, r.p22));
    EXPECT_LE(r.p_mix_active, std::max(r.p12, r.p22));
  }
}

TEST(MetaCoreProperties, AttenuationGrowsWithBaselineGap) {
  double prev = 1.0;
  for (double gap : {0.5, 1.0, 2.0, 3.0, 4.0}) {
    const double f = *exact_mixture_or({0.0, -gap, -0.5, 0.5, 100}).attenuation_factor;
    EXPECT_LE(f, prev) << "gap " << gap;
    prev = f;
  }
}

TEST(MetaCoreProperties, BoundaryCollapse) {
  const auto factor = [](double mu2, double w) { return *exact_mixture_or({0.0, mu2, -0.5, w, 100}).attenuation_factor; };
  EXPECT_NEAR(factor(-2.0, 1e-7), 1.0, 1e-5);
  EXPECT_NEAR(factor(-2.0, 1.0 - 1e-7), 1.0, 1e-5);
  EXPECT_NEAR(factor(-1e-6, 0.5), 1.0, 1e-6);
  EXPECT_GT(factor(-2.0, 0.01), factor(-2.0, 0.2));
}

TEST(NaiveAverage, KnownValues) {
  const std::vector<double> paper{-0.500, -0.500, -0.425};
  EXPECT_NEAR(naive_average_log_or(paper), -0.475, 1e-12);
  const std::vector<double> one{-0.5};
  EXPECT_DOUBLE_EQ(naive_average_log_or(one), -0.5);
  const std::vector<double> exact{-0.500, -0.500, -0.42506};
  EXPECT_NEAR(naive_average_log_or(exact), -0.47502, 5e-6);
  EXPECT_THROW(naive_average_log_or(std::vector<double>{}), std::invalid_argument);
}

TEST(ObservedLogOr, TableOneRows) {
  const Dataset data = testdata::table1();
  const auto effects = observed_effects(data);
  ASSERT_EQ(effects.size(), 3u);
  const double expected[3][2] = {{-0.57, 0.09}, {-0.42, 0.15}, {-0.34, 0.10}};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(effects[i].estimate.log_or, expected[i][0], 0.005);
    EXPECT_NEAR(effects[i].estimate.se, expected[i][1], 0.005);
    EXPECT_FALSE(effects[i].corrected);
    EXPECT_FALSE(effects[i].degenerate);
  }
}

TEST(ObservedLogOr, IdenticalArmsGiveZero) {
  const ArmData c{"s", Treatment::Control, 37, 120};
  const ArmData a{"s", Treatment::Active, 37, 120};
  EXPECT_DOUBLE_EQ(observed_log_or(c, a).estimate.log_or, 0.0);
}

TEST(ObservedLogOr, ZeroCellCorrection) {
  const ArmData c{"s", Treatment::Control, 0, 50};
  const ArmData a{"s", Treatment::Active, 5, 50};
  const StudyEffect e = observed_log_or(c, a);
  EXPECT_TRUE(e.corrected);
  EXPECT_FALSE(e.degenerate);
  EXPECT_NEAR(e.estimate.log_or, std::log(5.5 / 45.5) - std::log(0.5 / 50.5), 1e-12);
  EXPECT_NEAR(e.estimate.se, std::sqrt(1 / 0.5 + 1 / 50.5 + 1 / 5.5 + 1 / 45.5), 1e-12);
}

TEST(ObservedLogOr, DegenerateStudiesExcludedFromPool) {
  const Dataset data({{"a", Treatment::Control, 10, 100},
                      {"a", Treatment::Active, 5, 100},
                      {"z", Treatment::Control, 0, 100},
                      {"z", Treatment::Active, 0, 100},
                      {"f", Treatment::Control, 100, 100},
                      {"f", Treatment::Active, 100, 100}});
  const auto effects = observed_effects(data);
  EXPECT_FALSE(effects[0].degenerate);
  EXPECT_TRUE(effects[1].degenerate);
  EXPECT_TRUE(effects[2].degenerate);
  const PooledEstimate pooled = naive_pool(data);
  EXPECT_DOUBLE_EQ(pooled.log_or, effects[0].estimate.log_or);
}

TEST(InverseVariancePool, TableOne) {
  const Dataset data = testdata::table1();
  std::vector<PooledEstimate> est;
  for (const auto& e : observed_effects(data)) est.push_back(e.estimate);
  const PooledEstimate pooled = inverse_variance_pool(est);
  // Hand-computed: sum(x / se^2) / sum(1 / se^2) over the three studies.
  EXPECT_NEAR(pooled.log_or, -0.457910, 5e-6);
  EXPECT_NEAR(pooled.se, 0.061801, 5e-6);
  EXPECT_NEAR(pooled.ci95().lower, pooled.log_or - 1.96 * pooled.se, 1e-15);
}

TEST(InverseVariancePool, TrivialCases) {
  const PooledEstimate e{-0.3, 0.2};
  const std::vector<PooledEstimate> one{e};
  EXPECT_DOUBLE_EQ(inverse_variance_pool(one).log_or, -0.3);
  EXPECT_DOUBLE_EQ(inverse_variance_pool(one).se, 0.2);
  const std::vector<PooledEstimate> two{e, e};
  EXPECT_NEAR(inverse_variance_pool(two).log_or, -0.3, 1e-15);
  EXPECT_NEAR(inverse_variance_pool(two).se, 0.2 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(inverse_variance_pool(std::vector<PooledEstimate>{}), std::invalid_argument);
  EXPECT_THROW(inverse_variance_pool(std::vector<PooledEstimate>{{0.1, 0.0}}), std::invalid_argument);
}

TEST(Dataset, Validation) {
  EXPECT_THROW(Dataset({{"a", Treatment::Control, 1, 10}}), std::invalid_argument);
  EXPECT_THROW(Dataset({{"a", Treatment::Control, 11, 10}, {"a", Treatment::Active, 1, 10}}),
               std::invalid_argument);
  EXPECT_THROW(Dataset({{"a", Treatment::Control, 1, 10},
                        {"a", Treatment::Active, 1, 10},
                        {"a", Treatment::Active, 2, 10}}),
               std::invalid_argument);
  EXPECT_THROW(Dataset({{"a", Treatment::Control, 0, 0}, {"a", Treatment::Active, 0, 0}}),
               std::invalid_argument);
  EXPECT_NO_THROW(Dataset({{"a", Treatment::Control, 0, 0}, {"a", Treatment::Active, 0, 0}}, EmptyArms::Allow));

  const Dataset data = testdata::table1();
  EXPECT_EQ(data.study_count(), 3u);
  EXPECT_EQ(data.study_index("3"), 2u);
  EXPECT_THROW(data.study_index("9"), std::out_of_range);
  EXPECT_EQ(data.studies()[0].control.events, 514);
}

TEST(EmpiricalLogit, CorrectsZeroCells) {
  EXPECT_NEAR(empirical_logit({"a", Treatment::Control, 514, 1000}), std::log(514.0 / 486.0), 1e-15);
  EXPECT_NEAR(empirical_logit({"a", Treatment::Control, 0, 10}), std::log(0.5 / 10.5), 1e-15);
  EXPECT_NEAR(empirical_logit({"a", Treatment::Control, 0, 0}), 0.0, 1e-15);
}
