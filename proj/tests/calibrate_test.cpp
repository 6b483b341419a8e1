#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "lsmix/calibrate.hpp"
#include "lsmix/select.hpp"

using namespace lsmix;

TEST(Nsd, SmallCasesAndSymmetry) {
  EXPECT_EQ(nsd_values(0, 1, 1), std::vector<double>{0.0});
  const auto three = nsd_values(0, 1, 3);
  const boost::math::normal ref;
  EXPECT_NEAR(three[0], boost::math::quantile(ref, 0.25), 1e-9);
  EXPECT_NEAR(three[0], -0.67449, 1e-5);
  EXPECT_EQ(three[1], 0.0);
  for (std::size_t n : {2u, 25u, 50u, 101u}) {
    for (double a : {0.0, 5.0, -3.25}) {
      const auto x = nsd_values(a, 2.0, n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i] + x[n - 1 - i], 2 * a, 1e-9);
      EXPECT_TRUE(std::is_sorted(x.begin(), x.end()));
    }
  }
  const auto base = nsd_values(0, 1, 25);
  const auto shifted = nsd_values(5, 1, 25);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(shifted[i], base[i] + 5.0, 1e-12);
  const auto wide = nsd_values(0, 4, 7);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(wide[i], 2.0 * boost::math::quantile(ref, (i + 1) / 8.0), 1e-9);
  }
  EXPECT_THROW(nsd_values(0, 0, 3), std::invalid_argument);
  EXPECT_THROW(nsd_values(0, 1, 0), std::invalid_argument);
}

TEST(AlphaOutlier, Values) {
  EXPECT_NEAR(alpha_outlier_position(50, 0.95).alpha, 1 - std::pow(0.05, 1.0 / 50), 1e-15);
  EXPECT_NEAR(alpha_outlier_position(50, 0.95).alpha, 0.05815, 1e-5);
  EXPECT_NEAR(alpha_outlier_position(1, 0.3).alpha, 0.3, 1e-15);
  EXPECT_GT(alpha_outlier_position(50, 1e-6).position, alpha_outlier_position(50, 1e-3).position);
  const auto a = alpha_outlier_position(50, 0.05);
  EXPECT_NEAR(normal_cdf(a.position), 1 - a.alpha / 2, 1e-12);
  EXPECT_THROW(alpha_outlier_position(50, 1.0), std::invalid_argument);
}

TEST(DeriveTuning, NormalValues) {
  const auto t = derive_tuning(5.0, 0.005, Family::normal());
  EXPECT_DOUBLE_EQ(t.scale_floor, 0.025);
  EXPECT_NEAR(t.noise_level, 0.0117, 5e-5);
  const auto one = derive_tuning(1.0, 0.005, Family::normal());
  EXPECT_NEAR(one.noise_level, normal_pdf(-1.959963984540054), 1e-12);
  EXPECT_NEAR(one.noise_level, 0.05844, 1e-5);
  EXPECT_DOUBLE_EQ(derive_tuning(10.0, 0.005, Family::normal()).scale_floor, 2 * t.scale_floor);
  const auto t3 = derive_tuning(2.0, 0.01, Family::student_t(3));
  EXPECT_NEAR(t3.noise_level, density(Family::student_t(3), 2.0 * -3.182446305284263, 0, 2.0), 1e-9);
  EXPECT_THROW(derive_tuning(0.0, 0.01, Family::normal()), std::invalid_argument);
}

TEST(Calibrate, ReproducesStandardTuning) {
  const auto c = calibrate(50, 0.95, 5.0, Family::normal(), FitConfig{});
  EXPECT_NEAR(c.scale_floor, 0.025, 0.005);
  EXPECT_NEAR(c.noise_level, 0.0117, 0.0005);
  EXPECT_LT(c.residual, 0.1);
  EXPECT_DOUBLE_EQ(c.scale_floor, c.c0 * c.sigma_max);
  EXPECT_LT(c.noise_level, normal_pdf(0.0) / c.scale_floor);
}

TEST(Calibrate, OneComponentCriterionIgnoresTheFloor) {
  const Dataset bench(calibration_benchmark(50, 0.95));
  double prev = 0.0;
  for (double c0 : {1e-5, 1e-3, 0.1, 0.5}) {
    FitConfig cfg;
    cfg.scale_floor = c0;
    const double l = fit(bench, 1, Family::normal(), NoiseRegime::none(), cfg).loglik;
    if (c0 != 1e-5) {
      EXPECT_DOUBLE_EQ(l, prev);
    }
    prev = l;
  }
}

TEST(Calibrate, CoverageOfCalibratedFloor) {
  const auto c = calibrate_c0(50, 0.95, Family::normal(), FitConfig{});
  FitConfig cfg;
  cfg.scale_floor = c.c0;
  const Dataset clean(nsd_values(0, 1, 50));
  EXPECT_EQ(select_order(clean, Family::normal(), NoiseRegime::none(), cfg, Criterion::bic, 3).chosen, 1u);
  auto values = nsd_values(0, 1, 49);
  values.push_back(2.0 * c.outlier_position);
  EXPECT_EQ(select_order(Dataset(values), Family::normal(), NoiseRegime::none(), cfg, Criterion::bic, 3).chosen, 2u);
}
