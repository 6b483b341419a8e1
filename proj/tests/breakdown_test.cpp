#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lsmix/breakdown.hpp"
#include "lsmix/calibrate.hpp"
#include "support.hpp"

using namespace lsmix;
using lsmix::testing::standard_data;
using lsmix::testing::two_nsd;

namespace {
constexpr double kSigma0 = 0.025;
constexpr double kB = 0.0117;
}  // namespace

TEST(Contaminate, MergesAndTracksPositions) {
  const Dataset d({1.0, 2.0, 3.0});
  const std::vector<double> add{2.0, 0.5, 10.0};
  const auto c = contaminate(d, add);
  EXPECT_EQ(c.augmented.size(), 6u);
  EXPECT_EQ(c.original_positions, (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(c.added_positions, (std::vector<std::size_t>{3, 0, 5}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(c.augmented[c.original_positions[i]], d[i]);
}

TEST(ImproperNoiseCertificate, StandardDataValues) {
  const Dataset d = standard_data();
  const auto r = improper_noise_certificate(d, 2, Family::normal(), kB, kSigma0, FitConfig{});
  EXPECT_NEAR(r.fits[0].loglik, -119.7, 0.5);
  EXPECT_NEAR(r.rows[0].value, -111.7, 0.5);
  EXPECT_NEAR(r.rows[1].value, -122.4, 0.5);
  EXPECT_TRUE(r.rows[0].holds);
  EXPECT_FALSE(r.rows[1].holds);
  EXPECT_EQ(r.g_star, 1);
  EXPECT_EQ(r.bound, Rational(1, 51));
  EXPECT_EQ(r.bound_text(), "1/51");
  EXPECT_EQ(r.rows.size(), 100u);
  EXPECT_NEAR(r.f_max, normal_pdf(0.0) / kSigma0, 1e-12);
  // Values are reproducible from the stored fit.
  EXPECT_EQ(r.rows[4].value, improper_noise_rhs(r.fits[1].params, d, 5, r.f_max));
}

TEST(ImproperNoiseCertificate, WideSeparation) {
  const auto r = improper_noise_certificate(two_nsd(0, 50, 1), 2, Family::normal(), kB, kSigma0, FitConfig{});
  EXPECT_EQ(r.g_star, 7);
  EXPECT_EQ(r.breakdown_at_least_text(), "8/58");
}

TEST(ImproperNoiseCertificate, HypothesisAndArguments) {
  const Dataset d = standard_data();
  EXPECT_THROW(improper_noise_certificate(d, 2, Family::normal(), 20.0, kSigma0, FitConfig{}), HypothesisViolated);
  EXPECT_THROW(improper_noise_certificate(d, 1, Family::normal(), kB, kSigma0, FitConfig{}), std::invalid_argument);
}

TEST(BicCertificate, StandardDataValues) {
  const auto r = bic_no_breakdown_certificate(standard_data(), Family::normal(), NoiseRegime::none(), kSigma0,
                                              FitConfig{});
  EXPECT_EQ(r.s, 2u);
  EXPECT_NEAR(r.rows[0].value, 3.37, 0.2);
  EXPECT_NEAR(r.rows[1].value, -7.56, 0.2);
  EXPECT_EQ(r.bound, Rational(1, 51));
  for (std::size_t k = 1; k < r.rows.size(); ++k) EXPECT_LT(r.rows[k].value, r.rows[k - 1].value);
}

TEST(BicCertificate, FromLogliksMatchesFormula) {
  const std::vector<double> ll{-120.0, -100.0, -98.0};
  const auto r = bic_no_breakdown_from_logliks(ll, 40, 10);
  for (const auto& row : r.rows) {
    ASSERT_EQ(row.per_r.size(), 2u);
    for (std::size_t k = 1; k <= 2; ++k) {
      const double n = 40, g = static_cast<double>(row.g);
      const double want = ll[2] - ll[k - 1] - 0.5 * (5 * g + 3 * 3 - 3 * static_cast<double>(k) + 2 * n) *
                                                  std::log(n + g) + n * std::log(n);
      EXPECT_NEAR(row.per_r[k - 1], want, 1e-9);
    }
    EXPECT_EQ(row.holds, row.value > 0);
  }
  EXPECT_THROW(bic_no_breakdown_from_logliks(std::vector<double>{-1.0}, 5, 3), std::invalid_argument);
}

TEST(BicCertificate, RangeNoiseHypothesis) {
  // f_max = phi(0)/sigma0 is far below 1/range for a tiny range.
  const Dataset tiny({0.0, 1e-4, 2e-4, 3e-4});
  EXPECT_THROW(bic_no_breakdown_certificate(tiny, Family::normal(), NoiseRegime::range_for(tiny), 1.0, FitConfig{},
                                            0, 2),
               HypothesisViolated);
  EXPECT_THROW(bic_no_breakdown_certificate(tiny, Family::normal(), NoiseRegime::improper(0.1), 1.0, FitConfig{}),
               std::invalid_argument);
}

TEST(GrossOutlier, ClosedFormMatchesDirectScan) {
  const std::vector<double> ll{-109.0, -100.0};
  const auto r = bic_gross_outlier_from_logliks(ll, 50);
  EXPECT_EQ(r.g_star, 354);
  auto breaks = [&](std::int64_t g) { return ll[1] - ll[0] - 1.5 * std::log(50.0 + static_cast<double>(g)) < 0; };
  std::int64_t scan = 1;
  while (!breaks(scan)) ++scan;
  EXPECT_EQ(scan, r.g_star);
  EXPECT_EQ(r.bound, Rational(354, 404));
}

TEST(GrossOutlier, SmallMarginGivesSmallG) {
  const double margin = 1.5 * std::log(50.0) + 0.01;
  const std::vector<double> ll{-100.0 - margin, -100.0};
  const auto r = bic_gross_outlier_from_logliks(ll, 50);
  EXPECT_GE(r.g_star, 1);
  EXPECT_LE(r.g_star, 2);
}

TEST(GrossOutlier, UsesTightestLowerOrder) {
  // s = 3: r = 2 gives the smaller exponent, so it decides g.
  const std::vector<double> ll{-130.0, -104.0, -100.0};
  const auto r = bic_gross_outlier_from_logliks(ll, 20);
  const double t = std::min(2 * 30.0 / 6, 2 * 4.0 / 3);
  EXPECT_EQ(r.g_star, static_cast<std::int64_t>(std::floor(std::exp(t))) + 1 - 20 > 0
                          ? static_cast<std::int64_t>(std::floor(std::exp(t))) + 1 - 20
                          : 1);
}

TEST(GrossOutlier, SaturatesInsteadOfOverflowing) {
  const std::vector<double> ll{-5000.0, -100.0};
  const auto r = bic_gross_outlier_from_logliks(ll, 50);
  EXPECT_TRUE(r.saturated);
  EXPECT_GT(r.g_star, 0);
}

TEST(GrossOutlier, StandardDataNeedsHugeContamination) {
  const auto r = bic_gross_outlier_breakdown(standard_data(), Family::normal(), NoiseRegime::none(), kSigma0,
                                             FitConfig{});
  EXPECT_GT(r.g_star, 650000);
}

TEST(OutlierThreshold, NormalWithBracketCheck) {
  const auto r = empirical_outlier_threshold(standard_data(), 2, Family::normal(), NoiseRegime::none(), kSigma0,
                                             FitConfig{});
  ASSERT_TRUE(r.search->threshold);
  EXPECT_GE(*r.search->threshold, 13.0);
  EXPECT_LE(*r.search->threshold, 18.0);
  EXPECT_TRUE(r.search->bracket_verified);
  EXPECT_FALSE(r.search->trace.empty());
}

TEST(OutlierThreshold, ReportsMissingThresholdBelowCeiling) {
  ThresholdOptions opt;
  opt.ceiling = 100.0;
  const auto r = empirical_outlier_threshold(standard_data(), 2, Family::student_t(1), NoiseRegime::none(), kSigma0,
                                             FitConfig{}, opt);
  EXPECT_FALSE(r.search->threshold);
  for (const auto& t : r.search->trace) EXPECT_FALSE(t.broken);
}

TEST(ContaminationProbe, ThreeOutliersBreakTwoDoNot) {
  const Dataset d = standard_data();
  const auto noise = NoiseRegime::improper(kB);
  const std::vector<double> two(2, 50.0), three(3, 50.0);
  const auto r2 = empirical_contamination_probe(d, two, Family::normal(), noise, kSigma0, FitConfig{}, FixedOrder{2});
  const auto r3 = empirical_contamination_probe(d, three, Family::normal(), noise, kSigma0, FitConfig{}, FixedOrder{2});
  EXPECT_FALSE(r2.probe->parameter_breakdown);
  EXPECT_EQ(r2.probe->classification.broken, 0u);
  EXPECT_TRUE(r3.probe->parameter_breakdown);
  EXPECT_GE(r3.probe->classification.broken, 1u);
}

// Gross outliers (at a million times the range) below a certified g never
// produce parameter breakdown of the improper-noise fit.
TEST(ContaminationProbe, ConsistentWithImproperCertificate) {
  for (const Dataset& d : {standard_data(), two_nsd(0, 50, 1)}) {
    const auto cert = improper_noise_certificate(d, 2, Family::normal(), kB, kSigma0, FitConfig{});
    ASSERT_GE(cert.g_star, 1);
    for (std::int64_t g = 1; g <= cert.g_star; ++g) {
      const std::vector<double> add(static_cast<std::size_t>(g), d.max() + 1e6 * d.range());
      const auto r = empirical_contamination_probe(d, add, Family::normal(), NoiseRegime::improper(kB), kSigma0,
                                                   FitConfig{}, FixedOrder{2});
      EXPECT_FALSE(r.probe->parameter_breakdown) << "g=" << g;
    }
  }
}

TEST(ContaminationProbe, DuplicatedPointsBreakTheSmallCluster) {
  const Dataset d = two_nsd(0, 5, 1, 45, 5);
  const auto small = nsd_values(5, 1, 5);
  const std::vector<double> six{small[0], small[0], small[3], small[3], small[4], small[4]};
  const auto r = empirical_contamination_probe(d, six, Family::normal(), NoiseRegime::none(), kSigma0, FitConfig{},
                                               EstimatedOrder{});
  const auto& p = *r.probe;
  EXPECT_EQ(p.original_order, 2u);
  EXPECT_EQ(p.contaminated_order, 5u);
  EXPECT_FALSE(p.parameter_breakdown);
  ASSERT_EQ(p.classification.clusters.size(), 2u);
  EXPECT_FALSE(p.classification.clusters[0].broke);
  EXPECT_TRUE(p.classification.clusters[1].broke);
  EXPECT_EQ(p.classification.clusters[1].gamma_star, Rational(4, 7));
}

TEST(Matching, BoxMonotoneInSize) {
  MixtureParams orig = lsmix::testing::mixture(Family::normal(), {{0.5, 0.0, 1.0}, {0.5, 5.0, 1.0}});
  MixtureParams moved = lsmix::testing::mixture(Family::normal(), {{0.5, 0.2, 1.5}, {0.5, 8.0, 0.2}});
  EXPECT_TRUE(components_matchable(orig, moved, MatchBox{5.0, 10.0}));
  EXPECT_FALSE(components_matchable(orig, moved, MatchBox{2.0, 10.0}));
  EXPECT_FALSE(components_matchable(orig, moved, MatchBox{5.0, 4.0}));
  // One contaminated component cannot serve two originals.
  MixtureParams merged = lsmix::testing::mixture(Family::normal(), {{0.5, 2.5, 1.5}, {0.5, 100.0, 0.1}});
  EXPECT_FALSE(components_matchable(orig, merged, MatchBox{5.0, 10.0}));
  for (double loc = 0.5; loc <= 5.0; loc += 0.5) {
    for (double fac = 1.5; fac <= 10.0; fac += 0.5) {
      if (!components_matchable(orig, moved, MatchBox{loc, fac})) {
        EXPECT_FALSE(components_matchable(orig, moved, MatchBox{loc * 0.9, fac}));
        EXPECT_FALSE(components_matchable(orig, moved, MatchBox{loc, fac * 0.9}));
      }
    }
  }
}

TEST(DivergingOutliers, ExtraComponentsFollowTheOutliers) {
  const Dataset d = standard_data();
  for (double y : {1e3, 1e6}) {
    for (std::size_t s : {2u, 3u}) {
      const std::size_t r = s - 1;
      std::vector<double> add;
      for (std::size_t k = 1; k <= r; ++k) add.push_back(std::pow(y, static_cast<double>(k)));
      const auto c = contaminate(d, add);
      const auto f = fit(c.augmented, s, Family::normal(), NoiseRegime::none(), FitConfig{});
      const auto& comps = f.params.components;
      EXPECT_GE(comps[0].location, d.min());
      EXPECT_LE(comps[0].location, d.max());
      for (std::size_t k = 1; k <= r; ++k) EXPECT_NEAR(comps[k].location, add[k - 1], 1e-6 * add[k - 1]);
    }
  }
}

TEST(Separation, SingleGroupIsExact) {
  const std::vector<Dataset> g{Dataset(nsd_values(0, 1, 10))};
  const auto res = separation_decomposition_check(g, 0.0, 2, Family::normal(), kSigma0, FitConfig{});
  EXPECT_LT(res.deviation, 1e-8);
}

TEST(Separation, DeviationVanishesWithGap) {
  const std::vector<Dataset> g{Dataset({0.0, 10.0, 20.0, 30.0, 40.0}), Dataset({0.0, 5.0, 20.0, 35.0, 40.0})};
  double prev = kInf;
  for (double gap : {10.0, 100.0, 1000.0}) {
    const auto res = separation_decomposition_check(g, gap, 2, Family::normal(), kSigma0, FitConfig{});
    EXPECT_LT(res.deviation, prev) << "gap=" << gap;
    prev = res.deviation;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Separation, BestSplitOfThreeComponents) {
  const std::vector<Dataset> g{Dataset(nsd_values(0, 1, 25)), Dataset(nsd_values(0, 1, 25))};
  const auto res = separation_decomposition_check(g, 1e4, 3, Family::normal(), kSigma0, FitConfig{});
  EXPECT_EQ(res.splits.size(), 2u);
  EXPECT_TRUE(res.best_split == (std::vector<std::size_t>{1, 2}) || res.best_split == (std::vector<std::size_t>{2, 1}));
  EXPECT_LT(res.deviation, 1e-6);
}
