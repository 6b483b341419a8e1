#pragma once

// Normal standard datasets, alpha-outlier positions and the choice of the
// scale floor and the improper noise level.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsmix/em.hpp"
#include "lsmix/numeric.hpp"
#include "lsmix/select.hpp"

namespace lsmix {

/// The n Normal(a, var) quantiles at i/(n+1), i = 1..n.
inline std::vector<double> nsd_values(double a, double var, std::size_t n) {
  if (n < 1) throw std::invalid_argument("nsd: n must be >= 1");
  if (!(var > 0.0)) throw std::invalid_argument("nsd: variance must be > 0");
  const double sd = std::sqrt(var);
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) {
    out[i - 1] = a + sd * normal_quantile(static_cast<double>(i) / static_cast<double>(n + 1));
  }
  // Exact symmetry about a; the quantile function is odd only up to rounding.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double half = 0.5 * (out[n - 1 - i] - out[i]);
    out[i] = a - half;
    out[n - 1 - i] = a + half;
  }
  if (n % 2 == 1) out[n / 2] = a;
  return out;
}

inline Dataset nsd(double a, double var, std::size_t n) { return Dataset(nsd_values(a, var, n)); }

struct AlphaOutlier {
  double alpha = 0.0;
  double position = 0.0;  // upper boundary of the alpha-outlier region of N(0, 1)
};

/// alpha_n = 1 - (1 - p)^(1/n) and the region boundary Phi^-1(1 - alpha_n / 2).
inline AlphaOutlier alpha_outlier_position(std::size_t n, double p) {
  if (n < 1) throw std::invalid_argument("alpha_outlier_position: n must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("alpha_outlier_position: p must lie in (0, 1)");
  const double alpha = -std::expm1(std::log1p(-p) / static_cast<double>(n));
  return {alpha, normal_quantile(1.0 - alpha / 2.0)};
}

struct CalibrationStep {
  double c0 = 0.0;
  double criterion_gap = 0.0;  // C(2) - C(1)
};

struct C0Search {
  double c0 = 0.0;
  double residual = 0.0;  // |C(1) - C(2)| at c0
  double outlier_alpha = 0.0;
  double outlier_position = 0.0;
  std::vector<CalibrationStep> trace;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Benchmark: a (0,1)-NSD of n - 1 points plus one outlier at the boundary
/// of the outlier region whose occurrence probability among n clean points
/// is 1 - p.
inline std::vector<double> calibration_benchmark(std::size_t n, double p) {
  const AlphaOutlier out = alpha_outlier_position(n, 1.0 - p);
  auto values = nsd_values(0.0, 1.0, n - 1);
  values.push_back(out.position);
  return values;
}

/// Scale ratio c0 at which BIC is indifferent between one and two components
/// on the calibration benchmark, by bisection on log c0 over [1e-6, 1].
inline C0Search calibrate_c0(std::size_t n, double p, const Family& fam, FitConfig cfg) {
  if (n < 3) throw std::invalid_argument("calibrate_c0: n must be >= 3");
  const AlphaOutlier out = alpha_outlier_position(n, 1.0 - p);
  const Dataset bench(calibration_benchmark(n, p));
  C0Search search;
  search.outlier_alpha = out.alpha;
  search.outlier_position = out.position;
  auto gap = [&](double c0) {
    cfg.scale_floor = c0;
    const auto fits = fit_orders(bench, 2, fam, NoiseRegime::none(), cfg);
    const double c1 = criterion_value(fits[0].loglik, free_parameters(1, false), n, Criterion::bic);
    const double c2 = criterion_value(fits[1].loglik, free_parameters(2, false), n, Criterion::bic);
    search.trace.push_back({c0, c2 - c1});
    return c2 - c1;
  };
  double lo = std::log(1e-6);
  double hi = 0.0;
  const double g_lo = gap(std::exp(lo));
  const double g_hi = gap(std::exp(hi));
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    throw CalibrationError("calibrate_c0: no sign change of C(2) - C(1) on [1e-6, 1] (gaps " +
                           std::to_string(g_lo) + ", " + std::to_string(g_hi) + ")");
  }
  // The gap is positive for small c0 (two components win) and negative above.
  while (hi - lo > std::log1p(1e-3)) {
    const double mid = 0.5 * (lo + hi);
    if (gap(std::exp(mid)) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  search.c0 = std::exp(0.5 * (lo + hi));
  search.residual = std::fabs(gap(search.c0));
  return search;
}

struct CalibrationResult {
  double c0 = 0.0;
  double scale_floor = 0.0;  // c0 * sigma_max
  double noise_level = 0.0;  // density of f_{0, sigma_max} at its 0.025-quantile
  double alpha_n = 0.0;      // 1 - (1 - p)^(1/n)
  double p = 0.0;
  double sigma_max = 0.0;
  std::size_t n = 0;
  double outlier_alpha = 0.0;
  double outlier_position = 0.0;
  double residual = 0.0;
  std::vector<CalibrationStep> trace;
};

inline CalibrationResult derive_tuning(double sigma_max, double c0, const Family& fam) {
  if (!(sigma_max > 0.0)) throw std::invalid_argument("derive_tuning: sigma_max must be > 0");
  if (!(c0 > 0.0)) throw std::invalid_argument("derive_tuning: c0 must be > 0");
  CalibrationResult r;
  r.c0 = c0;
  r.sigma_max = sigma_max;
  r.scale_floor = c0 * sigma_max;
  r.noise_level = density(fam, sigma_max * fam.quantile(0.025), 0.0, sigma_max);
  return r;
}

/// Full tuning: calibrate c0 on the benchmark, then scale by sigma_max.
inline CalibrationResult calibrate(std::size_t n, double p, double sigma_max, const Family& fam,
                                   const FitConfig& cfg) {
  C0Search search = calibrate_c0(n, p, fam, cfg);
  CalibrationResult r = derive_tuning(sigma_max, search.c0, fam);
  r.n = n;
  r.p = p;
  r.alpha_n = alpha_outlier_position(n, p).alpha;
  r.outlier_alpha = search.outlier_alpha;
  r.outlier_position = search.outlier_position;
  r.residual = search.residual;
  r.trace = std::move(search.trace);
  return r;
}

}  // namespace lsmix
