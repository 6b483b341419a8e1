#pragma once

// Breakdown certificates from fitted likelihoods and empirical contamination
// experiments (outlier thresholds, probes, separation decomposition).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lsmix/classify.hpp"
#include "lsmix/em.hpp"
#include "lsmix/numeric.hpp"
#include "lsmix/select.hpp"

namespace lsmix {

/// A theorem hypothesis such as f_max > b does not hold.
class HypothesisViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class ReportKind {
  improper_noise_cert,
  bic_no_break_cert,
  bic_gross_outlier_cert,
  empirical_outlier,
  empirical_inlier,
  classification_empirical
};

inline const char* to_string(ReportKind k) {
  switch (k) {
    case ReportKind::improper_noise_cert: return "improper_noise_cert";
    case ReportKind::bic_no_break_cert: return "bic_no_break_cert";
    case ReportKind::bic_gross_outlier_cert: return "bic_gross_outlier_cert";
    case ReportKind::empirical_outlier: return "empirical_outlier";
    case ReportKind::empirical_inlier: return "empirical_inlier";
    case ReportKind::classification_empirical: return "classification_empirical";
  }
  return "unknown";
}

struct CertificateRow {
  std::int64_t g = 0;
  /// Improper noise: RHS(g). BIC: min over r of the condition. Gross outlier: unused.
  double value = 0.0;
  /// Per r = 1..s-1: the BIC condition term, or L_{n,r} for the improper certificate.
  std::vector<double> per_r;
  bool holds = false;
};

struct ThresholdProbe {
  double y = 0.0;
  bool broken = false;
};

struct ThresholdSearch {
  std::optional<double> threshold;
  std::vector<ThresholdProbe> trace;
  /// Re-evaluation at 0.9 and 1.1 times the threshold agreed with monotonicity.
  bool bracket_verified = false;
  double ceiling = 0.0;
};

struct ProbeOutcome {
  std::size_t original_order = 0;
  std::size_t contaminated_order = 0;
  bool order_dropped = false;
  bool matching_found = false;
  bool parameter_breakdown = false;
  FitResult original_fit;
  FitResult contaminated_fit;
  Partition original_partition;
  Partition restricted_partition;
  BreakdownVerdict classification;
  std::vector<double> added;
};

struct BreakdownReport {
  ReportKind kind = ReportKind::improper_noise_cert;
  std::size_t n = 0;
  std::size_t s = 0;
  /// Largest certified g for certificates; smallest breaking g for the gross-outlier bound.
  std::int64_t g_star = 0;
  /// g_star / (n + g_star).
  Rational bound;
  /// (g_star + 1) / (n + g_star + 1): smallest breakdown point compatible with a certified g_star.
  Rational breakdown_at_least;
  /// The closed form for g_star overflowed and was clamped.
  bool saturated = false;
  std::vector<CertificateRow> rows;
  double f_max = 0.0;
  /// Fits of order 1..s the certificate values were computed from.
  std::vector<FitResult> fits;
  bool converged = true;
  std::optional<ThresholdSearch> search;
  std::optional<ProbeOutcome> probe;

  /// Unreduced "g/(n+g)" text, as bounds are usually quoted.
  [[nodiscard]] std::string bound_text() const {
    return std::to_string(g_star) + "/" + std::to_string(static_cast<std::int64_t>(n) + g_star);
  }
  [[nodiscard]] std::string breakdown_at_least_text() const {
    return std::to_string(g_star + 1) + "/" + std::to_string(static_cast<std::int64_t>(n) + g_star + 1);
  }
};

namespace detail {

inline void set_bounds(BreakdownReport& r) {
  const auto n = static_cast<std::int64_t>(r.n);
  r.bound = Rational(r.g_star, n + r.g_star);
  r.breakdown_at_least = Rational(r.g_star + 1, n + r.g_star + 1);
}

inline FitConfig with_floor(FitConfig cfg, double sigma0) {
  cfg.scale_floor = sigma0;
  return cfg;
}

inline bool all_converged(std::span<const FitResult> fits) {
  return std::all_of(fits.begin(), fits.end(), [](const FitResult& f) { return f.converged; });
}

inline double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace detail

inline double f_max(const Family& fam, double sigma0) { return std::exp(fam.log_peak()) / sigma0; }

/// Right-hand side of the improper-noise certificate at contamination g,
/// evaluated at the s-component fit.
inline double improper_noise_rhs(const MixtureParams& fit_s, const Dataset& data, std::int64_t g, double fmax) {
  if (fit_s.regime.kind != NoiseRegime::Kind::improper) {
    throw std::invalid_argument("improper_noise_rhs: fit must use the improper noise model");
  }
  const double n = static_cast<double>(data.size());
  const double gd = static_cast<double>(g);
  const double log_noise = std::log((fit_s.noise_weight + gd / n) * fit_s.regime.level);
  std::vector<double> terms(fit_s.order());
  CompensatedSum sum;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < fit_s.order(); ++j) {
      const auto& c = fit_s.components[j];
      terms[j] = c.weight > 0.0 ? std::log(c.weight) + log_density(fit_s.family, data[i], c.location, c.scale) : -kInf;
    }
    sum += detail::log_add(log_sum_exp(terms), log_noise);
  }
  sum += gd * log_noise;
  sum += (n + gd) * std::log(n / (n + gd));
  sum += -gd * std::log(fmax);
  return sum.value();
}

/// Improper-noise certificate from precomputed fits of order 1..s (improper model).
inline BreakdownReport improper_noise_certificate_from_fits(const Dataset& data, std::vector<FitResult> fits,
                                                            double sigma0, std::size_t g_max) {
  const std::size_t s = fits.size();
  if (s < 2) throw std::invalid_argument("improper_noise_certificate: needs s >= 2");
  const MixtureParams& top = fits.back().params;
  const double b = top.regime.level;
  BreakdownReport r;
  r.kind = ReportKind::improper_noise_cert;
  r.n = data.size();
  r.s = s;
  r.f_max = f_max(top.family, sigma0);
  if (!(r.f_max > b)) {
    throw HypothesisViolated("improper_noise_certificate: f_max = " + std::to_string(r.f_max) +
                             " does not exceed b = " + std::to_string(b));
  }
  double best_lower = -kInf;
  std::vector<double> lower;
  for (std::size_t k = 0; k + 1 < s; ++k) {
    lower.push_back(fits[k].loglik);
    best_lower = std::max(best_lower, fits[k].loglik);
  }
  for (std::size_t g = 1; g <= g_max; ++g) {
    CertificateRow row;
    row.g = static_cast<std::int64_t>(g);
    row.value = improper_noise_rhs(top, data, row.g, r.f_max);
    row.per_r = lower;
    row.holds = best_lower < row.value;
    if (row.holds) r.g_star = row.g;
    r.rows.push_back(std::move(row));
  }
  r.converged = detail::all_converged(fits);
  r.fits = std::move(fits);
  detail::set_bounds(r);
  return r;
}

/// g_max = 0 selects the default 2n.
inline BreakdownReport improper_noise_certificate(const Dataset& data, std::size_t s, const Family& fam, double b,
                                                  double sigma0, const FitConfig& cfg, std::size_t g_max = 0) {
  if (s < 2) throw std::invalid_argument("improper_noise_certificate: needs s >= 2");
  if (!(f_max(fam, sigma0) > b)) {
    throw HypothesisViolated("improper_noise_certificate: f_max does not exceed b");
  }
  auto fits = fit_orders(data, s, fam, NoiseRegime::improper(b), detail::with_floor(cfg, sigma0));
  return improper_noise_certificate_from_fits(data, std::move(fits), sigma0, g_max ? g_max : 2 * data.size());
}

/// Condition of the BIC no-breakdown certificate for one r < s.
inline double bic_condition(double l_s, double l_r, std::size_t s, std::size_t r, std::size_t n, std::int64_t g) {
  const double nd = static_cast<double>(n);
  const double gd = static_cast<double>(g);
  const double k = 5.0 * gd + 3.0 * static_cast<double>(s) - 3.0 * static_cast<double>(r) + 2.0 * nd;
  return l_s - l_r - 0.5 * k * std::log(nd + gd) + nd * std::log(nd);
}

/// BIC no-breakdown certificate from log-likelihoods L_{n,1..s}.
inline BreakdownReport bic_no_breakdown_from_logliks(std::span<const double> logliks, std::size_t n,
                                                     std::size_t g_max) {
  const std::size_t s = logliks.size();
  if (s < 2) throw std::invalid_argument("bic_no_breakdown_certificate: needs s >= 2");
  BreakdownReport r;
  r.kind = ReportKind::bic_no_break_cert;
  r.n = n;
  r.s = s;
  for (std::size_t g = 1; g <= g_max; ++g) {
    CertificateRow row;
    row.g = static_cast<std::int64_t>(g);
    row.value = kInf;
    for (std::size_t k = 1; k < s; ++k) {
      const double v = bic_condition(logliks[s - 1], logliks[k - 1], s, k, n, row.g);
      row.per_r.push_back(v);
      row.value = std::min(row.value, v);
    }
    row.holds = row.value > 0.0;
    if (row.holds) r.g_star = row.g;
    r.rows.push_back(std::move(row));
  }
  detail::set_bounds(r);
  return r;
}

namespace detail {

inline void check_range_hypothesis(const Dataset& data, const Family& fam, const NoiseRegime& regime, double sigma0,
                                   const char* who) {
  if (regime.kind == NoiseRegime::Kind::improper) {
    throw std::invalid_argument(std::string(who) + ": improper noise has no BIC certificate");
  }
  if (regime.kind == NoiseRegime::Kind::range_uniform && !(f_max(fam, sigma0) >= 1.0 / data.range())) {
    throw HypothesisViolated(std::string(who) + ": f_max < 1/(xmax - xmin)");
  }
}

/// Fits 1..s where s is the BIC-selected order unless given.
inline std::vector<FitResult> bic_fits(const Dataset& data, const Family& fam, const NoiseRegime& regime,
                                       const FitConfig& cfg, std::optional<std::size_t> s) {
  if (s) {
    if (*s < 2) throw std::invalid_argument("BIC certificate: needs s >= 2");
    return fit_orders(data, *s, fam, regime, cfg);
  }
  SelectionResult sel = select_order(data, fam, regime, cfg, Criterion::bic);
  if (sel.chosen < 2) throw std::invalid_argument("BIC certificate: BIC selects s = 1, no r < s");
  std::vector<FitResult> fits;
  for (std::size_t k = 0; k < sel.chosen; ++k) fits.push_back(std::move(sel.per_order[k].fit));
  return fits;
}

}  // namespace detail

/// BIC no-breakdown certificate; s defaults to the BIC-selected order.
inline BreakdownReport bic_no_breakdown_certificate(const Dataset& data, const Family& fam, const NoiseRegime& regime,
                                                    double sigma0, const FitConfig& cfg, std::size_t g_max = 0,
                                                    std::optional<std::size_t> s = std::nullopt) {
  detail::check_range_hypothesis(data, fam, regime, sigma0, "bic_no_breakdown_certificate");
  auto fits = detail::bic_fits(data, fam, regime, detail::with_floor(cfg, sigma0), s);
  std::vector<double> ll;
  for (const auto& f : fits) ll.push_back(f.loglik);
  BreakdownReport r = bic_no_breakdown_from_logliks(ll, data.size(), g_max ? g_max : 2 * data.size());
  r.f_max = f_max(fam, sigma0);
  r.converged = detail::all_converged(fits);
  r.fits = std::move(fits);
  return r;
}

/// Smallest g with min_r [L_s - L_r - 1.5 (s - r) log(n + g)] < 0.
inline BreakdownReport bic_gross_outlier_from_logliks(std::span<const double> logliks, std::size_t n) {
  const std::size_t s = logliks.size();
  if (s < 2) throw std::invalid_argument("bic_gross_outlier_breakdown: needs s >= 2");
  BreakdownReport r;
  r.kind = ReportKind::bic_gross_outlier_cert;
  r.n = n;
  r.s = s;
  CertificateRow row;
  double t = kInf;
  for (std::size_t k = 1; k < s; ++k) {
    const double v = 2.0 * (logliks[s - 1] - logliks[k - 1]) / (3.0 * static_cast<double>(s - k));
    row.per_r.push_back(v);
    t = std::min(t, v);
  }
  row.value = t;
  // Capped so that n + g stays representable in the Rational bound.
  constexpr double kCap = 1e18;
  const double nd = static_cast<double>(n);
  double g = 1.0;
  if (t > std::log(kCap)) {
    g = kCap;
    r.saturated = true;
  } else {
    g = std::max(1.0, std::floor(std::exp(t)) + 1.0 - nd);
  }
  r.g_star = static_cast<std::int64_t>(g);
  // exp/floor rounding: step to the exact smallest g.
  auto breaks = [&](std::int64_t gg) {
    return std::log(nd + static_cast<double>(gg)) > t;
  };
  if (!r.saturated) {
    while (r.g_star > 1 && breaks(r.g_star - 1)) --r.g_star;
    while (!breaks(r.g_star)) ++r.g_star;
  }
  row.g = r.g_star;
  row.holds = true;
  r.rows.push_back(std::move(row));
  detail::set_bounds(r);
  return r;
}

inline BreakdownReport bic_gross_outlier_breakdown(const Dataset& data, const Family& fam, const NoiseRegime& regime,
                                                   double sigma0, const FitConfig& cfg,
                                                   std::optional<std::size_t> s = std::nullopt) {
  detail::check_range_hypothesis(data, fam, regime, sigma0, "bic_gross_outlier_breakdown");
  auto fits = detail::bic_fits(data, fam, regime, detail::with_floor(cfg, sigma0), s);
  std::vector<double> ll;
  for (const auto& f : fits) ll.push_back(f.loglik);
  BreakdownReport r = bic_gross_outlier_from_logliks(ll, data.size());
  r.f_max = f_max(fam, sigma0);
  r.converged = detail::all_converged(fits);
  r.fits = std::move(fits);
  return r;
}

/// Original data merged with added points; originals precede added points on ties.
struct Contaminated {
  Dataset augmented;
  std::vector<std::size_t> original_positions;
  std::vector<std::size_t> added_positions;
};

inline Contaminated contaminate(const Dataset& original, std::span<const double> added) {
  std::vector<std::pair<double, std::size_t>> tagged;  // (value, source index; originals first)
  tagged.reserve(original.size() + added.size());
  for (std::size_t i = 0; i < original.size(); ++i) tagged.emplace_back(original[i], i);
  for (std::size_t i = 0; i < added.size(); ++i) tagged.emplace_back(added[i], original.size() + i);
  std::stable_sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> values(tagged.size());
  std::vector<std::size_t> orig(original.size());
  std::vector<std::size_t> add(added.size());
  for (std::size_t k = 0; k < tagged.size(); ++k) {
    values[k] = tagged[k].first;
    const std::size_t src = tagged[k].second;
    if (src < original.size()) {
      orig[src] = k;
    } else {
      add[src - original.size()] = k;
    }
  }
  return {Dataset(std::move(values)), std::move(orig), std::move(add)};
}

/// Outlier breakdown at fixed s: all original points share one label and the
/// appended point carries a different label that no original point has.
inline bool outlier_breaks(const FitResult& fit_aug, const Contaminated& c) {
  const Partition p = classify(fit_aug.params, c.augmented);
  const int first = p.label(c.original_positions.front());
  if (first == kNoiseLabel) return false;
  for (std::size_t pos : c.original_positions) {
    if (p.label(pos) != first) return false;
  }
  for (std::size_t pos : c.added_positions) {
    const int l = p.label(pos);
    if (l == kNoiseLabel || l == first) return false;
  }
  return true;
}

struct ThresholdOptions {
  double start_offset = 10.0;
  double rel_tol = 0.01;
  double ceiling = 1e10;
};

/// Smallest single outlier position that breaks the s-component fit, by
/// doubling the offset above xmax and bisecting.
inline BreakdownReport empirical_outlier_threshold(const Dataset& data, std::size_t s, const Family& fam,
                                                   const NoiseRegime& regime, double sigma0, const FitConfig& cfg,
                                                   const ThresholdOptions& opt = {}) {
  if (s < 2) throw std::invalid_argument("empirical_outlier_threshold: needs s >= 2");
  const FitConfig fc = detail::with_floor(cfg, sigma0);
  ThresholdSearch search;
  search.ceiling = opt.ceiling;
  bool all_conv = true;
  auto broken_at = [&](double y, bool record) {
    const double pt[] = {y};
    const Contaminated c = contaminate(data, pt);
    const FitResult f = fit(c.augmented, s, fam, regime, fc);
    all_conv = all_conv && f.converged;
    const bool b = outlier_breaks(f, c);
    if (record) search.trace.push_back({y, b});
    return b;
  };
  double lo = data.max();
  double hi = 0.0;
  bool found = false;
  for (double off = opt.start_offset; data.max() + off <= opt.ceiling; off *= 2.0) {
    const double y = data.max() + off;
    if (broken_at(y, true)) {
      hi = y;
      found = true;
      break;
    }
    lo = y;
  }
  if (found) {
    while ((hi - lo) > opt.rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (broken_at(mid, true)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    search.threshold = hi;
    search.bracket_verified = !broken_at(0.9 * hi, false) && broken_at(1.1 * hi, false);
  }
  BreakdownReport r;
  r.kind = ReportKind::empirical_outlier;
  r.n = data.size();
  r.s = s;
  r.g_star = 1;
  r.f_max = f_max(fam, sigma0);
  r.converged = all_conv;
  r.search = std::move(search);
  detail::set_bounds(r);
  return r;
}

struct FixedOrder {
  std::size_t s = 2;
};
struct EstimatedOrder {
  Criterion criterion = Criterion::bic;
  std::size_t s_max = kDefaultMaxOrder;
};
using ProbeMode = std::variant<FixedOrder, EstimatedOrder>;

/// Concrete compact set for "original-like" components.
struct MatchBox {
  double location_sds = 5.0;
  double scale_factor = 10.0;
};

/// Whether every positive-weight original component can be matched to a
/// distinct positive-weight component of `contaminated` inside the box.
inline bool components_matchable(const MixtureParams& original, const MixtureParams& contaminated,
                                 const MatchBox& box = {}) {
  std::vector<std::size_t> left;
  for (std::size_t i = 0; i < original.order(); ++i) {
    if (original.components[i].weight > 0.0) left.push_back(i);
  }
  const std::size_t m = contaminated.order();
  auto fits = [&](std::size_t i, std::size_t j) {
    const auto& o = original.components[i];
    const auto& c = contaminated.components[j];
    return c.weight > 0.0 && std::fabs(c.location - o.location) <= box.location_sds * o.scale &&
           c.scale >= o.scale / box.scale_factor && c.scale <= o.scale * box.scale_factor;
  };
  std::vector<std::ptrdiff_t> owner(m, -1);
  // Kuhn's augmenting paths.
  std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t i, std::vector<bool>& seen) {
    for (std::size_t j = 0; j < m; ++j) {
      if (seen[j] || !fits(i, j)) continue;
      seen[j] = true;
      if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), seen)) {
        owner[j] = static_cast<std::ptrdiff_t>(i);
        return true;
      }
    }
    return false;
  };
  for (std::size_t i : left) {
    std::vector<bool> seen(m, false);
    if (!augment(i, seen)) return false;
  }
  return true;
}

/// Refit after adding points and report parameter and classification breakdown.
inline BreakdownReport empirical_contamination_probe(const Dataset& data, std::span<const double> added,
                                                     const Family& fam, const NoiseRegime& regime, double sigma0,
                                                     const FitConfig& cfg, const ProbeMode& mode,
                                                     const MatchBox& box = {}) {
  if (added.empty()) throw std::invalid_argument("empirical_contamination_probe: no added points");
  const FitConfig fc = detail::with_floor(cfg, sigma0);
  const Contaminated c = contaminate(data, added);
  ProbeOutcome out;
  out.added.assign(added.begin(), added.end());
  if (const auto* fixed = std::get_if<FixedOrder>(&mode)) {
    out.original_fit = fit(data, fixed->s, fam, regime, fc);
    out.contaminated_fit = fit(c.augmented, fixed->s, fam, regime, fc);
  } else {
    const auto& est = std::get<EstimatedOrder>(mode);
    out.original_fit = select_order(data, fam, regime, fc, est.criterion, est.s_max).best();
    out.contaminated_fit = select_order(c.augmented, fam, regime, fc, est.criterion, est.s_max).best();
  }
  auto positive = [](const MixtureParams& p) {
    return static_cast<std::size_t>(std::count_if(p.components.begin(), p.components.end(),
                                                  [](const Component& k) { return k.weight > 0.0; }));
  };
  out.original_order = positive(out.original_fit.params);
  out.contaminated_order = positive(out.contaminated_fit.params);
  out.order_dropped = out.contaminated_order < out.original_order;
  out.matching_found = components_matchable(out.original_fit.params, out.contaminated_fit.params, box);
  out.parameter_breakdown = out.order_dropped || !out.matching_found;
  out.original_partition = classify(out.original_fit.params, data);
  out.restricted_partition = induced_partition(out.contaminated_fit, c.augmented, c.original_positions);
  out.classification = classification_breakdown_check(out.original_partition, out.restricted_partition);

  BreakdownReport r;
  r.kind = ReportKind::classification_empirical;
  r.n = data.size();
  r.s = out.original_order;
  r.g_star = static_cast<std::int64_t>(added.size());
  r.f_max = f_max(fam, sigma0);
  r.converged = out.original_fit.converged && out.contaminated_fit.converged;
  r.probe = std::move(out);
  detail::set_bounds(r);
  return r;
}

struct SeparationResult {
  double deviation = 0.0;
  double union_loglik = 0.0;
  double split_value = 0.0;
  std::vector<std::size_t> best_split;
  /// Every composition (q_1..q_h) with its value.
  std::vector<std::pair<std::vector<std::size_t>, double>> splits;
};

/// |L_{n,s}(shifted union) - max over q of sum_k [L_{n_k,q_k}(group k) + n_k log(n_k/n)]|,
/// with group k shifted by k * gap.
inline SeparationResult separation_decomposition_check(std::span<const Dataset> groups, double gap, std::size_t s,
                                                       const Family& fam, double sigma0, const FitConfig& cfg) {
  const std::size_t h = groups.size();
  if (h < 1) throw std::invalid_argument("separation_decomposition_check: no groups");
  if (s < h) throw std::invalid_argument("separation_decomposition_check: needs s >= number of groups");
  const FitConfig fc = detail::with_floor(cfg, sigma0);
  std::vector<double> all;
  for (std::size_t k = 0; k < h; ++k) {
    for (double x : groups[k].values()) all.push_back(x + static_cast<double>(k) * gap);
  }
  const Dataset joined(all);
  const double n = static_cast<double>(joined.size());
  const std::size_t q_top = s - h + 1;
  std::vector<std::vector<double>> part(h);  // part[k][q - 1]
  for (std::size_t k = 0; k < h; ++k) {
    const std::size_t top = std::min(q_top, groups[k].distinct());
    const double nk = static_cast<double>(groups[k].size());
    for (const auto& f : fit_orders(groups[k], top, fam, NoiseRegime::none(), fc)) {
      part[k].push_back(f.loglik + nk * std::log(nk / n));
    }
  }
  SeparationResult res;
  res.union_loglik = fit(joined, s, fam, NoiseRegime::none(), fc).loglik;
  res.split_value = -kInf;
  std::vector<std::size_t> q(h, 1);
  std::function<void(std::size_t, std::size_t)> enumerate = [&](std::size_t k, std::size_t left) {
    if (k + 1 == h) {
      if (left < 1 || left > part[k].size()) return;
      q[k] = left;
      double v = 0.0;
      for (std::size_t i = 0; i < h; ++i) v += part[i][q[i] - 1];
      res.splits.emplace_back(q, v);
      if (v > res.split_value) {
        res.split_value = v;
        res.best_split = q;
      }
      return;
    }
    for (std::size_t qk = 1; qk <= part[k].size() && qk + (h - k - 1) <= left; ++qk) {
      q[k] = qk;
      enumerate(k + 1, left - qk);
    }
  };
  enumerate(0, s);
  if (res.best_split.empty()) throw std::invalid_argument("separation_decomposition_check: no feasible split");
  res.deviation = std::fabs(res.union_loglik - res.split_value);
  return res;
}

}  // namespace lsmix
