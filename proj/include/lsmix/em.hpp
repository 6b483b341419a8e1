#pragma once

// Constrained EM for location-scale mixtures under a lower scale bound,
// with a deterministic multi-start search for the global maximizer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lsmix/model.hpp"
#include "lsmix/numeric.hpp"

namespace lsmix {

struct FitConfig {
  double scale_floor = 0.025;
  std::size_t restarts = 10;
  std::size_t max_iters = 2000;
  double rel_tol = 1e-10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (!(scale_floor > 0.0) || !std::isfinite(scale_floor)) {
      throw std::invalid_argument("FitConfig: scale floor must be > 0");
    }
    if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("FitConfig: rel_tol must be > 0");
  }
};

/// Posterior component memberships, n rows by s (+1) columns. When the
/// mixture carries a noise term, column 0 is the noise column.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(std::size_t rows, std::size_t components, bool noise)
      : rows_(rows), components_(components), noise_(noise), p_(rows * (components + (noise ? 1 : 0)), 0.0) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return components_ + (noise_ ? 1 : 0); }
  [[nodiscard]] std::size_t components() const noexcept { return components_; }
  [[nodiscard]] bool has_noise() const noexcept { return noise_; }
  [[nodiscard]] std::size_t component_column(std::size_t j) const noexcept { return j + (noise_ ? 1 : 0); }

  [[nodiscard]] double operator()(std::size_t i, std::size_t col) const noexcept { return p_[i * cols() + col]; }
  double& operator()(std::size_t i, std::size_t col) noexcept { return p_[i * cols() + col]; }

  [[nodiscard]] std::vector<double> column(std::size_t col) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, col);
    return out;
  }

  [[nodiscard]] double column_sum(std::size_t col) const noexcept {
    CompensatedSum s;
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, col);
    return s.value();
  }

 private:
  std::size_t rows_ = 0;
  std::size_t components_ = 0;
  bool noise_ = false;
  std::vector<double> p_;
};

struct LocationScale {
  double location = 0.0;
  double scale = 1.0;
};

struct FitResult {
  MixtureParams params;
  double loglik = -kInf;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t restart_index = 0;
  std::string start_kind;
};

/// Result of one EM run from a fixed start.
struct EmRun {
  MixtureParams params;
  double loglik = -kInf;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

namespace detail {

// Fills `resp` and returns the log-likelihood of `params`.
inline double e_step_into(const MixtureParams& params, const Dataset& data, Responsibilities& resp) {
  const std::size_t s = params.order();
  const bool noise = params.regime.active();
  if (resp.rows() != data.size() || resp.components() != s || resp.has_noise() != noise) {
    resp = Responsibilities(data.size(), s, noise);
  }
  std::vector<double> log_w(s);
  std::vector<double> log_sigma(s);
  for (std::size_t j = 0; j < s; ++j) {
    const auto& c = params.components[j];
    log_w[j] = c.weight > 0.0 ? std::log(c.weight) : -kInf;
    log_sigma[j] = std::log(c.scale);
  }
  const double log_noise_w = params.noise_weight > 0.0 ? std::log(params.noise_weight) : -kInf;
  const std::size_t m = resp.cols();
  std::vector<double> terms(m);
  CompensatedSum total;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data[i];
    if (noise) terms[0] = log_noise_w + params.regime.log_density(x);
    for (std::size_t j = 0; j < s; ++j) {
      const auto& c = params.components[j];
      terms[resp.component_column(j)] =
          log_w[j] == -kInf ? -kInf
                            : log_w[j] + params.family.log_pdf((x - c.location) / c.scale) - log_sigma[j];
    }
    const double lse = log_sum_exp(terms);
    if (!std::isfinite(lse)) throw std::runtime_error("e_step: data point with zero mixture density");
    total += lse;
    for (std::size_t col = 0; col < m; ++col) resp(i, col) = std::exp(terms[col] - lse);
  }
  return total.value();
}

}  // namespace detail

/// Posterior probabilities of component membership for every data point.
inline Responsibilities e_step(const MixtureParams& params, const Dataset& data) {
  params.validate();
  Responsibilities resp;
  detail::e_step_into(params, data, resp);
  return resp;
}

/// Maximizes sum_i w_i log((1/sigma) f((x_i - a)/sigma)) subject to
/// sigma >= floor. Returns nothing when the total weight vanishes.
///
/// The Normal case is closed form. Other families use the IRLS
/// majorization (rho(sqrt(t)) is concave in t), so every location and scale
/// update increases the objective; the scale update of the surrogate is
/// unimodal, hence clamping at the floor gives the constrained maximum.
inline std::optional<LocationScale> weighted_ml(std::span<const double> w, const Dataset& data,
                                                const Family& fam, double floor,
                                                std::optional<LocationScale> warm = std::nullopt) {
  if (w.size() != data.size()) throw std::invalid_argument("weighted_ml: weight/data size mismatch");
  CompensatedSum wsum;
  CompensatedSum wx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    wsum += w[i];
    wx += w[i] * data[i];
  }
  const double total = wsum.value();
  if (!(total > 0.0)) return std::nullopt;

  const double mean = std::clamp(wx.value() / total, data.min(), data.max());
  auto weighted_sd = [&](double a, auto&& u_of) {
    CompensatedSum ss;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double d = data[i] - a;
      ss += w[i] * u_of(i) * d * d;
    }
    return std::sqrt(std::max(0.0, ss.value()) / total);
  };
  if (fam.kind() == FamilyKind::normal) {
    const double sd = weighted_sd(mean, [](std::size_t) { return 1.0; });
    return LocationScale{mean, std::max(floor, sd)};
  }

  LocationScale cur = warm.value_or(LocationScale{mean, weighted_sd(mean, [](std::size_t) { return 1.0; })});
  cur.location = std::clamp(cur.location, data.min(), data.max());
  cur.scale = std::max(floor, cur.scale);
  constexpr int kMaxInner = 200;
  constexpr double kTol = 1e-12;
  for (int it = 0; it < kMaxInner; ++it) {
    CompensatedSum wu;
    CompensatedSum wux;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double u = w[i] * fam.irls_weight((data[i] - cur.location) / cur.scale);
      wu += u;
      wux += u * data[i];
    }
    const double a = std::clamp(wux.value() / wu.value(), data.min(), data.max());
    const double sigma = std::max(
        floor, weighted_sd(a, [&](std::size_t i) { return fam.irls_weight((data[i] - a) / cur.scale); }));
    const bool done = std::fabs(a - cur.location) <= kTol * (std::fabs(a) + cur.scale) &&
                      std::fabs(sigma - cur.scale) <= kTol * cur.scale;
    cur = {a, sigma};
    if (done) break;
  }
  return cur;
}

/// Proportions from responsibility column means; locations and scales from
/// weighted_ml per component. Components with vanishing proportion are
/// frozen at (x_1, floor) with proportion 0.
inline MixtureParams m_step(const Responsibilities& resp, const Dataset& data, const Family& fam,
                            const NoiseRegime& regime, double floor, const MixtureParams* warm = nullptr) {
  if (resp.rows() != data.size() || resp.has_noise() != regime.active()) {
    throw std::invalid_argument("m_step: responsibilities do not match data/regime");
  }
  constexpr double kDegenerate = 1e-12;
  const auto n = static_cast<double>(data.size());
  MixtureParams out;
  out.family = fam;
  out.regime = regime.bound_to(data);
  out.scale_floor = floor;
  out.components.resize(resp.components());
  CompensatedSum total;
  if (resp.has_noise()) {
    out.noise_weight = resp.column_sum(0) / n;
    total += out.noise_weight;
  }
  for (std::size_t j = 0; j < resp.components(); ++j) {
    const std::size_t col = resp.component_column(j);
    const double pi = resp.column_sum(col) / n;
    std::optional<LocationScale> warm_ls;
    if (warm != nullptr && warm->order() == resp.components()) {
      warm_ls = LocationScale{warm->components[j].location, warm->components[j].scale};
    }
    std::optional<LocationScale> ls;
    if (pi >= kDegenerate) ls = weighted_ml(resp.column(col), data, fam, floor, warm_ls);
    if (ls) {
      out.components[j] = {pi, ls->location, ls->scale};
      total += pi;
    } else {
      out.components[j] = {0.0, data.min(), floor};
    }
  }
  const double t = total.value();
  out.noise_weight /= t;
  for (auto& c : out.components) c.weight /= t;
  return out;
}

/// EM iterations from `start` until the relative log-likelihood gain drops
/// below cfg.rel_tol or cfg.max_iters M-steps were taken.
inline EmRun run_em(const Dataset& data, MixtureParams start, const FitConfig& cfg, bool keep_trace = false,
                    std::size_t max_iters = 0) {
  if (max_iters == 0) max_iters = cfg.max_iters;
  start.regime = start.regime.bound_to(data);
  start.scale_floor = cfg.scale_floor;
  start.validate();
  EmRun run;
  Responsibilities resp;
  MixtureParams cur = std::move(start);
  double l_prev = detail::e_step_into(cur, data, resp);
  if (keep_trace) run.trace.push_back(l_prev);
  for (std::size_t it = 1; it <= max_iters; ++it) {
    MixtureParams next = m_step(resp, data, cur.family, cur.regime, cfg.scale_floor, &cur);
    const double l_next = detail::e_step_into(next, data, resp);
    if (keep_trace) run.trace.push_back(l_next);
    cur = std::move(next);
    run.iterations = it;
    if ((l_next - l_prev) / (std::fabs(l_prev) + 1.0) < cfg.rel_tol) {
      run.converged = true;
      l_prev = l_next;
      break;
    }
    l_prev = l_next;
  }
  cur.canonicalize();
  run.loglik = log_likelihood(cur, data);
  run.params = std::move(cur);
  return run;
}

/// Compactness check: every component with positive weight has
/// its location inside the data range and its scale inside
/// [floor, floor * f(0) / f(range / floor)].
inline bool within_compact_box(const MixtureParams& params, const Dataset& data, double slack = 1e-9) {
  const double floor = params.scale_floor;
  const double log_upper = std::log(floor) + params.family.log_peak() - params.family.log_pdf(data.range() / floor);
  for (const auto& c : params.components) {
    if (c.weight <= 0.0) continue;
    const double pad = slack * (1.0 + data.range());
    if (c.location < data.min() - pad || c.location > data.max() + pad) return false;
    if (c.scale < floor * (1.0 - slack)) return false;
    if (std::log(c.scale) > log_upper + slack) return false;
  }
  return true;
}

namespace detail {

struct Start {
  MixtureParams params;
  std::string kind;
};

inline MixtureParams blank_params(const Dataset& data, const Family& fam, const NoiseRegime& regime,
                                  double floor) {
  MixtureParams p;
  p.family = fam;
  p.regime = regime.bound_to(data);
  p.scale_floor = floor;
  return p;
}

inline void normalize_weights(MixtureParams& p) {
  CompensatedSum t;
  t += p.noise_weight;
  for (const auto& c : p.components) t += c.weight;
  const double total = t.value();
  p.noise_weight /= total;
  for (auto& c : p.components) c.weight /= total;
}

inline void set_equal_weights(MixtureParams& p, double noise) {
  p.noise_weight = p.regime.active() ? noise : 0.0;
  const double each = (1.0 - p.noise_weight) / static_cast<double>(p.order());
  for (auto& c : p.components) c.weight = each;
}

// Contiguous segments of the sorted data cut at the k - 1 widest gaps.
inline std::vector<std::pair<std::size_t, std::size_t>> gap_segments(const Dataset& data, std::size_t k) {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i < data.size(); ++i) {
    if (data[i] > data[i - 1]) cuts.push_back(i);
  }
  if (cuts.size() < k - 1) return {};
  std::stable_sort(cuts.begin(), cuts.end(), [&](std::size_t a, std::size_t b) {
    return data[a] - data[a - 1] > data[b] - data[b - 1];
  });
  cuts.resize(k - 1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  std::size_t begin = 0;
  for (std::size_t c : cuts) {
    segs.emplace_back(begin, c);
    begin = c;
  }
  segs.emplace_back(begin, data.size());
  return segs;
}

inline Component segment_component(const Dataset& data, std::size_t begin, std::size_t end, double floor) {
  CompensatedSum s;
  for (std::size_t i = begin; i < end; ++i) s += data[i];
  const auto m = static_cast<double>(end - begin);
  const double mean = s.value() / m;
  CompensatedSum ss;
  for (std::size_t i = begin; i < end; ++i) ss += (data[i] - mean) * (data[i] - mean);
  return {m / static_cast<double>(data.size()), mean, std::max(floor, std::sqrt(ss.value() / m))};
}

// Indices of up to `limit` distinct data values, evenly spread over the
// distinct values and always including both extremes.
inline std::vector<std::size_t> candidate_points(const Dataset& data, std::size_t limit) {
  std::vector<std::size_t> distinct;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i == 0 || data[i] != data[i - 1]) distinct.push_back(i);
  }
  if (distinct.size() <= limit) return distinct;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < limit; ++k) {
    const std::size_t idx = k * (distinct.size() - 1) / (limit - 1);
    if (out.empty() || out.back() != distinct[idx]) out.push_back(distinct[idx]);
  }
  return out;
}

inline std::vector<Start> make_starts(const Dataset& data, std::size_t s, const Family& fam,
                                      const NoiseRegime& regime, const FitConfig& cfg,
                                      const MixtureParams* previous) {
  constexpr double kNoiseStart = 0.05;
  const double floor = cfg.scale_floor;
  const double sd = std::max(floor, data.ml_sd());
  const auto n = static_cast<double>(data.size());
  std::vector<Start> starts;

  {
    MixtureParams p = blank_params(data, fam, regime, floor);
    for (std::size_t j = 1; j <= s; ++j) {
      p.components.push_back({0.0, data.quantile(static_cast<double>(j) / static_cast<double>(s + 1)), sd});
    }
    set_equal_weights(p, kNoiseStart);
    starts.push_back({std::move(p), "quantile"});
  }

  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + s);
  for (std::size_t r = 1; r < cfg.restarts; ++r) {
    MixtureParams p = blank_params(data, fam, regime, floor);
    for (std::size_t j = 0; j < s; ++j) {
      const std::size_t idx = static_cast<std::size_t>(rng() % data.size());
      const double u = std::generate_canonical<double, 53>(rng);
      p.components.push_back({0.0, data[idx], std::exp(std::log(floor) + u * (std::log(sd) - std::log(floor)))});
    }
    set_equal_weights(p, kNoiseStart);
    starts.push_back({std::move(p), "random"});
  }

  if (const auto segs = gap_segments(data, s); !segs.empty()) {
    MixtureParams p = blank_params(data, fam, regime, floor);
    for (const auto& [b, e] : segs) p.components.push_back(segment_component(data, b, e, floor));
    if (p.regime.active()) {
      p.noise_weight = kNoiseStart;
      for (auto& c : p.components) c.weight *= 1.0 - kNoiseStart;
    }
    starts.push_back({std::move(p), "gap"});
  }

  if (regime.active()) {
    // One of s + 1 gap segments starts out as noise.
    if (const auto segs = gap_segments(data, s + 1); !segs.empty()) {
      for (std::size_t drop = 0; drop < segs.size(); ++drop) {
        MixtureParams p = blank_params(data, fam, regime, floor);
        for (std::size_t k = 0; k < segs.size(); ++k) {
          const Component c = segment_component(data, segs[k].first, segs[k].second, floor);
          if (k == drop) {
            p.noise_weight = c.weight;
          } else {
            p.components.push_back(c);
          }
        }
        starts.push_back({std::move(p), "noise-gap"});
      }
    }
  }

  if (previous != nullptr && previous->order() + 1 == s) {
    {
      MixtureParams p = *previous;
      p.components.push_back({0.0, data.min(), floor});
      starts.push_back({std::move(p), "pad"});
    }
    for (std::size_t j = 0; j < previous->order(); ++j) {
      const Component c = previous->components[j];
      if (c.weight <= 0.0) continue;
      MixtureParams p = *previous;
      p.components[j] = {c.weight / 2, c.location - c.scale / 2, c.scale};
      p.components.push_back({c.weight / 2, c.location + c.scale / 2, c.scale});
      starts.push_back({std::move(p), "split"});
    }
    auto add_at = [&](double location, double weight, double scale, const char* kind) {
      MixtureParams p = *previous;
      p.components.push_back({weight / (1.0 - weight), location, scale});
      if (p.regime.active()) p.noise_weight = std::max(p.noise_weight, 0.01);
      normalize_weights(p);
      starts.push_back({std::move(p), kind});
    };
    for (std::size_t idx : candidate_points(data, 64)) add_at(data[idx], 1.0 / n, floor, "add-point");
    const double wide = std::max(floor, sd / static_cast<double>(2 * s));
    for (std::size_t idx : candidate_points(data, 16)) {
      add_at(data[idx], 1.0 / static_cast<double>(s), wide, "add-wide");
    }
  }
  return starts;
}

}  // namespace detail

namespace detail {

inline FitResult best_of(const Dataset& data, std::vector<Start> starts, const FitConfig& cfg) {
  std::vector<EmRun> runs(starts.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < starts.size(); k += stride) runs[k] = run_em(data, starts[k].params, cfg);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, starts.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].loglik > runs[best].loglik) best = k;
  }
  FitResult out;
  out.params = std::move(runs[best].params);
  out.loglik = runs[best].loglik;
  out.iterations = runs[best].iterations;
  out.converged = runs[best].converged;
  out.restart_index = best;
  out.start_kind = starts[best].kind;
  return out;
}

}  // namespace detail

/// Multi-start fits for every order 1..s_max; the best fit of order s - 1
/// seeds additional starts for order s.
inline std::vector<FitResult> fit_orders(const Dataset& data, std::size_t s_max, const Family& fam,
                                         const NoiseRegime& regime, const FitConfig& cfg) {
  cfg.validate();
  if (s_max < 1) throw std::invalid_argument("fit: component count must be >= 1");
  if (regime.kind == NoiseRegime::Kind::range_uniform && !(data.range() > 0.0)) {
    throw std::invalid_argument("fit: range noise needs a dataset with positive range");
  }
  std::vector<FitResult> fits;
  fits.reserve(s_max);
  for (std::size_t s = 1; s <= s_max; ++s) {
    const MixtureParams* prev = fits.empty() ? nullptr : &fits.back().params;
    fits.push_back(detail::best_of(data, detail::make_starts(data, s, fam, regime, cfg, prev), cfg));
  }
  return fits;
}

/// Best-of-restarts constrained ML fit with s components.
inline FitResult fit(const Dataset& data, std::size_t s, const Family& fam, const NoiseRegime& regime,
                     const FitConfig& cfg) {
  return fit_orders(data, s, fam, regime, cfg).back();
}

}  // namespace lsmix
