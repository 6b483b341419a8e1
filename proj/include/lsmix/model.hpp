#pragma once

// Location-scale component families, mixture parameters, datasets and the
// three log-likelihood objectives (plain mixture, mixture plus a uniform
// noise component on the data range, mixture plus an improper noise level).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "lsmix/numeric.hpp"

namespace lsmix {

enum class FamilyKind { normal, student_t, huber };

/// Symmetric, unimodal base density f with f > 0 everywhere.
///
/// Every family also exposes the IRLS weight u(z) = rho'(z)/z of its
/// rho = -log f, which drives the weighted location/scale estimator.
class Family {
 public:
  static constexpr double kDefaultHuberK = 1.345;

  static Family normal() { return Family(FamilyKind::normal, 0.0); }

  static Family student_t(double nu) {
    if (!(nu >= 1.0) || !std::isfinite(nu)) {
      throw std::invalid_argument("student_t: degrees of freedom must be >= 1");
    }
    return Family(FamilyKind::student_t, nu);
  }

  static Family huber(double k = kDefaultHuberK) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("huber: bending constant must be > 0");
    }
    return Family(FamilyKind::huber, k);
  }

  /// Parses "normal", "t:<nu>", "huber" or "huber:<k>".
  static Family parse(std::string_view spec) {
    auto number = [&](std::string_view s) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("family: bad number in '" + std::string(spec) + "'");
      }
      return v;
    };
    if (spec == "normal") return normal();
    if (spec == "huber") return huber();
    if (spec.starts_with("t:")) return student_t(number(spec.substr(2)));
    if (spec.starts_with("huber:")) return huber(number(spec.substr(6)));
    throw std::invalid_argument("family: expected normal, t:<nu> or huber[:k], got '" +
                                std::string(spec) + "'");
  }

  [[nodiscard]] FamilyKind kind() const noexcept { return kind_; }
  /// Degrees of freedom for t, bending constant for Huber, 0 for Normal.
  [[nodiscard]] double parameter() const noexcept { return param_; }

  [[nodiscard]] std::string str() const {
    switch (kind_) {
      case FamilyKind::normal: return "normal";
      case FamilyKind::student_t: return "t:" + format_param();
      case FamilyKind::huber: return "huber:" + format_param();
    }
    return "?";
  }

  /// -log f(z) up to the norming constant.
  [[nodiscard]] double rho(double z) const noexcept {
    switch (kind_) {
      case FamilyKind::normal: return 0.5 * z * z;
      case FamilyKind::student_t: return 0.5 * (param_ + 1.0) * std::log1p(z * z / param_);
      case FamilyKind::huber: {
        const double a = std::fabs(z);
        return a <= param_ ? 0.5 * z * z : param_ * a - 0.5 * param_ * param_;
      }
    }
    return 0.0;
  }

  [[nodiscard]] double log_pdf(double z) const noexcept { return log_norm_ - rho(z); }
  [[nodiscard]] double pdf(double z) const noexcept { return std::exp(log_pdf(z)); }
  [[nodiscard]] double log_peak() const noexcept { return log_norm_; }

  /// rho'(z)/z; equals 1 for the Normal.
  [[nodiscard]] double irls_weight(double z) const noexcept {
    switch (kind_) {
      case FamilyKind::normal: return 1.0;
      case FamilyKind::student_t: return (param_ + 1.0) / (param_ + z * z);
      case FamilyKind::huber: {
        const double a = std::fabs(z);
        return a <= param_ ? 1.0 : param_ / a;
      }
    }
    return 1.0;
  }

  [[nodiscard]] double cdf(double z) const {
    switch (kind_) {
      case FamilyKind::normal: return normal_cdf(z);
      case FamilyKind::student_t:
        return boost::math::cdf(boost::math::students_t_distribution<double>(param_), z);
      case FamilyKind::huber: {
        if (z > 0.0) return 1.0 - cdf(-z);
        const double k = param_;
        const double c = std::exp(log_norm_);
        if (z <= -k) return c * std::exp(k * z + 0.5 * k * k) / k;
        const double tail = c * std::exp(-0.5 * k * k) / k;
        return tail + c * std::sqrt(2.0 * std::numbers::pi) * (normal_cdf(z) - normal_cdf(-k));
      }
    }
    return 0.0;
  }

  [[nodiscard]] double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p must lie in (0, 1)");
    switch (kind_) {
      case FamilyKind::normal: return normal_quantile(p);
      case FamilyKind::student_t:
        return boost::math::quantile(boost::math::students_t_distribution<double>(param_), p);
      case FamilyKind::huber: {
        if (p > 0.5) return -quantile(1.0 - p);
        const double k = param_;
        const double c = std::exp(log_norm_);
        const double tail = c * std::exp(-0.5 * k * k) / k;
        if (p <= tail) return (std::log(p * k / c) - 0.5 * k * k) / k;
        return normal_quantile(normal_cdf(-k) + (p - tail) / (c * std::sqrt(2.0 * std::numbers::pi)));
      }
    }
    return 0.0;
  }

  friend bool operator==(const Family& a, const Family& b) noexcept {
    return a.kind_ == b.kind_ && a.param_ == b.param_;
  }

 private:
  Family(FamilyKind kind, double param) : kind_(kind), param_(param) {
    switch (kind_) {
      case FamilyKind::normal: log_norm_ = -kLogSqrt2Pi; break;
      case FamilyKind::student_t:
        log_norm_ = std::lgamma(0.5 * (param_ + 1.0)) - std::lgamma(0.5 * param_) -
                    0.5 * std::log(param_ * std::numbers::pi);
        break;
      case FamilyKind::huber: {
        // Mass of exp(-rho): Gaussian core on [-k, k] plus two exponential tails.
        const double k = param_;
        const double mass = std::sqrt(2.0 * std::numbers::pi) * (2.0 * normal_cdf(k) - 1.0) +
                            2.0 * std::exp(-0.5 * k * k) / k;
        log_norm_ = -std::log(mass);
        break;
      }
    }
  }

  [[nodiscard]] std::string format_param() const {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, param_);
    return std::string(buf, res.ptr);
  }

  FamilyKind kind_;
  double param_;
  double log_norm_ = 0.0;
};

/// log f_{a,sigma}(x) = log f((x - a)/sigma) - log sigma.
inline double log_density(const Family& fam, double x, double a, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("density: scale must be positive and finite");
  }
  return fam.log_pdf((x - a) / sigma) - std::log(sigma);
}

inline double density(const Family& fam, double x, double a, double sigma) {
  return std::exp(log_density(fam, x, a, sigma));
}

/// Ordered sample with cached extremes and distinct-value count.
class Dataset {
 public:
  explicit Dataset(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Dataset: at least one value required");
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("Dataset: values must be finite");
    }
    std::sort(values_.begin(), values_.end());
    distinct_ = 1;
    for (std::size_t i = 1; i < values_.size(); ++i) {
      if (values_[i] != values_[i - 1]) ++distinct_;
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double min() const noexcept { return values_.front(); }
  [[nodiscard]] double max() const noexcept { return values_.back(); }
  [[nodiscard]] double range() const noexcept { return max() - min(); }
  [[nodiscard]] std::size_t distinct() const noexcept { return distinct_; }

  [[nodiscard]] double mean() const noexcept {
    CompensatedSum s;
    for (double v : values_) s += v;
    return s.value() / static_cast<double>(values_.size());
  }

  /// Maximum-likelihood standard deviation (divisor n).
  [[nodiscard]] double ml_sd() const noexcept {
    const double m = mean();
    CompensatedSum s;
    for (double v : values_) s += (v - m) * (v - m);
    return std::sqrt(s.value() / static_cast<double>(values_.size()));
  }

  /// Empirical quantile by linear interpolation between order statistics.
  [[nodiscard]] double quantile(double p) const noexcept {
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values_.size() - 1);
    return values_[lo] + (pos - static_cast<double>(lo)) * (values_[hi] - values_[lo]);
  }

 private:
  std::vector<double> values_;
  std::size_t distinct_ = 0;
};

/// Optional noise component of the mixture.
struct NoiseRegime {
  enum class Kind { none, range_uniform, improper };

  Kind kind = Kind::none;
  double xmin = 0.0;
  double xmax = 0.0;
  double level = 0.0;  // improper density b

  static NoiseRegime none() { return {}; }

  static NoiseRegime range(double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("range noise: xmax must exceed xmin");
    return {Kind::range_uniform, lo, hi, 0.0};
  }

  static NoiseRegime range_for(const Dataset& data) { return range(data.min(), data.max()); }

  static NoiseRegime improper(double b) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("improper noise: b must be > 0");
    return {Kind::improper, 0.0, 0.0, b};
  }

  [[nodiscard]] bool active() const noexcept { return kind != Kind::none; }

  /// Range noise is tied to the extremes of the dataset it is evaluated on.
  [[nodiscard]] NoiseRegime bound_to(const Dataset& data) const {
    return kind == Kind::range_uniform ? range_for(data) : *this;
  }

  [[nodiscard]] double log_density(double x) const noexcept {
    switch (kind) {
      case Kind::none: return -kInf;
      case Kind::range_uniform:
        return (x >= xmin && x <= xmax) ? -std::log(xmax - xmin) : -kInf;
      case Kind::improper: return std::log(level);
    }
    return -kInf;
  }

  [[nodiscard]] std::string str() const {
    switch (kind) {
      case Kind::none: return "none";
      case Kind::range_uniform: return "range";
      case Kind::improper: {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, level);
        return "improper:" + std::string(buf, res.ptr);
      }
    }
    return "?";
  }

  /// Parses "none", "range" or "improper:<b>". Range extremes are bound later.
  static NoiseRegime parse(std::string_view spec) {
    if (spec == "none") return none();
    if (spec == "range") return {Kind::range_uniform, 0.0, 1.0, 0.0};
    if (spec.starts_with("improper:")) {
      const std::string_view num = spec.substr(9);
      double b = 0.0;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), b);
      if (ec != std::errc() || ptr != num.data() + num.size()) {
        throw std::invalid_argument("noise: bad level in '" + std::string(spec) + "'");
      }
      return improper(b);
    }
    throw std::invalid_argument("noise: expected none, range or improper:<b>, got '" +
                                std::string(spec) + "'");
  }
};

struct Component {
  double weight = 0.0;
  double location = 0.0;
  double scale = 1.0;

  friend bool operator==(const Component&, const Component&) = default;
};

/// Full mixture parameter: components, noise proportion, noise regime and
/// the scale floor the parameters were produced under.
struct MixtureParams {
  Family family = Family::normal();
  std::vector<Component> components;
  double noise_weight = 0.0;
  NoiseRegime regime;
  double scale_floor = 0.0;

  [[nodiscard]] std::size_t order() const noexcept { return components.size(); }

  /// Sorts components by location, then scale, then weight.
  void canonicalize() {
    std::stable_sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
      return std::tie(a.location, a.scale, a.weight) < std::tie(b.location, b.scale, b.weight);
    });
  }

  void validate() const {
    if (components.empty()) throw std::invalid_argument("mixture: at least one component required");
    CompensatedSum total;
    total += noise_weight;
    if (!(noise_weight >= 0.0)) throw std::invalid_argument("mixture: negative noise proportion");
    if (!regime.active() && noise_weight != 0.0) {
      throw std::invalid_argument("mixture: noise proportion without a noise regime");
    }
    for (const auto& c : components) {
      if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture: negative proportion");
      if (!(c.scale > 0.0) || !std::isfinite(c.scale) || !std::isfinite(c.location)) {
        throw std::invalid_argument("mixture: invalid location or scale");
      }
      total += c.weight;
    }
    if (std::fabs(total.value() - 1.0) > 1e-9) {
      throw std::invalid_argument("mixture: proportions must sum to 1");
    }
  }

  friend bool operator==(const MixtureParams& a, const MixtureParams& b) {
    return a.family == b.family && a.components == b.components &&
           a.noise_weight == b.noise_weight && a.regime.kind == b.regime.kind &&
           a.regime.xmin == b.regime.xmin && a.regime.xmax == b.regime.xmax &&
           a.regime.level == b.regime.level && a.scale_floor == b.scale_floor;
  }
};

/// log of the mixture density at x, noise term included.
inline double log_mixture_density(const MixtureParams& params, double x) {
  double terms[64];
  std::vector<double> heap;
  const std::size_t m = params.order() + 1;
  if (m > 64) heap.resize(m);
  const std::span<double> buf = m > 64 ? std::span<double>(heap) : std::span<double>(terms, m);
  for (std::size_t j = 0; j < params.order(); ++j) {
    const auto& c = params.components[j];
    buf[j] = c.weight > 0.0 ? std::log(c.weight) + log_density(params.family, x, c.location, c.scale)
                            : -kInf;
  }
  buf[m - 1] = params.noise_weight > 0.0
                   ? std::log(params.noise_weight) + params.regime.log_density(x)
                   : -kInf;
  return log_sum_exp(buf);
}

inline double mixture_density(const MixtureParams& params, double x) {
  return std::exp(log_mixture_density(params, x));
}

/// Sum over the data of the log mixture density.
inline double log_likelihood(const MixtureParams& params, const Dataset& data) {
  params.validate();
  if (params.regime.kind == NoiseRegime::Kind::range_uniform &&
      (params.regime.xmin != data.min() || params.regime.xmax != data.max())) {
    throw std::invalid_argument("log_likelihood: range noise must be bound to the dataset extremes");
  }
  CompensatedSum total;
  for (double x : data.values()) {
    const double l = log_mixture_density(params, x);
    if (!std::isfinite(l)) {
      throw std::runtime_error("log_likelihood: data point with zero mixture density");
    }
    total += l;
  }
  return total.value();
}

}  // namespace lsmix
