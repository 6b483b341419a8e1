#pragma once

// Order selection by AIC/BIC sweep over s = 1..min(s_max, distinct points).

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lsmix/em.hpp"

namespace lsmix {

enum class Criterion { aic, bic };

inline Criterion parse_criterion(std::string_view s) {
  if (s == "aic") return Criterion::aic;
  if (s == "bic") return Criterion::bic;
  throw std::invalid_argument("criterion: expected aic or bic, got '" + std::string(s) + "'");
}

inline const char* to_string(Criterion c) { return c == Criterion::aic ? "aic" : "bic"; }

/// Free parameters: s locations, s scales and s - 1 (plain) or s (noise) proportions.
inline std::size_t free_parameters(std::size_t s, bool noise) { return noise ? 3 * s : 3 * s - 1; }

/// 2L - 2k (AIC) or 2L - k log n (BIC); larger is better.
inline double criterion_value(double loglik, std::size_t k, std::size_t n, Criterion kind) {
  if (n < 1 || k < 1) throw std::invalid_argument("criterion_value: n and k must be >= 1");
  const double penalty = kind == Criterion::aic ? 2.0 * static_cast<double>(k)
                                                : static_cast<double>(k) * std::log(static_cast<double>(n));
  return 2.0 * loglik - penalty;
}

struct OrderFit {
  std::size_t s = 0;
  double loglik = 0.0;
  std::size_t k = 0;
  double value = 0.0;
  FitResult fit;
};

struct SelectionResult {
  std::size_t chosen = 0;
  std::vector<OrderFit> per_order;
  Criterion criterion = Criterion::bic;
  /// The sweep stopped at s_max before the distinct-point bound.
  bool capped = false;
  bool all_converged = true;

  [[nodiscard]] const FitResult& best() const { return per_order.at(chosen - 1).fit; }
  [[nodiscard]] const FitResult& at(std::size_t s) const { return per_order.at(s - 1).fit; }
};

inline constexpr std::size_t kDefaultMaxOrder = 10;

inline SelectionResult select_order(const Dataset& data, const Family& fam, const NoiseRegime& regime,
                                    const FitConfig& cfg, Criterion kind,
                                    std::optional<std::size_t> s_max = std::nullopt) {
  const std::size_t cap = s_max.value_or(kDefaultMaxOrder);
  if (cap < 1) throw std::invalid_argument("select_order: s_max must be >= 1");
  const std::size_t top = std::min(cap, data.distinct());
  SelectionResult out;
  out.criterion = kind;
  out.capped = cap < data.distinct();
  auto fits = fit_orders(data, top, fam, regime, cfg);
  for (std::size_t s = 1; s <= top; ++s) {
    OrderFit row;
    row.s = s;
    row.loglik = fits[s - 1].loglik;
    row.k = free_parameters(s, regime.active());
    row.value = criterion_value(row.loglik, row.k, data.size(), kind);
    out.all_converged = out.all_converged && fits[s - 1].converged;
    row.fit = std::move(fits[s - 1]);
    out.per_order.push_back(std::move(row));
  }
  out.chosen = 1;
  for (const auto& row : out.per_order) {
    if (row.value > out.per_order[out.chosen - 1].value) out.chosen = row.s;
  }
  return out;
}

}  // namespace lsmix
