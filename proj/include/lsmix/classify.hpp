#pragma once

// Posterior classification, cluster similarity and classification breakdown.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "lsmix/em.hpp"
#include "lsmix/numeric.hpp"

namespace lsmix {

inline constexpr int kNoiseLabel = -1;

/// Per-point labels. Component labels are 0-based in canonical component
/// order; points assigned to the noise term carry kNoiseLabel.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> labels) : labels_(std::move(labels)) {
    for (int l : labels_) {
      if (l < kNoiseLabel) throw std::invalid_argument("Partition: invalid label");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
  [[nodiscard]] int label(std::size_t i) const { return labels_.at(i); }
  [[nodiscard]] const std::vector<int>& labels() const noexcept { return labels_; }

  /// Nonempty component clusters ordered by label, each an ascending index set.
  [[nodiscard]] std::vector<std::vector<std::size_t>> clusters() const {
    int top = kNoiseLabel;
    for (int l : labels_) top = std::max(top, l);
    std::vector<std::vector<std::size_t>> by_label(static_cast<std::size_t>(top + 1));
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] != kNoiseLabel) by_label[static_cast<std::size_t>(labels_[i])].push_back(i);
    }
    std::erase_if(by_label, [](const auto& c) { return c.empty(); });
    return by_label;
  }

  [[nodiscard]] std::vector<std::size_t> noise() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == kNoiseLabel) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
};

/// Label = argmax of the responsibilities; ties go to the lowest component,
/// the noise column competes last.
inline Partition classify(const MixtureParams& params, const Dataset& data) {
  const Responsibilities resp = e_step(params, data);
  std::vector<int> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    int best = 0;
    double best_p = resp(i, resp.component_column(0));
    for (std::size_t j = 1; j < resp.components(); ++j) {
      const double p = resp(i, resp.component_column(j));
      if (p > best_p) {
        best_p = p;
        best = static_cast<int>(j);
      }
    }
    if (resp.has_noise() && resp(i, 0) > best_p) best = kNoiseLabel;
    labels[i] = best;
  }
  return Partition(std::move(labels));
}

/// 2|C n D| / (|C| + |D|) for ascending index sets.
inline Rational gamma(std::span<const std::size_t> c, std::span<const std::size_t> d) {
  if (c.empty() || d.empty()) throw std::invalid_argument("gamma: index sets must be nonempty");
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < c.size() && j < d.size();) {
    if (c[i] < d[j]) {
      ++i;
    } else if (d[j] < c[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return Rational(static_cast<std::int64_t>(2 * common), static_cast<std::int64_t>(c.size() + d.size()));
}

/// Similarity of C to its most similar cluster of the partition (0 when
/// every point of the partition is noise).
inline Rational gamma_star(std::span<const std::size_t> c, const Partition& partition) {
  Rational best(0, 1);
  for (const auto& d : partition.clusters()) best = std::max(best, gamma(c, d));
  return best;
}

/// Classification of the augmented data restricted to the original points;
/// `original_positions[i]` is the index of original point i in `augmented`.
inline Partition induced_partition(const FitResult& fit_on_augmented, const Dataset& augmented,
                                   std::span<const std::size_t> original_positions) {
  const Partition full = classify(fit_on_augmented.params, augmented);
  std::vector<int> labels;
  labels.reserve(original_positions.size());
  for (std::size_t pos : original_positions) labels.push_back(full.label(pos));
  return Partition(std::move(labels));
}

struct ClusterVerdict {
  std::vector<std::size_t> members;
  Rational gamma_star;
  bool broke = false;
  /// Every member was classified as noise in the restricted partition.
  bool absorbed_by_noise = false;
};

struct BreakdownVerdict {
  std::vector<ClusterVerdict> clusters;
  std::size_t broken = 0;
};

/// A cluster breaks down when its best match has similarity <= 2/3.
inline BreakdownVerdict classification_breakdown_check(const Partition& original, const Partition& restricted) {
  if (original.size() != restricted.size()) {
    throw std::invalid_argument("classification_breakdown_check: partitions on different index sets");
  }
  static const Rational kThreshold(2, 3);
  BreakdownVerdict out;
  for (auto& c : original.clusters()) {
    ClusterVerdict v;
    v.gamma_star = gamma_star(c, restricted);
    v.broke = v.gamma_star <= kThreshold;
    v.absorbed_by_noise = std::all_of(c.begin(), c.end(), [&](std::size_t i) {
      return restricted.label(i) == kNoiseLabel;
    });
    v.members = std::move(c);
    if (v.broke) ++out.broken;
    out.clusters.push_back(std::move(v));
  }
  return out;
}

}  // namespace lsmix
