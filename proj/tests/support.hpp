#pragma once

#include <vector>

#include "lsmix/lsmix.hpp"

namespace lsmix::testing {

/// Union of an (a1, var)-NSD and an (a2, var)-NSD.
inline Dataset two_nsd(double a1, double a2, double var, std::size_t n1 = 25, std::size_t n2 = 25) {
  auto x = nsd_values(a1, var, n1);
  const auto y = nsd_values(a2, var, n2);
  x.insert(x.end(), y.begin(), y.end());
  return Dataset(std::move(x));
}

/// The 50-point dataset used throughout: (0,1)-NSD(25) and (5,1)-NSD(25).
inline Dataset standard_data() { return two_nsd(0.0, 5.0, 1.0); }

inline std::vector<double> equispaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

inline MixtureParams mixture(Family fam, std::vector<Component> comps, NoiseRegime regime = NoiseRegime::none(),
                             double noise = 0.0, double floor = 0.025) {
  MixtureParams p;
  p.family = fam;
  p.components = std::move(comps);
  p.regime = regime;
  p.noise_weight = noise;
  p.scale_floor = floor;
  return p;
}

}  // namespace lsmix::testing
