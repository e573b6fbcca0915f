#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rsv {

/// Discretized Voronoi partition: which generator owns each grid cell, and the
/// resulting cell measure per generator.
struct Tessellation {
  std::vector<std::int32_t> owner;   // per grid cell (pixel or lixel)
  std::vector<double> cell_measure;  // per generator
};

namespace detail {

/// Hands each generator without measure the grid cell it sits in (`home`),
/// provided the current owner keeps some measure of its own.
inline void claim_home_cells(Tessellation& t, std::span<const double> measure,
                             std::span<const std::size_t> home) {
  bool changed = false;
  for (std::size_t g = 0; g < t.cell_measure.size(); ++g) {
    if (t.cell_measure[g] > 0.0) continue;
    const std::size_t c = home[g];
    const std::int32_t prev = t.owner[c];
    if (measure[c] <= 0.0 || prev < 0 || !(t.cell_measure[prev] - measure[c] > 0.0)) continue;
    t.cell_measure[prev] -= measure[c];
    t.cell_measure[g] = measure[c];
    t.owner[c] = static_cast<std::int32_t>(g);
    changed = true;
  }
  if (!changed) return;
  std::fill(t.cell_measure.begin(), t.cell_measure.end(), 0.0);
  for (std::size_t c = 0; c < t.owner.size(); ++c) t.cell_measure[t.owner[c]] += measure[c];
}

}  // namespace detail
}  // namespace rsv
