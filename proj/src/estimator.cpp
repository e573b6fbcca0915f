#include "rsvoronoi/estimator.hpp"

#include <string>

namespace rsv {

double integrate_field(const IntensityField& field) {
  double total = 0.0;
  for (std::size_t c = 0; c < field.value.size(); ++c) total += field.value[c] * field.measure[c];
  return total;
}

void EstimatorConfig::validate() const {
  check_probability(p);
  if (m < 1) throw Error(Errc::InvalidM, "number of resamples must be >= 1");
}

IntensityField voronoi_estimate(const PointPattern& pattern, const RasterGrid& grid) {
  const PlanarDomain domain(pattern.window(), grid);
  return voronoi_estimate(domain, pattern.points());
}

IntensityField resample_smoothed_estimate(const PointPattern& pattern, const EstimatorConfig& cfg,
                                          const RasterGrid& grid) {
  const PlanarDomain domain(pattern.window(), grid);
  return resample_smoothed_estimate(domain, pattern.points(), cfg);
}

IntensityField sequential_estimate(const PointPattern& pattern, std::span<const double> p_vec,
                                   std::uint64_t seed, const RasterGrid& grid) {
  const PlanarDomain domain(pattern.window(), grid);
  return sequential_estimate(domain, pattern.points(), p_vec, seed);
}

}  // namespace rsv
