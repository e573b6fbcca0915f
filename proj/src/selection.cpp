#include "rsvoronoi/selection.hpp"

#include <string>

namespace rsv {

RuleOfThumb rule_of_thumb() { return {200, 0.1, 0.3, 0.2}; }

PGrid::PGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(Errc::InvalidSequence, "candidate grid is empty");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] > 0.0 && values_[k] <= 1.0))
      throw Error(Errc::InvalidSequence, "candidate " + std::to_string(values_[k]) + " not in (0, 1]");
    if (k > 0 && !(values_[k] > values_[k - 1]))
      throw Error(Errc::InvalidSequence, "candidates must be strictly increasing");
  }
}

PGrid default_p_grid() { return PGrid({0.10, 0.13, 0.18, 0.24, 0.33, 0.44, 0.59, 0.80}); }

double cv_score(const PointPattern& pattern, double p, std::size_t m, std::uint64_t seed,
                bool include_integral, const RasterGrid& grid) {
  const PlanarDomain domain(pattern.window(), grid);
  return cv_score(domain, pattern.points(), p, m, seed, include_integral);
}

CvResult select_p(const PointPattern& pattern, const PGrid& grid, std::size_t m, std::uint64_t seed,
                  bool include_integral, const RasterGrid& raster) {
  const PlanarDomain domain(pattern.window(), raster);
  return select_p(domain, pattern.points(), grid, m, seed, include_integral);
}

}  // namespace rsv
