#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <omp.h>

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/tessellation.hpp"
#include "rsvoronoi/thinning.hpp"

namespace rsv {

/// Piecewise-constant intensity on a domain grid, with the quadrature weight
/// (pixel area or lixel length) of every grid cell.
struct IntensityField {
  std::vector<double> value;
  std::vector<double> measure;
};

/// Σ value·measure.
double integrate_field(const IntensityField& field);

struct EstimatorConfig {
  double p = 1.0;
  std::size_t m = 1;
  std::uint64_t seed = 0;

  /// Throws InvalidProbability or InvalidM.
  void validate() const;
};

/// What an estimator needs from a metric-measure domain.
template <class D>
concept DomainBackend = requires(const D& d, std::span<const typename D::point_type> pts,
                                 typename D::point_type q, Tessellation& t) {
  { d.cell_count() } -> std::convertible_to<std::size_t>;
  { d.cell_measures() } -> std::convertible_to<std::span<const double>>;
  { d.contains(q) } -> std::convertible_to<bool>;
  d.tessellate(pts, t);
  { d.nearest_many(pts, pts) } -> std::same_as<std::vector<std::size_t>>;
  { d.removal_cell_measures(pts, t) } -> std::same_as<std::vector<double>>;
};

namespace detail {

template <class P>
std::vector<P> gather(std::span<const P> points, std::span<const std::size_t> indices) {
  std::vector<P> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points[i]);
  return out;
}

/// weight / |V_g| per generator; zero for generators without measure.
inline void cell_contributions(const Tessellation& tess, double weight, std::vector<double>& out) {
  out.resize(tess.cell_measure.size());
  for (std::size_t g = 0; g < out.size(); ++g)
    out[g] = tess.cell_measure[g] > 0.0 ? weight / tess.cell_measure[g] : 0.0;
}

/// One replicate's term of the smoothed sum, written (not added) into `field`.
template <DomainBackend D>
void replicate_term(const D& domain, std::span<const typename D::point_type> points, double p,
                    double weight, const RngStream& marks, Tessellation& tess,
                    std::vector<double>& contrib, std::span<double> field) {
  const auto kept = retained_indices(points.size(), p, marks);
  if (kept.empty()) {
    std::fill(field.begin(), field.end(), 0.0);
    return;
  }
  const auto sites = gather(points, std::span<const std::size_t>(kept));
  domain.tessellate(std::span<const typename D::point_type>(sites), tess);
  cell_contributions(tess, weight, contrib);
  for (std::size_t c = 0; c < field.size(); ++c) field[c] = contrib[tess.owner[c]];
}

/// Σ_j ρ̂^V(·; X^j_{p_j}) / (m p_j) with X^j the j-th independent thinning.
/// Terms are reduced in replicate order whatever the thread count, so the
/// result is bit-identical for any schedule.
template <DomainBackend D>
IntensityField smoothed_sum(const D& domain, std::span<const typename D::point_type> points,
                            std::span<const double> probabilities, std::uint64_t seed) {
  const std::size_t m = probabilities.size();
  const std::size_t cells = domain.cell_count();
  IntensityField out;
  const auto measure = domain.cell_measures();
  out.measure.assign(measure.begin(), measure.end());
  out.value.assign(cells, 0.0);
  const double m_real = static_cast<double>(m);

  const int threads = omp_in_parallel() ? 1 : omp_get_max_threads();
  if (threads <= 1 || m == 1) {
    Tessellation tess;
    std::vector<double> contrib, term(cells);
    for (std::size_t j = 0; j < m; ++j) {
      const double p = probabilities[j];
      replicate_term(domain, points, p, 1.0 / (m_real * p), thinning_stream(seed, j), tess, contrib, term);
      for (std::size_t c = 0; c < cells; ++c) out.value[c] += term[c];
    }
    return out;
  }

  const std::size_t block = std::min<std::size_t>(m, static_cast<std::size_t>(4 * threads));
  std::vector<std::vector<double>> terms(block, std::vector<double>(cells));
  for (std::size_t start = 0; start < m; start += block) {
    const auto len = static_cast<std::ptrdiff_t>(std::min(block, m - start));
#pragma omp parallel
    {
      Tessellation tess;
      std::vector<double> contrib;
#pragma omp for schedule(dynamic)
      for (std::ptrdiff_t k = 0; k < len; ++k) {
        const std::size_t j = start + static_cast<std::size_t>(k);
        const double p = probabilities[j];
        replicate_term(domain, points, p, 1.0 / (m_real * p), thinning_stream(seed, j), tess, contrib,
                       terms[static_cast<std::size_t>(k)]);
      }
    }
    for (std::ptrdiff_t k = 0; k < len; ++k)
      for (std::size_t c = 0; c < cells; ++c) out.value[c] += terms[static_cast<std::size_t>(k)][c];
  }
  return out;
}

}  // namespace detail

/// Plain Voronoi estimate: 1/|V_x| on the cell of x; identically zero for an
/// empty pattern.
template <DomainBackend D>
IntensityField voronoi_estimate(const D& domain, std::span<const typename D::point_type> points) {
  const double one = 1.0;
  return detail::smoothed_sum(domain, points, std::span<const double>(&one, 1), 0);
}

/// Resample-smoothed estimate: mean over m independent p-thinnings of the
/// Voronoi estimate, each divided by p. p = 1 keeps every point in every
/// replicate, so it is answered by the plain estimate for any m.
template <DomainBackend D>
IntensityField resample_smoothed_estimate(const D& domain, std::span<const typename D::point_type> points,
                                          const EstimatorConfig& cfg) {
  cfg.validate();
  if (cfg.p == 1.0) return voronoi_estimate(domain, points);
  const std::vector<double> ps(cfg.m, cfg.p);
  return detail::smoothed_sum(domain, points, std::span<const double>(ps), cfg.seed);
}

/// Sequential variant: replicate j uses its own retention level p_vec[j].
/// p_vec = (p, ..., p) reproduces resample_smoothed_estimate with the same seed.
template <DomainBackend D>
IntensityField sequential_estimate(const D& domain, std::span<const typename D::point_type> points,
                                   std::span<const double> p_vec, std::uint64_t seed) {
  if (p_vec.empty()) throw Error(Errc::InvalidSequence, "sequential estimate needs at least one probability");
  for (double p : p_vec)
    if (!(p > 0.0 && p <= 1.0))
      throw Error(Errc::InvalidSequence, "probability " + std::to_string(p) + " not in (0, 1]");
  return detail::smoothed_sum(domain, points, p_vec, seed);
}

/// Resample-smoothed estimate evaluated at arbitrary locations by looking up
/// the cell that contains each location in every thinning.
template <DomainBackend D>
std::vector<double> estimate_at_points(const D& domain, std::span<const typename D::point_type> points,
                                       const EstimatorConfig& cfg,
                                       std::span<const typename D::point_type> locations) {
  cfg.validate();
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (!domain.contains(locations[i]))
      throw Error(Errc::LocationOutsideDomain, "location " + std::to_string(i) + " is outside the domain");
  std::vector<double> out(locations.size(), 0.0);
  const std::size_t m = cfg.p == 1.0 ? 1 : cfg.m;
  const double weight = 1.0 / (static_cast<double>(m) * cfg.p);
  Tessellation tess;
  std::vector<double> contrib;
  for (std::size_t j = 0; j < m; ++j) {
    const auto kept = retained_indices(points.size(), cfg.p, thinning_stream(cfg.seed, j));
    if (kept.empty()) continue;
    const auto sites = detail::gather(points, std::span<const std::size_t>(kept));
    const std::span<const typename D::point_type> site_span(sites);
    domain.tessellate(site_span, tess);
    detail::cell_contributions(tess, weight, contrib);
    const auto owners = domain.nearest_many(site_span, locations);
    for (std::size_t q = 0; q < locations.size(); ++q) out[q] += contrib[owners[q]];
  }
  return out;
}

// Planar conveniences.
IntensityField voronoi_estimate(const PointPattern& pattern, const RasterGrid& grid);
IntensityField resample_smoothed_estimate(const PointPattern& pattern, const EstimatorConfig& cfg,
                                          const RasterGrid& grid);
IntensityField sequential_estimate(const PointPattern& pattern, std::span<const double> p_vec,
                                   std::uint64_t seed, const RasterGrid& grid);

}  // namespace rsv
