#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <omp.h>

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/estimator.hpp"
#include "rsvoronoi/thinning.hpp"

namespace rsv {

struct RuleOfThumb {
  std::size_t m;
  double p_low;
  double p_high;
  double p_default;
};

/// m = 200, p in [0.1, 0.3], default 0.2.
RuleOfThumb rule_of_thumb();

/// Strictly increasing candidate retention probabilities in (0, 1].
class PGrid {
 public:
  /// Throws InvalidSequence.
  explicit PGrid(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// 0.10, 0.13, 0.18, 0.24, 0.33, 0.44, 0.59, 0.80.
PGrid default_p_grid();

/// Selections above this value raise CvResult::advisory.
inline constexpr double kAdvisoryCutoff = 0.3;

struct CvResult {
  std::vector<double> p;
  std::vector<double> score;  // -inf marks a disqualified candidate
  double selected_p = 0.0;
  std::size_t selected_index = 0;
  std::size_t m = 0;
  bool integral_included = false;
  /// Selected p lies above the rule-of-thumb range; consider falling back to it.
  bool advisory = false;
};

namespace detail {

/// Leave-one-out terms of one thinning replicate for every candidate.
/// loo is K×n (row k for candidate k), mass has K entries.
template <DomainBackend D>
void cv_replicate(const D& domain, std::span<const typename D::point_type> points,
                  std::span<const double> p_asc, std::size_t m, std::size_t replicate,
                  const RngStream& marks, std::span<double> loo, std::span<double> mass) {
  using P = typename D::point_type;
  const std::size_t n = points.size();
  const std::size_t K = p_asc.size();
  std::fill(loo.begin(), loo.end(), 0.0);
  std::fill(mass.begin(), mass.end(), 0.0);

  std::vector<double> p_desc(p_asc.rbegin(), p_asc.rend());
  const auto chain = nested_retained_indices(n, p_desc, marks);

  Tessellation tess;
  std::vector<char> kept(n);
  std::vector<P> queries;
  std::vector<std::size_t> query_index;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = p_asc[k];
    // p = 1 keeps everything: the estimate is the plain one, carried by replicate 0 alone.
    if (p == 1.0 && replicate > 0) continue;
    const double weight = p == 1.0 ? 1.0 : 1.0 / (static_cast<double>(m) * p);
    const auto& retained = chain[K - 1 - k];
    if (retained.empty()) continue;

    const auto sites = gather(points, std::span<const std::size_t>(retained));
    const std::span<const P> site_span(sites);
    domain.tessellate(site_span, tess);
    const auto removal = domain.removal_cell_measures(site_span, tess);

    double* row = loo.data() + k * n;
    std::size_t positive = 0;
    for (std::size_t g = 0; g < retained.size(); ++g) {
      if (tess.cell_measure[g] > 0.0) ++positive;
      if (removal[g] > 0.0) row[retained[g]] = weight / removal[g];
    }
    mass[k] = weight * static_cast<double>(positive);

    std::fill(kept.begin(), kept.end(), 0);
    for (std::size_t i : retained) kept[i] = 1;
    queries.clear();
    query_index.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (!kept[i]) {
        queries.push_back(points[i]);
        query_index.push_back(i);
      }
    if (queries.empty()) continue;
    const auto owners = domain.nearest_many(site_span, std::span<const P>(queries));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double cm = tess.cell_measure[owners[q]];
      if (cm > 0.0) row[query_index[q]] = weight / cm;
    }
  }
}

/// CV scores for ascending candidates, all sharing one nested thinning chain
/// per replicate. Replicate terms are reduced in replicate order.
template <DomainBackend D>
std::vector<double> cv_scores(const D& domain, std::span<const typename D::point_type> points,
                              std::span<const double> p_asc, std::size_t m, std::uint64_t seed,
                              bool include_integral) {
  const std::size_t n = points.size();
  const std::size_t K = p_asc.size();
  if (n < 2) throw Error(Errc::TooFewPoints, "cross-validation needs at least 2 points");
  if (m < 1) throw Error(Errc::InvalidM, "number of resamples must be >= 1");
  for (double p : p_asc) check_probability(p);

  std::vector<double> loo_sum(K * n, 0.0), mass_sum(K, 0.0);
  auto merge = [&](std::span<const double> loo, std::span<const double> mass) {
    for (std::size_t t = 0; t < loo_sum.size(); ++t) loo_sum[t] += loo[t];
    for (std::size_t k = 0; k < K; ++k) mass_sum[k] += mass[k];
  };

  const int threads = omp_in_parallel() ? 1 : omp_get_max_threads();
  if (threads <= 1 || m == 1) {
    std::vector<double> loo(K * n), mass(K);
    for (std::size_t j = 0; j < m; ++j) {
      cv_replicate(domain, points, p_asc, m, j, thinning_stream(seed, j), loo, mass);
      merge(loo, mass);
    }
  } else {
    const std::size_t block = std::min<std::size_t>(m, static_cast<std::size_t>(4 * threads));
    std::vector<std::vector<double>> loo(block, std::vector<double>(K * n)), mass(block, std::vector<double>(K));
    for (std::size_t start = 0; start < m; start += block) {
      const auto len = static_cast<std::ptrdiff_t>(std::min(block, m - start));
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t b = 0; b < len; ++b) {
        const std::size_t j = start + static_cast<std::size_t>(b);
        cv_replicate(domain, points, p_asc, m, j, thinning_stream(seed, j), loo[static_cast<std::size_t>(b)],
                     mass[static_cast<std::size_t>(b)]);
      }
      for (std::ptrdiff_t b = 0; b < len; ++b)
        merge(loo[static_cast<std::size_t>(b)], mass[static_cast<std::size_t>(b)]);
    }
  }

  std::vector<double> scores(K);
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = loo_sum[k * n + i];
      if (!(v > 0.0)) {
        s = -std::numeric_limits<double>::infinity();
        break;
      }
      s += std::log(v);
    }
    if (include_integral && std::isfinite(s)) s -= mass_sum[k];
    scores[k] = s;
  }
  return scores;
}

}  // namespace detail

/// Leave-one-out Poisson likelihood criterion; -inf when some leave-one-out
/// estimate vanishes at its data point. Throws TooFewPoints.
template <DomainBackend D>
double cv_score(const D& domain, std::span<const typename D::point_type> points, double p, std::size_t m,
                std::uint64_t seed, bool include_integral) {
  const double one[] = {p};
  return detail::cv_scores(domain, points, std::span<const double>(one), m, seed, include_integral)[0];
}

/// Argmax of the criterion over the grid, ties toward the smaller p.
/// Throws TooFewPoints or AllCandidatesDisqualified.
template <DomainBackend D>
CvResult select_p(const D& domain, std::span<const typename D::point_type> points, const PGrid& grid,
                  std::size_t m, std::uint64_t seed, bool include_integral = false) {
  CvResult r;
  r.p.assign(grid.values().begin(), grid.values().end());
  r.score = detail::cv_scores(domain, points, grid.values(), m, seed, include_integral);
  r.m = m;
  r.integral_included = include_integral;
  bool found = false;
  for (std::size_t k = 0; k < r.score.size(); ++k) {
    if (!std::isfinite(r.score[k])) continue;
    if (!found || r.score[k] > r.score[r.selected_index]) {
      r.selected_index = k;
      found = true;
    }
  }
  if (!found) throw Error(Errc::AllCandidatesDisqualified, "every candidate p has a vanishing leave-one-out estimate");
  r.selected_p = r.p[r.selected_index];
  r.advisory = r.selected_p > kAdvisoryCutoff;
  return r;
}

// Planar conveniences.
double cv_score(const PointPattern& pattern, double p, std::size_t m, std::uint64_t seed,
                bool include_integral, const RasterGrid& grid);
CvResult select_p(const PointPattern& pattern, const PGrid& grid, std::size_t m, std::uint64_t seed,
                  bool include_integral, const RasterGrid& raster);

}  // namespace rsv
