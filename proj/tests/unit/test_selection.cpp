#include "doctest.h"

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "rsvoronoi/network.hpp"
#include "rsvoronoi/selection.hpp"

using namespace rsv;

namespace {

const PlanarWindow kUnit = PlanarWindow::rectangle(0, 0, 1, 1);

/// Leave-one-out criterion computed by re-tessellating every reduced pattern.
double brute_cv(const std::vector<Point2>& pts, double p, std::size_t m, std::uint64_t seed, bool integral,
                const RasterGrid& grid) {
  const std::size_t reps = p == 1.0 ? 1 : m;
  const double weight = 1.0 / (static_cast<double>(reps) * p);
  double score = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < reps; ++j) {
      std::vector<Point2> kept;
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (k != i && oracle::mark(seed, j, k) < p) kept.push_back(pts[k]);
      if (kept.empty()) continue;
      const auto t = oracle::brute_tessellation(kept, grid);
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < kept.size(); ++s) {
        const double d = std::hypot(kept[s].x - pts[i].x, kept[s].y - pts[i].y);
        if (d < best) {
          best = d;
          nearest = s;
        }
      }
      if (t.measure[nearest] > 0.0) v += weight / t.measure[nearest];
    }
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    score += std::log(v);
  }
  if (integral) {
    const auto f = oracle::brute_smoothed(pts, grid, std::vector<double>(reps, p), seed);
    const auto meas = grid.measures();
    for (std::size_t c = 0; c < grid.size(); ++c) score -= f[c] * meas[c];
  }
  return score;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rsv::Error");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("rule of thumb") {
  const auto r = rule_of_thumb();
  CHECK(r.m == 200);
  CHECK(r.p_low == 0.1);
  CHECK(r.p_high == 0.3);
  CHECK(r.p_default == 0.2);
}

TEST_CASE("default candidate grid") {
  const auto g = default_p_grid();
  const std::vector<double> expected = {0.10, 0.13, 0.18, 0.24, 0.33, 0.44, 0.59, 0.80};
  CHECK(std::vector<double>(g.values().begin(), g.values().end()) == expected);
  const double ratio = std::pow(8.0, 1.0 / 7.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(g[k] > 0.0);
    CHECK(g[k] <= 1.0);
    // Listed values are the geometric sequence rounded to two decimals.
    CHECK(std::abs(g[k] - 0.1 * std::pow(ratio, static_cast<double>(k))) <= 0.005 + 1e-12);
  }
  CHECK_THROWS_AS(PGrid({0.2, 0.1}), Error);
  CHECK_THROWS_AS(PGrid({0.2, 0.2}), Error);
  CHECK_THROWS_AS(PGrid({0.0, 0.2}), Error);
  CHECK_THROWS_AS(PGrid({0.5, 1.2}), Error);
  CHECK_THROWS_AS(PGrid({}), Error);
}

TEST_CASE("two distant points") {
  const auto grid = RasterGrid::square_pixels(kUnit, 64);
  const PointPattern pp({{0.1, 0.1}, {0.9, 0.9}}, kUnit);
  CHECK(cv_score(pp, 1.0, 1, 0, true, grid) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(cv_score(pp, 1.0, 1, 0, false, grid) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cv_score(pp, 1.0, 25, 3, true, grid) == cv_score(pp, 1.0, 1, 0, true, grid));
}

TEST_CASE("a vanishing leave-one-out estimate disqualifies the candidate") {
  const auto grid = RasterGrid::square_pixels(kUnit, 32);
  const PointPattern pp({{0.2, 0.2}, {0.8, 0.7}}, kUnit);
  // Find a seed whose single thinning keeps neither point.
  std::uint64_t seed = 0;
  while (oracle::mark(seed, 0, 0) < 0.05 || oracle::mark(seed, 0, 1) < 0.05) ++seed;
  CHECK(cv_score(pp, 0.05, 1, seed, false, grid) == -std::numeric_limits<double>::infinity());
  CHECK(cv_score(pp, 0.05, 1, seed, true, grid) == -std::numeric_limits<double>::infinity());
  CHECK(code_of([&] { select_p(pp, PGrid({0.05}), 1, seed, false, grid); }) == Errc::AllCandidatesDisqualified);
  // A larger candidate survives and is selected.
  const auto r = select_p(pp, PGrid({0.05, 1.0}), 1, seed, false, grid);
  CHECK(r.selected_p == 1.0);
  CHECK(r.advisory);
}

TEST_CASE("criterion agrees with the brute-force leave-one-out oracle") {
  const auto grid = RasterGrid::square_pixels(kUnit, 40);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto pts = oracle::uniform_points(8 + 4 * seed, 600 + seed);
    const PointPattern pp(pts, kUnit);
    for (double p : {0.3, 0.7, 1.0})
      for (bool integral : {false, true}) {
        const double got = cv_score(pp, p, 6, seed, integral, grid);
        const double want = brute_cv(pts, p, 6, seed, integral, grid);
        INFO("seed " << seed << " p " << p << " integral " << integral);
        if (std::isinf(want)) {
          CHECK(got == want);
        } else {
          CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }
      }
  }
}

TEST_CASE("selection over a grid reuses the single-candidate scores") {
  const auto grid = RasterGrid::square_pixels(kUnit, 48);
  const PointPattern pp(oracle::uniform_points(40, 9), kUnit);
  const auto pg = default_p_grid();
  const auto r = select_p(pp, pg, 20, 5, true, grid);
  REQUIRE(r.score.size() == pg.size());
  CHECK(r.m == 20);
  CHECK(r.integral_included);
  for (std::size_t k = 0; k < pg.size(); ++k) CHECK(r.score[k] == cv_score(pp, pg[k], 20, 5, true, grid));
  for (double s : r.score)
    if (std::isfinite(s)) CHECK(s <= r.score[r.selected_index]);
  CHECK(r.selected_p == pg[r.selected_index]);
  CHECK(r.advisory == (r.selected_p > 0.3));

  const auto again = select_p(pp, pg, 20, 5, true, grid);
  CHECK(again.score == r.score);
}

TEST_CASE("single candidate") {
  const auto grid = RasterGrid::square_pixels(kUnit, 32);
  const PointPattern pp(oracle::uniform_points(20, 10), kUnit);
  const auto r = select_p(pp, PGrid({0.44}), 10, 1, false, grid);
  CHECK(r.selected_p == 0.44);
  CHECK(r.selected_index == 0);
  CHECK(r.advisory);
}

TEST_CASE("too few points") {
  const auto grid = RasterGrid::square_pixels(kUnit, 16);
  const PointPattern one({{0.5, 0.5}}, kUnit);
  CHECK(code_of([&] { cv_score(one, 0.5, 10, 0, false, grid); }) == Errc::TooFewPoints);
  CHECK(code_of([&] { select_p(one, default_p_grid(), 10, 0, false, grid); }) == Errc::TooFewPoints);
}

TEST_CASE("network criterion runs on the same machinery") {
  const LinearNetwork net({{0, 0}, {1, 0}, {1, 1}}, {{0, 1}, {1, 2}});
  const NetworkDomain domain(net, LixelGrid::build(net, 0.01));
  const std::vector<NetworkLocation> pts = {{0, 0.1}, {0, 0.6}, {1, 0.3}, {1, 0.9}};
  const auto r = select_p(domain, std::span<const NetworkLocation>(pts), PGrid({0.5, 1.0}), 30, 2, false);
  CHECK(std::isfinite(r.score[1]));
  // At p = 1 the leave-one-out value at x_i is 1 / (length of the merged cell).
  // Along the path the points sit at 0.1, 0.6, 1.3, 1.9 of total length 2.
  // Removing 0.1: 0.6 owns [0, 0.95]. Removing 0.6: 0.1 owns [0, 0.7].
  // Removing 1.3: 1.9 owns [1.25, 2]. Removing 1.9: 1.3 owns [0.95, 2].
  const double expected = -std::log(0.95) - std::log(0.7) - std::log(0.75) - std::log(1.05);
  CHECK(r.score[1] == doctest::Approx(expected).epsilon(1e-3));
}
