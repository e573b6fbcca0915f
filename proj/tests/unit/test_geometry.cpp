#include "doctest.h"

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/geometry.hpp"

using namespace rsv;

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

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

TEST_CASE("window construction and validation") {
  const auto w = PlanarWindow::rectangle(0, 0, 2, 1);
  CHECK(w.area() == 2.0);
  CHECK(w.contains({2.0, 1.0}));
  CHECK_FALSE(w.contains({2.0001, 0.5}));
  CHECK(code_of([] { PlanarWindow::rectangle(0, 0, 0, 1); }) == Errc::InvalidDomain);
  CHECK(code_of([] { PlanarWindow::rectangle(0, 1, 1, 0.5); }) == Errc::InvalidDomain);

  const auto tri = PlanarWindow::polygon({{0, 0}, {1, 0}, {0, 1}});
  CHECK(tri.area() == doctest::Approx(0.5));
  CHECK(tri.contains({0.25, 0.25}));
  CHECK(tri.contains({0.5, 0.5}));  // on the hypotenuse
  CHECK_FALSE(tri.contains({0.6, 0.6}));
  CHECK(code_of([] { PlanarWindow::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}); }) == Errc::InvalidDomain);
  CHECK(code_of([] { PlanarWindow::polygon({{0, 0}, {1, 1}}); }) == Errc::InvalidDomain);
}

TEST_CASE("clipped areas of a polygon") {
  const auto tri = PlanarWindow::polygon({{0, 0}, {1, 0}, {0, 1}});
  CHECK(tri.clipped_area(0, 0, 1, 1) == doctest::Approx(0.5));
  CHECK(tri.clipped_area(0, 0, 0.5, 0.5) == doctest::Approx(0.25));
  CHECK(tri.clipped_area(0.5, 0.5, 1, 1) == doctest::Approx(0.0));
  CHECK(tri.clipped_area(0.5, 0, 1, 0.5) == doctest::Approx(0.125));
}

TEST_CASE("raster measures sum to the window area") {
  const auto l_shape = PlanarWindow::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  const auto tri = PlanarWindow::polygon({{0.1, 0.05}, {0.97, 0.3}, {0.2, 0.91}});
  for (const auto* w : {&l_shape, &tri}) {
    for (int n : {7, 64, 128}) {
      const auto g = RasterGrid::square_pixels(*w, n);
      CHECK(std::abs(g.total_measure() - w->area()) <= 1e-9 * w->area());
    }
  }
  const auto rect = PlanarWindow::rectangle(-1, 2, 3, 4);
  const auto g = RasterGrid::square_pixels(rect, 100);
  CHECK(g.nx() == 100);
  CHECK(g.ny() == 50);
  CHECK(g.total_measure() == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(g.center(0).x == doctest::Approx(-1 + 0.02));
  CHECK(g.center(0).y == doctest::Approx(2 + 0.02));
  CHECK(g.cell_of({-0.999, 2.001}) == 0);
  CHECK(g.cell_of({2.999, 3.999}) == g.size() - 1);
}

TEST_CASE("patterns reject points outside the window and duplicates") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  CHECK(code_of([&] { PointPattern({{0.5, 0.5}, {1.5, 0.5}}, w); }) == Errc::PointOutsideDomain);
  CHECK(code_of([&] { PointPattern({{0.5, 0.5}, {0.5, 0.5}}, w); }) == Errc::DuplicatePoint);

  std::vector<Point2> pts = {{0.5, 0.5}, {0.5, 0.5}, {0.2, 0.2}, {0.5, 0.5}};
  CHECK(jitter_duplicates(pts, w, 1) == 2);
  const PointPattern pp(pts, w);
  CHECK(pp.size() == 4);
  CHECK(pts[2] == Point2{0.2, 0.2});
  for (std::size_t i : {0, 1, 3}) CHECK(std::abs(pts[i].x - 0.5) + std::abs(pts[i].y - 0.5) <= 2e-9);

  const auto sub = pp.subset(std::vector<std::size_t>{0, 2});
  CHECK(sub.size() == 2);
  CHECK(sub[1] == pp[2]);
}

TEST_CASE("cell_measures examples") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  const auto grid = RasterGrid::square_pixels(w, 128);
  SUBCASE("single point owns the window") {
    const auto t = cell_measures(PointPattern({{0.3, 0.8}}, w), grid);
    CHECK(t.cell_measure[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("mirror-symmetric pair") {
    const auto t = cell_measures(PointPattern({{0.25, 0.5}, {0.75, 0.5}}, w), grid);
    CHECK(t.cell_measure[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t.cell_measure[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("empty pattern") {
    CHECK(code_of([&] { cell_measures(PointPattern(std::vector<Point2>{}, w), grid); }) == Errc::EmptyPattern);
  }
}

TEST_CASE("envelope kernel matches the exhaustive reference exactly") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = 1 + seed * 7 % 300;
    auto pts = oracle::uniform_points(n, seed);
    if (seed % 3 == 0) {
      // Snap to a coarse lattice: shared abscissae and exact bisector ties.
      for (auto& p : pts) p = {std::round(p.x * 8) / 8, std::round(p.y * 8) / 8};
      std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      std::reverse(pts.begin(), pts.end());
    }
    const int nx = 16 + static_cast<int>(seed % 5) * 16;
    const auto grid = RasterGrid::cover(w, nx, 48);
    std::vector<std::int32_t> fast(grid.size()), ref(grid.size());
    kernels::nearest_owner(pts, grid, fast);
    kernels::nearest_owner_reference(pts, grid, ref);
    CHECK(fast == ref);
  }
}

TEST_CASE("pixels are owned by a nearest generator") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  const auto pts = oracle::uniform_points(50, 11);
  const auto grid = RasterGrid::square_pixels(w, 97);
  std::vector<std::int32_t> owner(grid.size());
  kernels::nearest_owner(pts, grid, owner);
  std::mt19937_64 gen(5);
  for (int k = 0; k < 10; ++k) {
    const std::size_t c = gen() % grid.size();
    const Point2 q = grid.center(c);
    const auto d = [&](std::size_t s) { return std::hypot(q.x - pts[s].x, q.y - pts[s].y); };
    for (std::size_t s = 0; s < pts.size(); ++s) CHECK(d(static_cast<std::size_t>(owner[c])) <= d(s));
  }
}

TEST_CASE("tessellation partitions the window and matches the brute-force oracle") {
  const auto poly = PlanarWindow::polygon({{0, 0}, {1, 0}, {1, 0.6}, {0.4, 1}, {0, 0.8}});
  const auto rect = PlanarWindow::rectangle(0, 0, 1, 1);
  for (const auto* w : {&rect, &poly}) {
    const auto grid = RasterGrid::square_pixels(*w, 64);
    const PlanarDomain domain(*w, grid);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::vector<Point2> pts;
      for (const auto& p : oracle::uniform_points(40, 100 + seed))
        if (w->contains(p)) pts.push_back(p);
      Tessellation t;
      domain.tessellate(pts, t);
      CHECK(std::abs(sum(t.cell_measure) - w->area()) <= 1e-9 * w->area());
      const auto brute = oracle::brute_tessellation(pts, grid);
      for (std::size_t g = 0; g < pts.size(); ++g) {
        CHECK(t.cell_measure[g] == doctest::Approx(brute.measure[g]).epsilon(1e-12));
        CHECK(t.cell_measure[g] > 0.0);
      }
    }
  }
}

TEST_CASE("a generator without pixel centres takes over its own pixel") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  const auto grid = RasterGrid::square_pixels(w, 4);
  // Both points sit in pixel (0,0) whose centre is (0.125, 0.125); the second
  // one is farther from every centre.
  const std::vector<Point2> pts = {{0.125, 0.125}, {0.01, 0.01}};
  Tessellation t;
  PlanarDomain(w, grid).tessellate(pts, t);
  CHECK(t.cell_measure[1] == doctest::Approx(1.0 / 16));
  CHECK(t.cell_measure[0] == doctest::Approx(15.0 / 16));
  CHECK(t.owner[0] == 1);
}

TEST_CASE("Monte Carlo oracle") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  SUBCASE("single point") {
    const auto est = mc_cell_measure_oracle(PointPattern({{0.4, 0.4}}, w), w, 1000, 1);
    CHECK(est[0].measure == 1.0);
    CHECK(est[0].standard_error == 0.0);
  }
  SUBCASE("three points partition the window") {
    const auto est = mc_cell_measure_oracle(PointPattern({{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}}, w), w, 100000, 2);
    CHECK(est[0].measure + est[1].measure + est[2].measure == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("symmetric pair") {
    const auto est = mc_cell_measure_oracle(PointPattern({{0.25, 0.5}, {0.75, 0.5}}, w), w, 1000000, 3);
    for (const auto& e : est) CHECK(std::abs(e.measure - 0.5) <= 3 * e.standard_error);
  }
  SUBCASE("agrees with exact cell areas") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto pts = oracle::uniform_points(5, 200 + seed);
      const auto exact = oracle::exact_cell_areas(pts, 0, 0, 1, 1);
      const auto est = mc_cell_measure_oracle(PointPattern(pts, w), w, 200000, seed);
      for (std::size_t k = 0; k < pts.size(); ++k)
        CHECK(std::abs(est[k].measure - exact[k]) <= 4 * est[k].standard_error + 1e-12);
    }
  }
}

TEST_CASE("raster cell measures converge to the exact cell areas") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  const auto pts = oracle::uniform_points(12, 77);
  const auto exact = oracle::exact_cell_areas(pts, 0, 0, 1, 1);
  for (int n : {32, 128, 512}) {
    const auto t = cell_measures(PointPattern(pts, w), RasterGrid::square_pixels(w, n));
    double worst = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) worst = std::max(worst, std::abs(t.cell_measure[k] - exact[k]));
    // Misassigned area lies within one pixel diagonal of a convex cell
    // boundary, whose length is at most the window perimeter.
    const double h = std::sqrt(2.0) / n;
    CHECK(worst <= 4.0 * h);
  }
}

TEST_CASE("removal measures agree with recomputing without the site") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  const auto grid = RasterGrid::square_pixels(w, 64);
  const PlanarDomain domain(w, grid);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = oracle::uniform_points(3 + seed * 4, 300 + seed);
    Tessellation t;
    domain.tessellate(pts, t);
    const auto removal = domain.removal_cell_measures(pts, t);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      std::vector<Point2> others;
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j != k) others.push_back(pts[j]);
      Tessellation without;
      domain.tessellate(others, without);
      const std::size_t heir = kernels::nearest_site(others, pts[k]);
      CHECK(removal[k] == doctest::Approx(without.cell_measure[heir]).epsilon(1e-12));
    }
  }
  Tessellation single;
  const std::vector<Point2> one = {{0.5, 0.5}};
  domain.tessellate(one, single);
  CHECK(domain.removal_cell_measures(one, single)[0] == 0.0);
}

TEST_CASE("tessellation is deterministic") {
  const auto w = PlanarWindow::rectangle(0, 0, 1, 1);
  const auto pts = oracle::uniform_points(200, 9);
  const auto grid = RasterGrid::square_pixels(w, 128);
  const auto a = cell_measures(PointPattern(pts, w), grid);
  const auto b = cell_measures(PointPattern(pts, w), grid);
  CHECK(a.owner == b.owner);
  CHECK(a.cell_measure == b.cell_measure);
}
