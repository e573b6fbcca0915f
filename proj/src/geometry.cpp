#include "rsvoronoi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <omp.h>

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/rng.hpp"

namespace rsv {
namespace {

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double signed_area(const std::vector<Point2>& ring) {
  double twice = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    const Point2& a = ring[i];
    const Point2& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

bool on_segment(Point2 p, Point2 a, Point2 b, double tol) {
  if (std::abs(cross(a, b, p)) > tol * std::hypot(b.x - a.x, b.y - a.y)) return false;
  return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
         p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b);
  const double d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto within = [](Point2 p, Point2 q, Point2 r) {
    return r.x >= std::min(p.x, q.x) && r.x <= std::max(p.x, q.x) && r.y >= std::min(p.y, q.y) &&
           r.y <= std::max(p.y, q.y);
  };
  return (d1 == 0 && within(c, d, a)) || (d2 == 0 && within(c, d, b)) ||
         (d3 == 0 && within(a, b, c)) || (d4 == 0 && within(a, b, d));
}

// Sutherland–Hodgman against one axis-aligned half-plane.
template <class Inside, class Cut>
void clip_half_plane(std::vector<Point2>& poly, std::vector<Point2>& scratch, Inside inside,
                     Cut cut) {
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 cur = poly[i];
    const Point2 prev = poly[(i + n - 1) % n];
    const bool in_cur = inside(cur), in_prev = inside(prev);
    if (in_cur) {
      if (!in_prev) scratch.push_back(cut(prev, cur));
      scratch.push_back(cur);
    } else if (in_prev) {
      scratch.push_back(cut(prev, cur));
    }
  }
  poly.swap(scratch);
}

}  // namespace

// ---------------------------------------------------------------------------
// PlanarWindow

PlanarWindow PlanarWindow::rectangle(double xmin, double ymin, double xmax, double ymax) {
  if (!(xmax > xmin) || !(ymax > ymin) || !std::isfinite(xmin) || !std::isfinite(ymin) ||
      !std::isfinite(xmax) || !std::isfinite(ymax))
    throw Error(Errc::InvalidDomain, "window needs xmax > xmin and ymax > ymin");
  PlanarWindow w;
  w.xmin_ = xmin;
  w.ymin_ = ymin;
  w.xmax_ = xmax;
  w.ymax_ = ymax;
  w.area_ = (xmax - xmin) * (ymax - ymin);
  return w;
}

PlanarWindow PlanarWindow::polygon(std::vector<Point2> ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) throw Error(Errc::InvalidDomain, "polygon ring needs at least 3 vertices");
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
        throw Error(Errc::InvalidDomain, "polygon ring is self-intersecting");
    }
  }
  const double area = std::abs(signed_area(ring));
  if (!(area > 0.0)) throw Error(Errc::InvalidDomain, "polygon has zero area");

  PlanarWindow w;
  w.xmin_ = w.xmax_ = ring[0].x;
  w.ymin_ = w.ymax_ = ring[0].y;
  for (const Point2& p : ring) {
    w.xmin_ = std::min(w.xmin_, p.x);
    w.xmax_ = std::max(w.xmax_, p.x);
    w.ymin_ = std::min(w.ymin_, p.y);
    w.ymax_ = std::max(w.ymax_, p.y);
  }
  w.area_ = area;
  w.ring_ = std::move(ring);
  return w;
}

bool PlanarWindow::contains(Point2 p) const {
  if (p.x < xmin_ || p.x > xmax_ || p.y < ymin_ || p.y > ymax_) return false;
  if (ring_.empty()) return true;
  const std::size_t n = ring_.size();
  const double tol = 1e-12 * std::max(width(), height());
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = ring_[i];
    const Point2& b = ring_[j];
    if (on_segment(p, a, b, tol)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double PlanarWindow::clipped_area(double x0, double y0, double x1, double y1) const {
  if (ring_.empty()) {
    const double w = std::min(x1, xmax_) - std::max(x0, xmin_);
    const double h = std::min(y1, ymax_) - std::max(y0, ymin_);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
  }
  std::vector<Point2> poly = ring_, scratch;
  scratch.reserve(poly.size() + 8);
  auto lerp_x = [](Point2 a, Point2 b, double x) {
    const double t = (x - a.x) / (b.x - a.x);
    return Point2{x, a.y + t * (b.y - a.y)};
  };
  auto lerp_y = [](Point2 a, Point2 b, double y) {
    const double t = (y - a.y) / (b.y - a.y);
    return Point2{a.x + t * (b.x - a.x), y};
  };
  clip_half_plane(poly, scratch, [&](Point2 p) { return p.x >= x0; },
                  [&](Point2 a, Point2 b) { return lerp_x(a, b, x0); });
  if (poly.empty()) return 0.0;
  clip_half_plane(poly, scratch, [&](Point2 p) { return p.x <= x1; },
                  [&](Point2 a, Point2 b) { return lerp_x(a, b, x1); });
  if (poly.empty()) return 0.0;
  clip_half_plane(poly, scratch, [&](Point2 p) { return p.y >= y0; },
                  [&](Point2 a, Point2 b) { return lerp_y(a, b, y0); });
  if (poly.empty()) return 0.0;
  clip_half_plane(poly, scratch, [&](Point2 p) { return p.y <= y1; },
                  [&](Point2 a, Point2 b) { return lerp_y(a, b, y1); });
  if (poly.size() < 3) return 0.0;
  return std::abs(signed_area(poly));
}

// ---------------------------------------------------------------------------
// PointPattern

PointPattern::PointPattern(std::vector<Point2> points, PlanarWindow window)
    : points_(std::move(points)), window_(std::move(window)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point2 p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !window_.contains(p))
      throw Error(Errc::PointOutsideDomain,
                  "point " + std::to_string(i) + " (" + std::to_string(p.x) + ", " +
                      std::to_string(p.y) + ") lies outside the window");
  }
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points_[a].x < points_[b].x || (points_[a].x == points_[b].x && points_[a].y < points_[b].y);
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points_[order[k]] == points_[order[k - 1]])
      throw Error(Errc::DuplicatePoint, "points " + std::to_string(std::min(order[k], order[k - 1])) +
                                            " and " + std::to_string(std::max(order[k], order[k - 1])) +
                                            " coincide");
  }
}

PointPattern PointPattern::subset(std::span<const std::size_t> indices) const {
  std::vector<Point2> pts;
  pts.reserve(indices.size());
  for (std::size_t i : indices) pts.push_back(points_.at(i));
  return PointPattern(Trusted{}, std::move(pts), window_);
}

std::size_t jitter_duplicates(std::vector<Point2>& points, const PlanarWindow& window,
                              std::uint64_t seed) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y) ||
           (points[a] == points[b] && a < b);
  };
  std::sort(order.begin(), order.end(), less);
  const double eps = 1e-9 * window.width();
  RngStream rng(seed, {stream_tag::kJitter});
  std::size_t moved = 0;
  Point2 previous = order.empty() ? Point2{} : points[order[0]];
  for (std::size_t k = 1; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const Point2 base = points[i];
    const bool duplicate = base == previous;
    previous = base;
    if (!duplicate) continue;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Point2 q{base.x + eps * (2.0 * rng.uniform() - 1.0),
                     base.y + eps * (2.0 * rng.uniform() - 1.0)};
      if (!(q == base) && window.contains(q)) {
        points[i] = q;
        ++moved;
        break;
      }
    }
  }
  return moved;
}

// ---------------------------------------------------------------------------
// RasterGrid

RasterGrid::RasterGrid(const PlanarWindow& window, int nx, int ny, double dx, double dy)
    : nx_(nx), ny_(ny), x0_(window.xmin()), y0_(window.ymin()), dx_(dx), dy_(dy) {
  xs_.resize(static_cast<std::size_t>(nx));
  ys_.resize(static_cast<std::size_t>(ny));
  for (int c = 0; c < nx; ++c) xs_[c] = x0_ + (c + 0.5) * dx_;
  for (int r = 0; r < ny; ++r) ys_[r] = y0_ + (r + 0.5) * dy_;
  measure_.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int r = 0; r < ny; ++r) {
    const double ylo = y0_ + r * dy_, yhi = (r + 1 == ny) ? std::max(window.ymax(), y0_ + ny * dy_)
                                                          : y0_ + (r + 1) * dy_;
    for (int c = 0; c < nx; ++c) {
      const double xlo = x0_ + c * dx_, xhi = (c + 1 == nx) ? std::max(window.xmax(), x0_ + nx * dx_)
                                                            : x0_ + (c + 1) * dx_;
      measure_[static_cast<std::size_t>(r) * nx + c] = window.clipped_area(xlo, ylo, xhi, yhi);
    }
  }
  total_ = std::accumulate(measure_.begin(), measure_.end(), 0.0);
}

RasterGrid RasterGrid::cover(const PlanarWindow& window, int nx, int ny) {
  if (nx < 1 || ny < 1) throw Error(Errc::InvalidDomain, "raster needs nx, ny >= 1");
  return RasterGrid(window, nx, ny, window.width() / nx, window.height() / ny);
}

RasterGrid RasterGrid::square_pixels(const PlanarWindow& window, int n) {
  if (n < 1) throw Error(Errc::InvalidDomain, "raster needs at least one pixel");
  const double side = std::max(window.width(), window.height()) / n;
  const int nx = std::max(1, static_cast<int>(std::ceil(window.width() / side - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(window.height() / side - 1e-9)));
  return RasterGrid(window, nx, ny, side, side);
}

std::size_t RasterGrid::cell_of(Point2 p) const {
  const int c = std::clamp(static_cast<int>(std::floor((p.x - x0_) / dx_)), 0, nx_ - 1);
  const int r = std::clamp(static_cast<int>(std::floor((p.y - y0_) / dy_)), 0, ny_ - 1);
  return static_cast<std::size_t>(r) * nx_ + c;
}

// ---------------------------------------------------------------------------
// Kernels

namespace kernels {

void nearest_owner_reference(std::span<const Point2> sites, const RasterGrid& grid,
                             std::span<std::int32_t> owner) {
  const auto xs = grid.center_xs();
  const auto ys = grid.center_ys();
  const std::size_t nx = xs.size();
  for (std::size_t r = 0; r < ys.size(); ++r) {
    for (std::size_t c = 0; c < nx; ++c) {
      double best = std::numeric_limits<double>::infinity();
      std::int32_t arg = -1;
      for (std::size_t s = 0; s < sites.size(); ++s) {
        const double dx = xs[c] - sites[s].x;
        const double dy = ys[r] - sites[s].y;
        const double d = dx * dx + dy * dy;
        if (d < best) {
          best = d;
          arg = static_cast<std::int32_t>(s);
        }
      }
      owner[r * nx + c] = arg;
    }
  }
}

void nearest_owner(std::span<const Point2> sites, const RasterGrid& grid,
                   std::span<std::int32_t> owner) {
  const std::size_t n = sites.size();
  const auto xs = grid.center_xs();
  const auto ys = grid.center_ys();
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  if (n == 0) return;

  // Sites ordered by (x, index) once; the row loop only changes the heights.
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return sites[a].x < sites[b].x || (sites[a].x == sites[b].x && a < b);
  });
  std::vector<double> sx(n), sy(n);
  for (std::size_t k = 0; k < n; ++k) {
    sx[k] = sites[order[k]].x;
    sy[k] = sites[order[k]].y;
  }

  const bool go_parallel = !omp_in_parallel() && n * static_cast<std::size_t>(ny) * nx > (1u << 22);
#pragma omp parallel if (go_parallel)
  {
    std::vector<double> h(n), z(n + 1);
    std::vector<std::int32_t> env(n);
#pragma omp for schedule(static)
    for (int r = 0; r < ny; ++r) {
      const double yr = ys[r];
      for (std::size_t k = 0; k < n; ++k) {
        const double dy = yr - sy[k];
        h[k] = dy * dy;
      }
      int top = -1;
      for (std::size_t q = 0; q < n; ++q) {
        if (top >= 0 && sx[env[top]] == sx[q]) {
          // Same abscissa: parabolas are nested, keep the lower (earlier index on ties).
          if (!(h[q] < h[env[top]])) continue;
          --top;
        }
        double s = -std::numeric_limits<double>::infinity();
        while (top >= 0) {
          const std::int32_t v = env[top];
          s = 0.5 * (sx[q] + sx[v]) + (h[q] - h[v]) / (2.0 * (sx[q] - sx[v]));
          if (s <= z[top]) {
            --top;
          } else {
            break;
          }
        }
        if (top < 0) s = -std::numeric_limits<double>::infinity();
        ++top;
        env[top] = static_cast<std::int32_t>(q);
        z[top] = s;
      }
      const int count = top + 1;
      z[count] = std::numeric_limits<double>::infinity();

      auto dist = [&](std::int32_t k, double x) {
        const double dx = x - sx[k];
        return dx * dx + h[k];
      };
      int k = 0;
      std::int32_t* row = owner.data() + static_cast<std::size_t>(r) * nx;
      for (int c = 0; c < nx; ++c) {
        const double x = xs[c];
        while (k + 1 < count && z[k + 1] < x) ++k;
        // Boundary rounding: settle against the envelope neighbours exactly.
        std::int32_t best = env[k];
        double best_d = dist(best, x);
        auto consider = [&](int j) {
          const std::int32_t cand = env[j];
          const double d = dist(cand, x);
          if (d < best_d || (d == best_d && order[cand] < order[best])) {
            best = cand;
            best_d = d;
          }
        };
        if (k > 0) consider(k - 1);
        if (k + 1 < count) consider(k + 1);
        row[c] = order[best];
      }
    }
  }
}

std::size_t nearest_site(std::span<const Point2> sites, Point2 q) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const double dx = q.x - sites[s].x;
    const double dy = q.y - sites[s].y;
    const double d = dx * dx + dy * dy;
    if (d < best) {
      best = d;
      arg = s;
    }
  }
  return arg;
}

}  // namespace kernels

// ---------------------------------------------------------------------------

void PlanarDomain::tessellate(std::span<const Point2> sites, Tessellation& out) const {
  out.owner.resize(grid_.size());
  out.cell_measure.assign(sites.size(), 0.0);
  if (sites.empty()) {
    std::fill(out.owner.begin(), out.owner.end(), -1);
    return;
  }
  kernels::nearest_owner(sites, grid_, out.owner);
  const auto m = grid_.measures();
  for (std::size_t c = 0; c < m.size(); ++c) out.cell_measure[out.owner[c]] += m[c];
  if (std::find(out.cell_measure.begin(), out.cell_measure.end(), 0.0) == out.cell_measure.end()) return;
  std::vector<std::size_t> home(sites.size());
  for (std::size_t g = 0; g < sites.size(); ++g) home[g] = grid_.cell_of(sites[g]);
  detail::claim_home_cells(out, m, home);
}

std::vector<std::size_t> PlanarDomain::nearest_many(std::span<const Point2> sites,
                                                    std::span<const Point2> queries) const {
  std::vector<std::size_t> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) out[q] = kernels::nearest_site(sites, queries[q]);
  return out;
}

std::vector<double> PlanarDomain::removal_cell_measures(std::span<const Point2> sites,
                                                        const Tessellation& tess) const {
  const std::size_t n = sites.size();
  std::vector<double> result(n, 0.0);
  if (n < 2) return result;

  // Bucket pixels by owner (counting sort).
  std::vector<std::size_t> start(n + 1, 0);
  for (std::int32_t o : tess.owner) ++start[static_cast<std::size_t>(o) + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<std::size_t> cells(tess.owner.size());
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t c = 0; c < tess.owner.size(); ++c) cells[fill[tess.owner[c]]++] = c;
  }

  const auto m = grid_.measures();
  std::vector<std::size_t> near;
  auto sq = [](Point2 a, Point2 b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
  };
  for (std::size_t k = 0; k < n; ++k) {
    const Point2 xk = sites[k];
    double best = std::numeric_limits<double>::infinity();
    std::size_t heir = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (s == k) continue;
      const double d = sq(xk, sites[s]);
      if (d < best) {
        best = d;
        heir = s;
      }
    }
    // Any site nearest to one of k's pixels lies within 2R + d(x_k, heir).
    double reach = 0.0;
    for (std::size_t idx = start[k]; idx < start[k + 1]; ++idx)
      reach = std::max(reach, sq(grid_.center(cells[idx]), xk));
    const double radius = 2.0 * std::sqrt(reach) + std::sqrt(best);
    const double radius2 = radius * radius * (1.0 + 1e-12) + 1e-300;
    near.clear();
    for (std::size_t s = 0; s < n; ++s)
      if (s != k && sq(xk, sites[s]) <= radius2) near.push_back(s);

    double gained = 0.0;
    for (std::size_t idx = start[k]; idx < start[k + 1]; ++idx) {
      const std::size_t c = cells[idx];
      const Point2 q = grid_.center(c);
      double b = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t s : near) {
        const double d = sq(q, sites[s]);
        if (d < b) {
          b = d;
          arg = s;
        }
      }
      if (arg == heir) gained += m[c];
    }
    result[k] = tess.cell_measure[heir] + gained;
  }
  return result;
}

Tessellation cell_measures(const PointPattern& pattern, const RasterGrid& grid) {
  if (pattern.empty()) throw Error(Errc::EmptyPattern, "cannot tessellate an empty pattern");
  Tessellation t;
  PlanarDomain(pattern.window(), grid).tessellate(pattern.points(), t);
  return t;
}

std::vector<McCellEstimate> mc_cell_measure_oracle(const PointPattern& pattern,
                                                   const PlanarWindow& window,
                                                   std::size_t n_samples, std::uint64_t seed) {
  if (pattern.empty()) throw Error(Errc::EmptyPattern, "oracle needs at least one generator");
  if (n_samples == 0) throw Error(Errc::ConfigMismatch, "oracle needs n_samples >= 1");
  const RngStream rng(seed, {stream_tag::kOracle});
  std::vector<std::size_t> hits(pattern.size(), 0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Point2 q{window.xmin() + window.width() * rng.uniform_at(2 * s),
                   window.ymin() + window.height() * rng.uniform_at(2 * s + 1)};
    if (!window.contains(q)) continue;
    ++hits[kernels::nearest_site(pattern.points(), q)];
  }
  const double box = window.width() * window.height();
  const double total = static_cast<double>(n_samples);
  std::vector<McCellEstimate> out(pattern.size());
  for (std::size_t k = 0; k < hits.size(); ++k) {
    const double f = static_cast<double>(hits[k]) / total;
    out[k] = {box * f, box * std::sqrt(f * (1.0 - f) / total)};
  }
  return out;
}

}  // namespace rsv
