#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsvoronoi/tessellation.hpp"

namespace rsv {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Observation window: an axis-aligned rectangle, optionally narrowed to a
/// simple polygon that lies inside it.
class PlanarWindow {
 public:
  static PlanarWindow rectangle(double xmin, double ymin, double xmax, double ymax);
  /// Ring vertices in either orientation; the closing vertex may be omitted.
  static PlanarWindow polygon(std::vector<Point2> ring);

  double xmin() const noexcept { return xmin_; }
  double ymin() const noexcept { return ymin_; }
  double xmax() const noexcept { return xmax_; }
  double ymax() const noexcept { return ymax_; }
  double width() const noexcept { return xmax_ - xmin_; }
  double height() const noexcept { return ymax_ - ymin_; }

  bool is_rectangle() const noexcept { return ring_.empty(); }
  const std::vector<Point2>& ring() const noexcept { return ring_; }

  double area() const noexcept { return area_; }
  /// Closed-set membership (boundary points count as inside).
  bool contains(Point2 p) const;
  /// Exact area of window ∩ [x0,x1]×[y0,y1].
  double clipped_area(double x0, double y0, double x1, double y1) const;

 private:
  PlanarWindow() = default;

  double xmin_ = 0.0, ymin_ = 0.0, xmax_ = 1.0, ymax_ = 1.0;
  double area_ = 1.0;
  std::vector<Point2> ring_;
};

/// Finite set of distinct points inside a planar window.
class PointPattern {
 public:
  /// Throws PointOutsideDomain or DuplicatePoint.
  PointPattern(std::vector<Point2> points, PlanarWindow window);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::span<const Point2> points() const noexcept { return points_; }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  const PlanarWindow& window() const noexcept { return window_; }

  /// Sub-pattern with the given (ascending) indices; inherits validity.
  PointPattern subset(std::span<const std::size_t> indices) const;

 private:
  struct Trusted {};
  PointPattern(Trusted, std::vector<Point2> points, PlanarWindow window)
      : points_(std::move(points)), window_(std::move(window)) {}

  std::vector<Point2> points_;
  PlanarWindow window_;
};

/// Nudges repeated coordinates by at most 1e-9 window widths so that a
/// messy input can pass the distinctness check. Returns the number moved.
std::size_t jitter_duplicates(std::vector<Point2>& points, const PlanarWindow& window,
                              std::uint64_t seed);

/// Pixel raster over the window's bounding box. Row 0 is the southern row.
class RasterGrid {
 public:
  /// nx × ny pixels exactly covering the bounding box.
  static RasterGrid cover(const PlanarWindow& window, int nx, int ny);
  /// Square pixels, `n` of them along the longer side of the bounding box.
  static RasterGrid square_pixels(const PlanarWindow& window, int n);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double x0() const noexcept { return x0_; }
  double y0() const noexcept { return y0_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  std::size_t size() const noexcept { return measure_.size(); }

  std::span<const double> center_xs() const noexcept { return xs_; }
  std::span<const double> center_ys() const noexcept { return ys_; }
  Point2 center(std::size_t cell) const {
    return {xs_[cell % static_cast<std::size_t>(nx_)], ys_[cell / static_cast<std::size_t>(nx_)]};
  }
  /// Pixel area intersected with the window.
  std::span<const double> measures() const noexcept { return measure_; }
  double total_measure() const noexcept { return total_; }
  /// Pixel containing p (clamped to the raster).
  std::size_t cell_of(Point2 p) const;

 private:
  RasterGrid(const PlanarWindow& window, int nx, int ny, double dx, double dy);

  int nx_ = 0, ny_ = 0;
  double x0_ = 0.0, y0_ = 0.0, dx_ = 0.0, dy_ = 0.0;
  std::vector<double> xs_, ys_;
  std::vector<double> measure_;
  double total_ = 0.0;
};

namespace kernels {

/// Serial exhaustive nearest-generator assignment. Kept as the reference the
/// fast kernel is tested and benchmarked against.
void nearest_owner_reference(std::span<const Point2> sites, const RasterGrid& grid,
                             std::span<std::int32_t> owner);

/// Row-wise lower envelope of distance parabolas: O(ny·(n log n + nx)).
/// Rows run in parallel when called outside an OpenMP parallel region and the
/// problem is large enough. Ties go to the lowest generator index.
void nearest_owner(std::span<const Point2> sites, const RasterGrid& grid,
                   std::span<std::int32_t> owner);

/// Index of the site nearest to q (lowest index on ties).
std::size_t nearest_site(std::span<const Point2> sites, Point2 q);

}  // namespace kernels

/// Raster Voronoi cell measures. Throws EmptyPattern.
Tessellation cell_measures(const PointPattern& pattern, const RasterGrid& grid);

struct McCellEstimate {
  double measure;
  double standard_error;
};

/// Independent Monte Carlo estimate of each cell measure: uniform samples over
/// the bounding box, assigned to the nearest generator if inside the window.
std::vector<McCellEstimate> mc_cell_measure_oracle(const PointPattern& pattern,
                                                   const PlanarWindow& window,
                                                   std::size_t n_samples, std::uint64_t seed);

/// Planar metric-measure domain used by the estimators.
class PlanarDomain {
 public:
  using point_type = Point2;

  PlanarDomain(PlanarWindow window, RasterGrid grid)
      : window_(std::move(window)), grid_(std::move(grid)) {}

  const PlanarWindow& window() const noexcept { return window_; }
  const RasterGrid& grid() const noexcept { return grid_; }
  std::size_t cell_count() const noexcept { return grid_.size(); }
  std::span<const double> cell_measures() const noexcept { return grid_.measures(); }
  bool contains(Point2 p) const { return window_.contains(p); }

  /// Pixels go to the nearest generator. A generator whose cell holds no
  /// pixel centre takes over the pixel it lies in, so no generator is lost
  /// to the raster and Σ cell measures stays equal to the point count.
  void tessellate(std::span<const Point2> sites, Tessellation& out) const;
  std::size_t nearest(std::span<const Point2> sites, Point2 q) const {
    return kernels::nearest_site(sites, q);
  }
  std::vector<std::size_t> nearest_many(std::span<const Point2> sites,
                                        std::span<const Point2> queries) const;
  /// For each site k: measure of the cell that contains sites[k] once site k
  /// is removed from the tessellation. Zero when k is the only site.
  std::vector<double> removal_cell_measures(std::span<const Point2> sites,
                                            const Tessellation& tess) const;

 private:
  PlanarWindow window_;
  RasterGrid grid_;
};

}  // namespace rsv
