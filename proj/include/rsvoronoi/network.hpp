#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/tessellation.hpp"

namespace rsv {

/// Canonical coordinates on a network: segment index and arc-length offset
/// from the segment's first vertex.
struct NetworkLocation {
  std::size_t segment = 0;
  double offset = 0.0;

  friend bool operator==(const NetworkLocation&, const NetworkLocation&) = default;
};

struct Segment {
  std::size_t from;
  std::size_t to;
  double length;
};

/// Connected undirected union of straight segments, measured by arc length.
class LinearNetwork {
 public:
  /// Throws InvalidDomain (bad indices, zero length, duplicates, loops) or
  /// DisconnectedNetwork.
  LinearNetwork(std::vector<Point2> vertices, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::span<const Point2> vertices() const noexcept { return vertices_; }
  std::span<const Segment> segments() const noexcept { return segments_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t segment_count() const noexcept { return segments_.size(); }
  double total_length() const noexcept { return total_length_; }

  struct Incidence {
    std::size_t neighbour;
    std::size_t segment;
  };
  std::span<const Incidence> incident(std::size_t vertex) const { return adjacency_[vertex]; }
  std::size_t degree(std::size_t vertex) const { return adjacency_[vertex].size(); }

  bool valid(NetworkLocation loc) const {
    return loc.segment < segments_.size() && loc.offset >= 0.0 &&
           loc.offset <= segments_[loc.segment].length;
  }
  Point2 position(NetworkLocation loc) const;

 private:
  std::vector<Point2> vertices_;
  std::vector<Segment> segments_;
  std::vector<std::vector<Incidence>> adjacency_;
  double total_length_ = 0.0;
};

/// Shortest-path distance from `source` to every vertex.
std::vector<double> vertex_distances(const LinearNetwork& net, NetworkLocation source);

double shortest_path_distance(const LinearNetwork& net, NetworkLocation a, NetworkLocation b);

/// Projects planar points onto the nearest segment. Throws
/// SnapToleranceExceeded naming the first point farther than `tol`.
std::vector<NetworkLocation> snap_points(const LinearNetwork& net, std::span<const Point2> xy,
                                         double tol);

/// Segments split into lixels no longer than the requested length.
class LixelGrid {
 public:
  static LixelGrid build(const LinearNetwork& net, double max_length);
  /// Default resolution: total length / 1000.
  static LixelGrid build(const LinearNetwork& net) { return build(net, net.total_length() / 1000.0); }

  std::size_t size() const noexcept { return measure_.size(); }
  std::span<const NetworkLocation> midpoints() const noexcept { return midpoint_; }
  std::span<const double> measures() const noexcept { return measure_; }
  double total_measure() const noexcept { return total_; }
  /// Lixels of segment s are [first(s), first(s + 1)).
  std::size_t first(std::size_t segment) const { return first_[segment]; }
  std::size_t lixel_of(NetworkLocation loc) const;

 private:
  std::vector<NetworkLocation> midpoint_;
  std::vector<double> measure_;
  std::vector<std::size_t> first_;
  double total_ = 0.0;
};

/// Network Voronoi partition of the lixel midpoints. Throws EmptyPattern.
Tessellation network_cell_measures(const LinearNetwork& net, std::span<const NetworkLocation> pattern,
                                   const LixelGrid& lixels);

/// Exact 1-D Voronoi cell lengths of points on [0, length] (any order).
std::vector<double> interval_cell_lengths(std::span<const double> offsets, double length);

/// Boundary-vertex extension compensating truncated cells. Appends one
/// dangling segment of length beta_u at each degree-1 vertex u with
/// beta_u = min_{x != x_u} d(x_u, x) / 2 - d(u, x_u) > 0, where x_u is the
/// pattern point nearest to u. Segment indices of the input are preserved.
/// Throws TooFewPoints if the pattern has fewer than 2 points.
LinearNetwork edge_corrected_extension(const LinearNetwork& net,
                                       std::span<const NetworkLocation> pattern);

/// Network metric-measure domain used by the estimators.
class NetworkDomain {
 public:
  using point_type = NetworkLocation;

  NetworkDomain(LinearNetwork net, LixelGrid lixels)
      : net_(std::move(net)), lixels_(std::move(lixels)) {}

  const LinearNetwork& network() const noexcept { return net_; }
  const LixelGrid& lixels() const noexcept { return lixels_; }
  std::size_t cell_count() const noexcept { return lixels_.size(); }
  std::span<const double> cell_measures() const noexcept { return lixels_.measures(); }
  bool contains(NetworkLocation loc) const { return net_.valid(loc); }

  /// Lixels go to the generator nearest to their midpoint; a generator left
  /// without lixels takes over the lixel it lies on.
  void tessellate(std::span<const NetworkLocation> sites, Tessellation& out) const;
  std::size_t nearest(std::span<const NetworkLocation> sites, NetworkLocation q) const;
  std::vector<std::size_t> nearest_many(std::span<const NetworkLocation> sites,
                                        std::span<const NetworkLocation> queries) const;
  std::vector<double> removal_cell_measures(std::span<const NetworkLocation> sites,
                                            const Tessellation& tess) const;

 private:
  LinearNetwork net_;
  LixelGrid lixels_;
};

}  // namespace rsv
