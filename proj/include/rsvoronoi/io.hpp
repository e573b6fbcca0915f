#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/network.hpp"

namespace rsv::io {

namespace fs = std::filesystem;

/// Shortest decimal form that round-trips, or %.6g when `short_form`.
std::string format_number(double v, bool short_form = false);

/// Writes via a temporary sibling and rename, so a failed run leaves no
/// partial file. Throws IoError.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

/// Two numeric columns; an optional non-numeric header line is skipped.
/// Throws ParseError naming the offending line.
std::vector<Point2> parse_points_csv(std::string_view text);
std::vector<Point2> read_points_csv(const fs::path& path);
std::string points_csv(std::span<const Point2> points);

/// {"vertices": [[x, y], ...], "edges": [[i, j], ...]}
LinearNetwork parse_network_json(std::string_view text);
LinearNetwork read_network_json(const fs::path& path);
std::string network_json(const LinearNetwork& net);

/// segment,offset rows with optional header.
std::vector<NetworkLocation> parse_locations_csv(std::string_view text);
std::vector<NetworkLocation> read_locations_csv(const fs::path& path);
std::string locations_csv(std::span<const NetworkLocation> locations);

/// ESRI ASCII grid, rows north to south; pixels outside the window are
/// written as NODATA_value -9999.
std::string ascii_grid(const RasterGrid& grid, std::span<const double> values);

struct AsciiGrid {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 0.0;
  double nodata = -9999.0;
  std::vector<double> values;  // as written: row-major, north to south
};
AsciiGrid parse_ascii_grid(std::string_view text);

/// segment,offset,value,measure per lixel (offset = lixel midpoint).
std::string network_field_csv(const LixelGrid& lixels, std::span<const double> values);

}  // namespace rsv::io
