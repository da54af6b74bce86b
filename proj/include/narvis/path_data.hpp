#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "narvis/geometry.hpp"

namespace narvis {

/// One command as written in the `d` attribute. Implicit repeats are expanded
/// into their own entries (a moveto's extra pairs become lineto entries).
struct PathCommand {
  char letter;
  std::vector<double> args;
};

struct ParsedPath {
  std::vector<PathCommand> commands;
  /// Empty when the whole attribute parsed. Otherwise `commands` holds the
  /// prefix that was valid before the error.
  std::string error;
};

ParsedPath parse_path_data(std::string_view d);

/// Uppercased command letters, coordinates ignored ("MCCZ").
std::string path_signature(const ParsedPath& path);

/// Absolute segment: M(x y), L(x y), C(x1 y1 x2 y2 x y), Q(x1 y1 x y),
/// A(rx ry rot large sweep x y), Z(). H/V/S/T are rewritten to L/C/Q.
struct PathSegment {
  char kind;
  std::vector<double> args;
};

std::vector<PathSegment> to_absolute(const ParsedPath& path);

/// Exact bounds for lines and Béziers; arcs are bounded by dense sampling.
BBox path_bbox(const std::vector<PathSegment>& segments);

/// Polyline approximation, `per_curve` points per curved segment.
std::vector<Point> flatten(const std::vector<PathSegment>& segments, int per_curve = 16);

/// `count` points spaced uniformly by arc length along the polyline.
std::vector<Point> resample(const std::vector<Point>& polyline, int count);

std::string format_segments(const std::vector<PathSegment>& segments);

}  // namespace narvis
