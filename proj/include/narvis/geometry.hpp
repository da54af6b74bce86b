#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace narvis {

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

/// Axis-aligned bounding box; default-constructed boxes are empty.
struct BBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool empty = true;

  void expand(Point p);
  void expand(const BBox& other);
  double width() const { return empty ? 0 : max_x - min_x; }
  double height() const { return empty ? 0 : max_y - min_y; }
  double area() const { return width() * height(); }
  Point center() const { return empty ? Point{} : Point{(min_x + max_x) / 2, (min_y + max_y) / 2}; }
};

/// 2D affine map in SVG matrix(a b c d e f) form:
///   x' = a*x + c*y + e,  y' = b*x + d*y + f
struct Affine {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  static Affine translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static Affine scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  static Affine rotate(double degrees);
  static Affine skew_x(double degrees);
  static Affine skew_y(double degrees);

  /// this ∘ rhs: rhs is applied first.
  Affine operator*(const Affine& rhs) const;
  Point apply(Point p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }
  BBox apply(const BBox& box) const;
  double determinant() const { return a * d - b * c; }
  bool is_identity() const { return a == 1 && b == 0 && c == 0 && d == 1 && e == 0 && f == 0; }
  bool operator==(const Affine&) const = default;
};

/// Parses an SVG transform list. Returns nullopt on malformed input.
std::optional<Affine> parse_transform(std::string_view text);

/// Shortest round-trip decimal text for a double ("-0" folds to "0").
std::string format_number(double v);

/// Parses a leading SVG length/number ("12", "3.5px", "1e2"). Units other than
/// px are ignored; percentages return nullopt.
std::optional<double> parse_length(std::string_view text);

}  // namespace narvis
