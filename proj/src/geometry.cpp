#include "narvis/geometry.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace narvis {

void BBox::expand(Point p) {
  if (empty) {
    min_x = max_x = p.x;
    min_y = max_y = p.y;
    empty = false;
    return;
  }
  min_x = std::min(min_x, p.x);
  min_y = std::min(min_y, p.y);
  max_x = std::max(max_x, p.x);
  max_y = std::max(max_y, p.y);
}

void BBox::expand(const BBox& other) {
  if (other.empty) return;
  expand(Point{other.min_x, other.min_y});
  expand(Point{other.max_x, other.max_y});
}

namespace {

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

void skip_separators(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ','))
    ++pos;
}

std::optional<double> read_number(std::string_view text, std::size_t& pos) {
  skip_separators(text, pos);
  if (pos >= text.size()) return std::nullopt;
  const char* first = text.data() + pos;
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  double v = 0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{}) return std::nullopt;
  pos = static_cast<std::size_t>(ptr - text.data());
  return v;
}

}  // namespace

Affine Affine::rotate(double degrees) {
  double r = radians(degrees);
  double cs = std::cos(r), sn = std::sin(r);
  return {cs, sn, -sn, cs, 0, 0};
}

Affine Affine::skew_x(double degrees) { return {1, 0, std::tan(radians(degrees)), 1, 0, 0}; }
Affine Affine::skew_y(double degrees) { return {1, std::tan(radians(degrees)), 0, 1, 0, 0}; }

Affine Affine::operator*(const Affine& m) const {
  return {a * m.a + c * m.b,       b * m.a + d * m.b,       a * m.c + c * m.d,
          b * m.c + d * m.d,       a * m.e + c * m.f + e,   b * m.e + d * m.f + f};
}

BBox Affine::apply(const BBox& box) const {
  BBox out;
  if (box.empty) return out;
  out.expand(apply(Point{box.min_x, box.min_y}));
  out.expand(apply(Point{box.max_x, box.min_y}));
  out.expand(apply(Point{box.min_x, box.max_y}));
  out.expand(apply(Point{box.max_x, box.max_y}));
  return out;
}

std::optional<Affine> parse_transform(std::string_view text) {
  Affine result;
  std::size_t pos = 0;
  while (true) {
    skip_separators(text, pos);
    if (pos >= text.size()) break;
    std::size_t name_start = pos;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    std::string_view name = text.substr(name_start, pos - name_start);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (name.empty() || pos >= text.size() || text[pos] != '(') return std::nullopt;
    ++pos;
    std::vector<double> args;
    while (true) {
      skip_separators(text, pos);
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
        break;
      }
      auto v = read_number(text, pos);
      if (!v) return std::nullopt;
      args.push_back(*v);
    }
    Affine step;
    const auto n = args.size();
    if (name == "matrix" && n == 6) {
      step = {args[0], args[1], args[2], args[3], args[4], args[5]};
    } else if (name == "translate" && (n == 1 || n == 2)) {
      step = Affine::translate(args[0], n == 2 ? args[1] : 0);
    } else if (name == "scale" && (n == 1 || n == 2)) {
      step = Affine::scale(args[0], n == 2 ? args[1] : args[0]);
    } else if (name == "rotate" && n == 1) {
      step = Affine::rotate(args[0]);
    } else if (name == "rotate" && n == 3) {
      step = Affine::translate(args[1], args[2]) * Affine::rotate(args[0]) * Affine::translate(-args[1], -args[2]);
    } else if (name == "skewX" && n == 1) {
      step = Affine::skew_x(args[0]);
    } else if (name == "skewY" && n == 1) {
      step = Affine::skew_y(args[0]);
    } else {
      return std::nullopt;
    }
    result = result * step;
  }
  return result;
}

std::string format_number(double v) {
  if (v == 0 || !std::isfinite(v)) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::optional<double> parse_length(std::string_view text) {
  std::size_t pos = 0;
  auto v = read_number(text, pos);
  if (!v) return std::nullopt;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  std::string_view unit = text.substr(pos);
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.remove_suffix(1);
  if (unit == "%") return std::nullopt;
  return v;
}

}  // namespace narvis
