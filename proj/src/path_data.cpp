#include "narvis/path_data.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace narvis {

namespace {

int arg_count(char upper) {
  switch (upper) {
    case 'M': case 'L': case 'T': return 2;
    case 'H': case 'V': return 1;
    case 'C': return 6;
    case 'S': case 'Q': return 4;
    case 'A': return 7;
    case 'Z': return 0;
    default: return -1;
  }
}

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  void skip() {
    while (pos_ < text_.size() && (std::isspace(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == ','))
      ++pos_;
  }
  bool done() {
    skip();
    return pos_ >= text_.size();
  }
  char peek() const { return text_[pos_]; }
  void advance() { ++pos_; }
  std::size_t pos() const { return pos_; }

  bool number(double& out) {
    skip();
    if (pos_ >= text_.size()) return false;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || !std::isfinite(out)) return false;
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return true;
  }

  bool flag(double& out) {
    skip();
    if (pos_ >= text_.size() || (text_[pos_] != '0' && text_[pos_] != '1')) return false;
    out = text_[pos_] - '0';
    ++pos_;
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

// Endpoint-to-center conversion for elliptical arcs; returns `n` points after
// the start point, ending exactly at (x, y).
std::vector<Point> arc_points(Point from, double rx, double ry, double phi_deg, bool large, bool sweep, Point to,
                              int n) {
  std::vector<Point> out;
  rx = std::abs(rx);
  ry = std::abs(ry);
  if (rx == 0 || ry == 0 || (from.x == to.x && from.y == to.y)) {
    out.push_back(to);
    return out;
  }
  const double phi = phi_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double dx = (from.x - to.x) / 2, dy = (from.y - to.y) / 2;
  const double x1p = cs * dx + sn * dy;
  const double y1p = -sn * dx + cs * dy;
  double lambda = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry);
  if (lambda > 1) {
    rx *= std::sqrt(lambda);
    ry *= std::sqrt(lambda);
  }
  double num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p;
  double den = rx * rx * y1p * y1p + ry * ry * x1p * x1p;
  double coef = den == 0 ? 0 : std::sqrt(std::max(0.0, num / den));
  if (large == sweep) coef = -coef;
  const double cxp = coef * rx * y1p / ry;
  const double cyp = -coef * ry * x1p / rx;
  const double cx = cs * cxp - sn * cyp + (from.x + to.x) / 2;
  const double cy = sn * cxp + cs * cyp + (from.y + to.y) / 2;
  auto angle = [](double ux, double uy, double vx, double vy) {
    return std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
  };
  const double theta1 = angle(1, 0, (x1p - cxp) / rx, (y1p - cyp) / ry);
  double delta = angle((x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry);
  if (!sweep && delta > 0) delta -= 2 * std::numbers::pi;
  if (sweep && delta < 0) delta += 2 * std::numbers::pi;
  for (int i = 1; i <= n; ++i) {
    if (i == n) {
      out.push_back(to);
      break;
    }
    double t = theta1 + delta * i / n;
    double ex = rx * std::cos(t), ey = ry * std::sin(t);
    out.push_back({cs * ex - sn * ey + cx, sn * ex + cs * ey + cy});
  }
  return out;
}

Point cubic_at(Point p0, Point p1, Point p2, Point p3, double t) {
  double u = 1 - t;
  double a = u * u * u, b = 3 * u * u * t, c = 3 * u * t * t, d = t * t * t;
  return {a * p0.x + b * p1.x + c * p2.x + d * p3.x, a * p0.y + b * p1.y + c * p2.y + d * p3.y};
}

Point quad_at(Point p0, Point p1, Point p2, double t) {
  double u = 1 - t;
  return {u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x, u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y};
}

// Roots in (0,1) of a*t^2 + b*t + c.
std::vector<double> unit_roots(double a, double b, double c) {
  std::vector<double> roots;
  constexpr double eps = 1e-12;
  if (std::abs(a) < eps) {
    if (std::abs(b) > eps) roots.push_back(-c / b);
  } else {
    double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      double sq = std::sqrt(disc);
      roots.push_back((-b + sq) / (2 * a));
      roots.push_back((-b - sq) / (2 * a));
    }
  }
  std::erase_if(roots, [](double t) { return !(t > 0 && t < 1); });
  return roots;
}

}  // namespace

ParsedPath parse_path_data(std::string_view d) {
  ParsedPath out;
  Scanner sc(d);
  char current = 0;
  while (!sc.done()) {
    char c = sc.peek();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (arg_count(upper) < 0) {
        out.error = "unknown path command '" + std::string(1, c) + "' at offset " + std::to_string(sc.pos());
        return out;
      }
      if (current == 0 && upper != 'M') {
        out.error = "path must start with a moveto";
        return out;
      }
      sc.advance();
      current = c;
      if (upper == 'Z') {
        out.commands.push_back({c, {}});
        continue;
      }
    } else if (current == 0) {
      out.error = "path must start with a moveto";
      return out;
    } else if (std::toupper(static_cast<unsigned char>(current)) == 'Z') {
      out.error = "unexpected number after closepath at offset " + std::to_string(sc.pos());
      return out;
    }
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(current)));
    const int n = arg_count(upper);
    PathCommand cmd{current, {}};
    cmd.args.reserve(n);
    for (int i = 0; i < n; ++i) {
      double v = 0;
      bool ok = (upper == 'A' && (i == 3 || i == 4)) ? sc.flag(v) : sc.number(v);
      if (!ok) {
        out.error = "malformed arguments for '" + std::string(1, current) + "' at offset " + std::to_string(sc.pos());
        return out;
      }
      cmd.args.push_back(v);
    }
    out.commands.push_back(std::move(cmd));
    // A moveto's implicit repeats are linetos.
    if (current == 'M') current = 'L';
    if (current == 'm') current = 'l';
  }
  return out;
}

std::string path_signature(const ParsedPath& path) {
  std::string sig;
  for (const auto& cmd : path.commands) sig += static_cast<char>(std::toupper(static_cast<unsigned char>(cmd.letter)));
  return sig;
}

std::vector<PathSegment> to_absolute(const ParsedPath& path) {
  std::vector<PathSegment> out;
  Point cur, start, last_ctrl;
  char prev = 0;
  for (const auto& cmd : path.commands) {
    const bool rel = std::islower(static_cast<unsigned char>(cmd.letter));
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(cmd.letter)));
    const auto& a = cmd.args;
    auto pt = [&](std::size_t i) { return rel ? Point{cur.x + a[i], cur.y + a[i + 1]} : Point{a[i], a[i + 1]}; };
    switch (upper) {
      case 'M': {
        Point p = pt(0);
        out.push_back({'M', {p.x, p.y}});
        cur = start = p;
        break;
      }
      case 'L': case 'H': case 'V': {
        Point p = cur;
        if (upper == 'L') p = pt(0);
        if (upper == 'H') p.x = rel ? cur.x + a[0] : a[0];
        if (upper == 'V') p.y = rel ? cur.y + a[0] : a[0];
        out.push_back({'L', {p.x, p.y}});
        cur = p;
        break;
      }
      case 'C': case 'S': {
        Point c1, c2, p;
        if (upper == 'C') {
          c1 = pt(0);
          c2 = pt(2);
          p = pt(4);
        } else {
          c1 = (prev == 'C') ? Point{2 * cur.x - last_ctrl.x, 2 * cur.y - last_ctrl.y} : cur;
          c2 = pt(0);
          p = pt(2);
        }
        out.push_back({'C', {c1.x, c1.y, c2.x, c2.y, p.x, p.y}});
        last_ctrl = c2;
        cur = p;
        break;
      }
      case 'Q': case 'T': {
        Point c1, p;
        if (upper == 'Q') {
          c1 = pt(0);
          p = pt(2);
        } else {
          c1 = (prev == 'Q') ? Point{2 * cur.x - last_ctrl.x, 2 * cur.y - last_ctrl.y} : cur;
          p = pt(0);
        }
        out.push_back({'Q', {c1.x, c1.y, p.x, p.y}});
        last_ctrl = c1;
        cur = p;
        break;
      }
      case 'A': {
        Point p = pt(5);
        out.push_back({'A', {a[0], a[1], a[2], a[3], a[4], p.x, p.y}});
        cur = p;
        break;
      }
      case 'Z':
        out.push_back({'Z', {}});
        cur = start;
        break;
    }
    // S/T reflect only after a curve of their own family.
    prev = (upper == 'C' || upper == 'S') ? 'C' : (upper == 'Q' || upper == 'T') ? 'Q' : upper;
  }
  return out;
}

BBox path_bbox(const std::vector<PathSegment>& segments) {
  BBox box;
  Point cur, start;
  for (const auto& seg : segments) {
    const auto& a = seg.args;
    switch (seg.kind) {
      case 'M':
        cur = start = {a[0], a[1]};
        box.expand(cur);
        break;
      case 'L':
        cur = {a[0], a[1]};
        box.expand(cur);
        break;
      case 'C': {
        Point p0 = cur, p1{a[0], a[1]}, p2{a[2], a[3]}, p3{a[4], a[5]};
        box.expand(p3);
        for (auto axis : {0, 1}) {
          auto get = [axis](Point p) { return axis == 0 ? p.x : p.y; };
          double qa = -get(p0) + 3 * get(p1) - 3 * get(p2) + get(p3);
          double qb = 2 * (get(p0) - 2 * get(p1) + get(p2));
          double qc = get(p1) - get(p0);
          for (double t : unit_roots(qa, qb, qc)) box.expand(cubic_at(p0, p1, p2, p3, t));
        }
        cur = p3;
        break;
      }
      case 'Q': {
        Point p0 = cur, p1{a[0], a[1]}, p2{a[2], a[3]};
        box.expand(p2);
        for (auto axis : {0, 1}) {
          auto get = [axis](Point p) { return axis == 0 ? p.x : p.y; };
          double den = get(p0) - 2 * get(p1) + get(p2);
          if (den != 0) {
            double t = (get(p0) - get(p1)) / den;
            if (t > 0 && t < 1) box.expand(quad_at(p0, p1, p2, t));
          }
        }
        cur = p2;
        break;
      }
      case 'A': {
        for (Point p : arc_points(cur, a[0], a[1], a[2], a[3] != 0, a[4] != 0, {a[5], a[6]}, 256)) box.expand(p);
        cur = {a[5], a[6]};
        break;
      }
      case 'Z':
        cur = start;
        break;
    }
  }
  return box;
}

std::vector<Point> flatten(const std::vector<PathSegment>& segments, int per_curve) {
  std::vector<Point> out;
  Point cur, start;
  for (const auto& seg : segments) {
    const auto& a = seg.args;
    switch (seg.kind) {
      case 'M':
        cur = start = {a[0], a[1]};
        out.push_back(cur);
        break;
      case 'L':
        cur = {a[0], a[1]};
        out.push_back(cur);
        break;
      case 'C': {
        Point p1{a[0], a[1]}, p2{a[2], a[3]}, p3{a[4], a[5]};
        for (int i = 1; i <= per_curve; ++i) out.push_back(cubic_at(cur, p1, p2, p3, double(i) / per_curve));
        cur = p3;
        break;
      }
      case 'Q': {
        Point p1{a[0], a[1]}, p2{a[2], a[3]};
        for (int i = 1; i <= per_curve; ++i) out.push_back(quad_at(cur, p1, p2, double(i) / per_curve));
        cur = p2;
        break;
      }
      case 'A': {
        for (Point p : arc_points(cur, a[0], a[1], a[2], a[3] != 0, a[4] != 0, {a[5], a[6]}, per_curve))
          out.push_back(p);
        cur = {a[5], a[6]};
        break;
      }
      case 'Z':
        if (!(cur == start)) out.push_back(start);
        cur = start;
        break;
    }
  }
  return out;
}

std::vector<Point> resample(const std::vector<Point>& polyline, int count) {
  std::vector<Point> out;
  if (polyline.empty() || count <= 0) return out;
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    double dx = polyline[i].x - polyline[i - 1].x, dy = polyline[i].y - polyline[i - 1].y;
    cumulative.push_back(cumulative.back() + std::hypot(dx, dy));
  }
  const double total = cumulative.back();
  if (total == 0) return std::vector<Point>(count, polyline.front());
  std::size_t seg = 1;
  for (int i = 0; i < count; ++i) {
    double target = count == 1 ? 0 : total * i / (count - 1);
    while (seg + 1 < cumulative.size() && cumulative[seg] < target) ++seg;
    if (seg >= polyline.size()) {
      out.push_back(polyline.back());
      continue;
    }
    double len = cumulative[seg] - cumulative[seg - 1];
    double t = len == 0 ? 0 : (target - cumulative[seg - 1]) / len;
    t = std::clamp(t, 0.0, 1.0);
    const Point& p = polyline[seg - 1];
    const Point& q = polyline[seg];
    out.push_back({p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t});
  }
  return out;
}

std::string format_segments(const std::vector<PathSegment>& segments) {
  std::string out;
  for (const auto& seg : segments) {
    if (!out.empty()) out += ' ';
    out += seg.kind;
    for (double v : seg.args) {
      out += ' ';
      out += format_number(v);
    }
  }
  return out;
}

}  // namespace narvis
