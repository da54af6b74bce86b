#include "narvis/channels.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "narvis/error.hpp"

namespace narvis {

namespace {

int count_ratio_clusters(std::vector<double> values, double ratio) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  int clusters = 1;
  double start = values.front();
  for (double v : values) {
    if (v > start * ratio || (start == 0 && v > 0)) {
      ++clusters;
      start = v;
    }
  }
  return clusters;
}

int count_range_clusters(std::vector<double> values, double range) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  int clusters = 1;
  double start = values.front();
  for (double v : values) {
    if (v - start > range) {
      ++clusters;
      start = v;
    }
  }
  return clusters;
}

ChannelSpec* find_mut(ChannelPlan& plan, Channel c) {
  for (auto& s : plan.channels)
    if (s.channel == c) return &s;
  throw Error(ErrorCode::UnknownChannel, "channel " + std::string(to_string(c)) + " is not in the plan of " + plan.unit_id,
              std::string(to_string(c)));
}

}  // namespace

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::Position: return "position";
    case Channel::Size: return "size";
    case Channel::ColorFill: return "color_fill";
    case Channel::ColorStroke: return "color_stroke";
    case Channel::StrokeWidth: return "stroke_width";
    case Channel::Opacity: return "opacity";
    case Channel::Shape: return "shape";
  }
  return "position";
}

std::optional<Channel> parse_channel(std::string_view text) {
  for (Channel c : kAllChannels)
    if (to_string(c) == text) return c;
  return std::nullopt;
}

const SalienceTable& default_salience() {
  static const SalienceTable table = {
      {Channel::Position, 1}, {Channel::Size, 2},        {Channel::ColorFill, 3}, {Channel::ColorStroke, 4},
      {Channel::Shape, 5},    {Channel::StrokeWidth, 6}, {Channel::Opacity, 7},
  };
  return table;
}

const ChannelSpec* ChannelPlan::find(Channel c) const {
  for (const auto& s : channels)
    if (s.channel == c) return &s;
  return nullptr;
}

bool ChannelPlan::is_enabled(Channel c) const {
  const ChannelSpec* s = find(c);
  return s && s->enabled;
}

std::vector<Channel> ChannelPlan::enabled_order() const {
  std::vector<Channel> out;
  for (const auto& s : channels)
    if (s.enabled) out.push_back(s.channel);
  return out;
}

int distinct_values(Channel channel, const std::vector<const VisualPrimitive*>& prims, const ViewBox& view_box,
                    const VariationTolerance& tol) {
  if (prims.empty()) return 0;
  auto numbers = [&](auto get) {
    std::vector<double> v;
    for (const auto* p : prims) v.push_back(get(p->channels));
    return v;
  };
  auto strings = [&](auto get) {
    std::set<std::string> s;
    for (const auto* p : prims) s.insert(get(p->channels));
    return static_cast<int>(s.size());
  };
  switch (channel) {
    case Channel::Position: {
      const double radius = tol.position_fraction * view_box.diagonal();
      BBox spread;
      for (const auto* p : prims) spread.expand(p->channels.position);
      if (std::hypot(spread.width(), spread.height()) <= radius) return 1;
      std::vector<Point> reps;
      for (const auto* p : prims) {
        Point c = p->channels.position;
        bool near = std::any_of(reps.begin(), reps.end(),
                                [&](Point r) { return std::hypot(r.x - c.x, r.y - c.y) <= radius; });
        if (!near) reps.push_back(c);
      }
      return std::max<int>(2, static_cast<int>(reps.size()));
    }
    case Channel::Size:
      return count_ratio_clusters(numbers([](const ChannelValues& c) { return c.size; }), tol.size_ratio);
    case Channel::StrokeWidth:
      return count_ratio_clusters(numbers([](const ChannelValues& c) { return c.stroke_width; }), tol.size_ratio);
    case Channel::ColorFill:
      return strings([](const ChannelValues& c) { return c.fill; });
    case Channel::ColorStroke:
      return strings([](const ChannelValues& c) { return c.stroke; });
    case Channel::Opacity:
      return count_range_clusters(numbers([](const ChannelValues& c) { return c.opacity; }), tol.opacity_range);
    case Channel::Shape:
      return strings([](const ChannelValues& c) { return c.shape_class; });
  }
  return 1;
}

ChannelPlan detect_channels(const VisualUnit& unit, const std::map<std::string, VisualPrimitive>& primitives,
                            const ViewBox& view_box, const SalienceTable& salience, const VariationTolerance& tol) {
  std::vector<const VisualPrimitive*> prims;
  for (const auto& id : unit.primitive_ids) {
    auto it = primitives.find(id);
    if (it == primitives.end())
      throw Error(ErrorCode::UnknownPrimitive, "unit " + unit.unit_id + " references unknown primitive " + id, id);
    prims.push_back(&it->second);
  }
  ChannelPlan plan{unit.unit_id, {}};
  for (Channel c : kAllChannels) {
    int n = distinct_values(c, prims, view_box, tol);
    if (c != Channel::Position && n < 2) continue;
    auto rank = salience.find(c);
    plan.channels.push_back({.channel = c,
                             .distinct_values = std::max(1, n),
                             .salience_rank = rank == salience.end() ? 99 : rank->second,
                             .complexity_score = 3,
                             .enabled = true});
  }
  std::stable_sort(plan.channels.begin(), plan.channels.end(),
                   [](const ChannelSpec& a, const ChannelSpec& b) { return a.salience_rank < b.salience_rank; });
  return plan;
}

ChannelPlan reorder_channels(const ChannelPlan& plan, const std::vector<Channel>& new_order) {
  if (new_order.size() != plan.channels.size())
    throw Error(ErrorCode::InvalidPermutation, "new order must list each plan channel exactly once");
  ChannelPlan out{plan.unit_id, {}};
  std::set<Channel> used;
  for (Channel c : new_order) {
    const ChannelSpec* s = plan.find(c);
    if (!s || !used.insert(c).second)
      throw Error(ErrorCode::InvalidPermutation, "new order must list each plan channel exactly once",
                  std::string(to_string(c)));
    out.channels.push_back(*s);
  }
  return out;
}

ChannelPlan toggle_channel(const ChannelPlan& plan, Channel channel, bool enabled) {
  ChannelPlan out = plan;
  find_mut(out, channel)->enabled = enabled;
  return out;
}

ChannelPlan set_complexity(const ChannelPlan& plan, Channel channel, int score) {
  if (score < 1 || score > 5)
    throw Error(ErrorCode::OutOfRange, "complexity score " + std::to_string(score) + " outside [1,5]",
                std::string(to_string(channel)));
  ChannelPlan out = plan;
  find_mut(out, channel)->complexity_score = score;
  return out;
}

ChannelPlan sort_by_complexity(const ChannelPlan& plan) {
  ChannelPlan out = plan;
  std::stable_sort(out.channels.begin(), out.channels.end(), [](const ChannelSpec& a, const ChannelSpec& b) {
    if (a.complexity_score != b.complexity_score) return a.complexity_score < b.complexity_score;
    return a.salience_rank < b.salience_rank;
  });
  return out;
}

Json to_json(const ChannelPlan& plan) {
  Json channels = Json::array();
  for (const auto& s : plan.channels) {
    channels.push_back({{"channel", to_string(s.channel)},
                        {"distinct_values", s.distinct_values},
                        {"salience_rank", s.salience_rank},
                        {"complexity_score", s.complexity_score},
                        {"enabled", s.enabled}});
  }
  return Json{{"unit_id", plan.unit_id}, {"channels", std::move(channels)}};
}

Channel channel_from_json(const Json& j, const std::string& pointer) {
  std::string name = json_util::expect_string(j, pointer);
  auto c = parse_channel(name);
  if (!c) json_util::schema_error(pointer, "unknown channel '" + name + "'");
  return *c;
}

ChannelPlan plan_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  ChannelPlan plan;
  plan.unit_id = r.string("unit_id");
  const Json& arr = json_util::expect_array(r.required("channels"), r.at("channels"));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    json_util::ObjectReader cr(arr[i], json_util::join_pointer(r.at("channels"), i));
    ChannelSpec s;
    s.channel = channel_from_json(cr.required("channel"), cr.at("channel"));
    s.distinct_values = static_cast<int>(cr.integer("distinct_values"));
    s.salience_rank = static_cast<int>(cr.integer("salience_rank"));
    s.complexity_score = static_cast<int>(cr.integer("complexity_score"));
    s.enabled = cr.boolean("enabled");
    cr.finish();
    if (s.complexity_score < 1 || s.complexity_score > 5)
      json_util::schema_error(cr.at("complexity_score"), "complexity score outside [1,5]");
    plan.channels.push_back(s);
  }
  r.finish();
  return plan;
}

}  // namespace narvis
