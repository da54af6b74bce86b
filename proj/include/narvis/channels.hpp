#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "narvis/component_tree.hpp"
#include "narvis/json_util.hpp"
#include "narvis/svg.hpp"

namespace narvis {

enum class Channel { Position, Size, ColorFill, ColorStroke, StrokeWidth, Opacity, Shape };

inline constexpr std::array<Channel, 7> kAllChannels = {Channel::Position,    Channel::Size,    Channel::ColorFill,
                                                        Channel::ColorStroke, Channel::StrokeWidth, Channel::Opacity,
                                                        Channel::Shape};

std::string_view to_string(Channel c);
std::optional<Channel> parse_channel(std::string_view text);

/// Rank 1 is the most salient. Overridable per project through SalienceTable.
using SalienceTable = std::map<Channel, int>;
const SalienceTable& default_salience();

struct ChannelSpec {
  Channel channel;
  int distinct_values = 1;
  int salience_rank = 0;
  int complexity_score = 3;
  bool enabled = true;
  bool operator==(const ChannelSpec&) const = default;
};

/// Only channels that vary across the unit (plus position) appear in a plan.
struct ChannelPlan {
  std::string unit_id;
  std::vector<ChannelSpec> channels;

  const ChannelSpec* find(Channel c) const;
  bool is_enabled(Channel c) const;
  std::vector<Channel> enabled_order() const;
  bool operator==(const ChannelPlan&) const = default;
};

struct VariationTolerance {
  double size_ratio = 1.05;          // size and stroke width vary when max/min exceeds this
  double position_fraction = 0.01;   // of the view-box diagonal
  double opacity_range = 0.02;
};

/// Distinct-value count of one channel over `prims` under the tolerances.
int distinct_values(Channel channel, const std::vector<const VisualPrimitive*>& prims, const ViewBox& view_box,
                    const VariationTolerance& tol = {});

ChannelPlan detect_channels(const VisualUnit& unit, const std::map<std::string, VisualPrimitive>& primitives,
                            const ViewBox& view_box, const SalienceTable& salience = default_salience(),
                            const VariationTolerance& tol = {});

ChannelPlan reorder_channels(const ChannelPlan& plan, const std::vector<Channel>& new_order);
ChannelPlan toggle_channel(const ChannelPlan& plan, Channel channel, bool enabled);
ChannelPlan set_complexity(const ChannelPlan& plan, Channel channel, int score);
/// Stable sort by increasing complexity; salience order breaks ties.
ChannelPlan sort_by_complexity(const ChannelPlan& plan);

Json to_json(const ChannelPlan& plan);
ChannelPlan plan_from_json(const Json& j, const std::string& pointer = "");
Channel channel_from_json(const Json& j, const std::string& pointer);

}  // namespace narvis
