#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace narvis {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;

  /// Uppercase "#RRGGBBAA".
  std::string hex() const;
  bool operator==(const Rgba&) const = default;
};

/// Parses CSS color syntax: named colors, #rgb, #rgba, #rrggbb, #rrggbbaa,
/// rgb()/rgba() with integer or percentage components, and "transparent".
std::optional<Rgba> parse_color(std::string_view text);

/// Normalizes an SVG paint value to "#RRGGBBAA", "none", or a verbatim
/// "url(#id)" reference. `alpha_scale` folds fill-/stroke-opacity into the
/// alpha channel. Returns nullopt for unrecognized paint.
std::optional<std::string> normalize_paint(std::string_view value, double alpha_scale = 1.0,
                                           std::string_view current_color = "#000000FF");

}  // namespace narvis
