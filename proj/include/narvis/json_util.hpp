#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "narvis/error.hpp"

namespace narvis {

using Json = nlohmann::json;

namespace json_util {

std::string escape_token(std::string_view token);
std::string join_pointer(std::string_view base, std::string_view token);
std::string join_pointer(std::string_view base, std::size_t index);

[[noreturn]] void schema_error(const std::string& pointer, const std::string& message);

std::string expect_string(const Json& j, const std::string& pointer);
std::int64_t expect_integer(const Json& j, const std::string& pointer);
double expect_number(const Json& j, const std::string& pointer);
bool expect_bool(const Json& j, const std::string& pointer);
const Json& expect_array(const Json& j, const std::string& pointer);

/// Strict reader for one JSON object. Every key must be consumed through
/// `required`/`optional` before `finish()`, which rejects the leftovers.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string pointer);

  const Json& required(std::string_view key);
  const Json* optional(std::string_view key);

  std::string string(std::string_view key) { return expect_string(required(key), at(key)); }
  std::int64_t integer(std::string_view key) { return expect_integer(required(key), at(key)); }
  double number(std::string_view key) { return expect_number(required(key), at(key)); }
  bool boolean(std::string_view key) { return expect_bool(required(key), at(key)); }

  std::string at(std::string_view key) const { return join_pointer(pointer_, key); }
  const std::string& pointer() const { return pointer_; }

  void finish() const;

 private:
  const Json& j_;
  std::string pointer_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace json_util
}  // namespace narvis
