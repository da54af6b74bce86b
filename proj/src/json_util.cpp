#include "narvis/json_util.hpp"

#include <cmath>

namespace narvis::json_util {

std::string escape_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

std::string join_pointer(std::string_view base, std::string_view token) {
  std::string out(base);
  out += '/';
  out += escape_token(token);
  return out;
}

std::string join_pointer(std::string_view base, std::size_t index) {
  return join_pointer(base, std::to_string(index));
}

void schema_error(const std::string& pointer, const std::string& message) {
  throw Error(ErrorCode::SchemaViolation, message + " at " + (pointer.empty() ? "/" : pointer),
              pointer.empty() ? "/" : pointer);
}

std::string expect_string(const Json& j, const std::string& pointer) {
  if (!j.is_string()) schema_error(pointer, "expected string");
  return j.get<std::string>();
}

std::int64_t expect_integer(const Json& j, const std::string& pointer) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
  }
  schema_error(pointer, "expected integer");
}

double expect_number(const Json& j, const std::string& pointer) {
  if (!j.is_number()) schema_error(pointer, "expected number");
  return j.get<double>();
}

bool expect_bool(const Json& j, const std::string& pointer) {
  if (!j.is_boolean()) schema_error(pointer, "expected boolean");
  return j.get<bool>();
}

const Json& expect_array(const Json& j, const std::string& pointer) {
  if (!j.is_array()) schema_error(pointer, "expected array");
  return j;
}

ObjectReader::ObjectReader(const Json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
  if (!j_.is_object()) schema_error(pointer_, "expected object");
}

const Json& ObjectReader::required(std::string_view key) {
  auto it = j_.find(std::string(key));
  if (it == j_.end()) schema_error(at(key), "missing required field '" + std::string(key) + "'");
  seen_.emplace(key);
  return *it;
}

const Json* ObjectReader::optional(std::string_view key) {
  auto it = j_.find(std::string(key));
  if (it == j_.end()) return nullptr;
  seen_.emplace(key);
  return &*it;
}

void ObjectReader::finish() const {
  for (const auto& [key, _] : j_.items()) {
    if (!seen_.contains(key)) schema_error(join_pointer(pointer_, key), "unknown field '" + key + "'");
  }
}

}  // namespace narvis::json_util
