#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pixie/error.hpp"

namespace pixie {

/// Ordered so that serialized documents keep their documented field order.
using Json = nlohmann::ordered_json;

namespace detail {

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
}

inline const Json& field(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing field \"" + std::string(key) + "\"");
  return *it;
}

inline std::uint64_t as_unsigned(const Json& v, const std::string& path,
                                 std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
  if (v.is_number_unsigned()) {
    auto x = v.get<std::uint64_t>();
    if (x > max) throw ParseError(path + ": value " + std::to_string(x) + " out of range");
    return x;
  }
  if (v.is_number_integer()) throw ParseError(path + ": expected a non-negative integer");
  throw ParseError(path + ": expected an integer");
}

inline std::int64_t as_signed(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    auto x = v.get<std::uint64_t>();
    if (x > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw ParseError(path + ": value out of range");
    return static_cast<std::int64_t>(x);
  }
  if (v.is_number_integer()) return v.get<std::int64_t>();
  throw ParseError(path + ": expected an integer");
}

inline const std::string& as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected a string");
  return v.get_ref<const std::string&>();
}

inline const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  return v;
}

inline std::uint64_t unsigned_field(const Json& obj, std::string_view key, const std::string& path,
                                    std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
  return as_unsigned(field(obj, key, path), path + "/" + std::string(key), max);
}

}  // namespace detail
}  // namespace pixie
