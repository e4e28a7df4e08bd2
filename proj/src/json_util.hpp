#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

#include "isingflip/error.hpp"

namespace isingflip::detail {

/// Parses a JSON document; syntax errors become ParseError with the 1-based
/// line and the byte offset within that line.
inline nlohmann::json parse_json(std::string_view text, std::size_t line_base = 1) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = line_base;
    std::size_t line_start = 0;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        line_start = k + 1;
      }
    }
    throw ParseError("malformed JSON", line, byte - std::min(byte, line_start));
  }
}

template <class T>
T require(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    fail(ErrorKind::kParse, std::string("missing key '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::kParse, std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace isingflip::detail
