#pragma once

// nlohmann/json, vendored single header.
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "ctxnav/core/errors.hpp"

namespace ctxnav {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

template <class J>
void write_text_file(const std::string& path, const J& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + "." + key + ": missing required field");
  return *it;
}

inline double require_number(const Json& j, const char* key, const std::string& where) {
  const Json& v = require(j, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::string require_string(const Json& j, const char* key, const std::string& where) {
  const Json& v = require(j, key, where);
  if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

}  // namespace detail
}  // namespace ctxnav
