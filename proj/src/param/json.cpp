// SPDX-License-Identifier: Apache-2.0
#include "parasync/param/json.hpp"

#include <cmath>

namespace parasync::param {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) throw FieldError(FieldError::Kind::missing, field, std::string("missing field '") + field + "'");
  return *it;
}

[[noreturn]] void wrong(const std::string& field, const char* expected) {
  throw FieldError(FieldError::Kind::wrong_kind, field, "field '" + field + "' must be " + expected);
}

std::string get_string(const json& j, const char* field) {
  const json& v = require(j, field);
  if (!v.is_string()) wrong(field, "a string");
  return v.get<std::string>();
}

std::optional<double> get_optional_number(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) wrong(field, "a number");
  return it->get<double>();
}

}  // namespace

json value_to_json(const ParamValue& value, ParamKind kind) {
  if (const double* d = std::get_if<double>(&value)) {
    if (kind == ParamKind::integer && std::abs(*d) < 9.0e15 && std::floor(*d) == *d) {
      return static_cast<std::int64_t>(*d);
    }
    return *d;
  }
  if (const bool* b = std::get_if<bool>(&value)) return *b;
  return std::get<std::string>(value);
}

ParamValue value_from_json(const json& j, const std::string& field) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  wrong(field, "a number, boolean or string");
}

json descriptor_to_json(const ParamDescriptor& d) {
  json j = json::object();
  j["id"] = d.id;
  j["name"] = d.name;
  j["kind"] = std::string(to_string(d.kind));
  if (d.min) j["min"] = *d.min;
  if (d.max) j["max"] = *d.max;
  if (d.native_step) {
    j["native_step"] = *d.native_step;
  } else if (d.kind == ParamKind::real) {
    j["native_step"] = "continuous";
  }
  if (d.kind == ParamKind::choice) j["choices"] = d.choices;
  if (d.quantized_step) j["quantized_step"] = *d.quantized_step;
  j["value"] = value_to_json(d.value, d.kind);
  return j;
}

ParamDescriptor descriptor_from_json(const json& j, bool seed) {
  if (!j.is_object()) wrong("params[]", "an object");
  ParamDescriptor d;
  d.id = get_string(j, "id");
  if (j.contains("name")) d.name = get_string(j, "name");
  const std::string kind_text = get_string(j, "kind");
  const auto kind = parse_kind(kind_text);
  if (!kind) wrong("kind", "one of real, integer, boolean, choice");
  d.kind = *kind;
  d.min = get_optional_number(j, "min");
  d.max = get_optional_number(j, "max");
  if (const auto it = j.find("native_step"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "continuous") wrong("native_step", "a number or \"continuous\"");
    } else if (it->is_number()) {
      d.native_step = it->get<double>();
    } else {
      wrong("native_step", "a number or \"continuous\"");
    }
  }
  if (const auto it = j.find("choices"); it != j.end()) {
    if (!it->is_array()) wrong("choices", "an array of strings");
    for (const json& c : *it) {
      if (!c.is_string()) wrong("choices", "an array of strings");
      d.choices.push_back(c.get<std::string>());
    }
  }
  if (!seed) {
    d.quantized_step = get_optional_number(j, "quantized_step");
    if (is_numeric(d.kind) && !d.quantized_step) require(j, "quantized_step");
  }
  d.value = value_from_json(require(j, "value"));
  return d;
}

}  // namespace parasync::param
