// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "parasync/param/descriptor.hpp"

namespace parasync::param {

/// A JSON object failed a schema rule; `field` names the offending key.
class FieldError : public std::runtime_error {
 public:
  enum class Kind { missing, wrong_kind };

  FieldError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

nlohmann::json value_to_json(const ParamValue& value, ParamKind kind);
/// Accepts a JSON number, boolean, or string.
ParamValue value_from_json(const nlohmann::json& j, const std::string& field = "value");

/// Every field except `revision`. Seeds omit quantized_step.
nlohmann::json descriptor_to_json(const ParamDescriptor& d);
/// Reads an announced descriptor (`seed` false) or a definition-file seed.
/// Schema violations throw FieldError; semantic checks are left to
/// make_descriptor.
ParamDescriptor descriptor_from_json(const nlohmann::json& j, bool seed);

}  // namespace parasync::param
