// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace parasync::param {

enum class ParamKind { real, integer, boolean, choice };

std::string_view to_string(ParamKind kind);
std::optional<ParamKind> parse_kind(std::string_view text);

/// Numbers carry real and integer values; integers are whole doubles.
using ParamValue = std::variant<double, bool, std::string>;

enum class ParamErrorCode { domain, kind_mismatch, unknown_choice, invalid_descriptor };

std::string_view to_string(ParamErrorCode code);

class ParamError : public std::invalid_argument {
 public:
  ParamError(ParamErrorCode code, std::string param_id, const std::string& message);

  ParamErrorCode code() const { return code_; }
  const std::string& param_id() const { return param_id_; }

 private:
  ParamErrorCode code_;
  std::string param_id_;
};

/// An editable parameter as announced to clients: identity, kind,
/// restrictions, and current value.
struct ParamDescriptor {
  std::string id;
  std::string name;
  ParamKind kind = ParamKind::real;
  std::optional<double> min;  // real and integer only
  std::optional<double> max;
  /// Native slider step. Absent on a real parameter means continuous.
  std::optional<double> native_step;
  std::vector<std::string> choices;  // choice only
  /// Effective step after quantization; real and integer only.
  std::optional<double> quantized_step;
  ParamValue value = 0.0;
  std::uint64_t revision = 0;

  bool operator==(const ParamDescriptor&) const = default;
};

inline constexpr int kDefaultStepLimit = 20;

/// Effective slider step giving at most `limit + 1` uniformly spaced values
/// starting at `min`. `native_step` absent means continuous.
double quantize(double min, double max, std::optional<double> native_step, int limit = kDefaultStepLimit);

/// Number of values min + k·step that do not exceed max.
std::size_t selectable_count(double min, double max, double step);

/// Selectable numeric values of a quantized real/integer descriptor.
std::vector<double> selectable_values(const ParamDescriptor& descriptor);

/// Clamps and rounds a numeric value onto the quantized grid (ties toward
/// max); booleans and choices are validated and passed through.
ParamValue snap(const ParamDescriptor& descriptor, const ParamValue& raw);

/// Checks the seed fields, fills quantized_step, snaps the value, and resets
/// the revision. Throws ParamError naming the parameter.
ParamDescriptor make_descriptor(ParamDescriptor seed, int limit = kDefaultStepLimit);

/// Numeric view used by the dataflow graph: booleans map to 0/1 and choices
/// to their index.
double as_number(const ParamDescriptor& descriptor, const ParamValue& value);

bool is_numeric(ParamKind kind);

}  // namespace parasync::param
