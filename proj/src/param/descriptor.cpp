// SPDX-License-Identifier: Apache-2.0
#include "parasync/param/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace parasync::param {

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::real: return "real";
    case ParamKind::integer: return "integer";
    case ParamKind::boolean: return "boolean";
    case ParamKind::choice: return "choice";
  }
  return "unknown";
}

std::optional<ParamKind> parse_kind(std::string_view text) {
  if (text == "real") return ParamKind::real;
  if (text == "integer") return ParamKind::integer;
  if (text == "boolean") return ParamKind::boolean;
  if (text == "choice") return ParamKind::choice;
  return std::nullopt;
}

std::string_view to_string(ParamErrorCode code) {
  switch (code) {
    case ParamErrorCode::domain: return "domain";
    case ParamErrorCode::kind_mismatch: return "kind_mismatch";
    case ParamErrorCode::unknown_choice: return "unknown_choice";
    case ParamErrorCode::invalid_descriptor: return "invalid_descriptor";
  }
  return "unknown";
}

ParamError::ParamError(ParamErrorCode code, std::string param_id, const std::string& message)
    : std::invalid_argument(param_id.empty() ? message : "parameter '" + param_id + "': " + message),
      code_(code),
      param_id_(std::move(param_id)) {}

bool is_numeric(ParamKind kind) { return kind == ParamKind::real || kind == ParamKind::integer; }

namespace {

// Relative slack so that e.g. 1.0 / 0.1 counts as ten whole steps.
constexpr double kGridSlack = 1e-9;
// Beyond this many native steps a range is rejected rather than enumerated.
constexpr double kMaxSteps = 1e15;

double whole_steps(double span, double step) {
  const double ratio = span / step;
  return std::floor(ratio + kGridSlack * std::max(1.0, ratio));
}

bool is_whole(double x) { return std::isfinite(x) && std::floor(x) == x; }

const char* kind_label(const ParamValue& v) {
  if (std::holds_alternative<double>(v)) return "number";
  if (std::holds_alternative<bool>(v)) return "boolean";
  return "string";
}

}  // namespace

double quantize(double min, double max, std::optional<double> native_step, int limit) {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw ParamError(ParamErrorCode::domain, {}, "quantize requires finite min < max");
  }
  if (limit < 1) throw ParamError(ParamErrorCode::domain, {}, "quantize limit must be at least 1");
  const double span = max - min;
  if (!native_step) return span / limit;

  const double step = *native_step;
  if (!std::isfinite(step) || !(step > 0.0)) {
    throw ParamError(ParamErrorCode::domain, {}, "native step must be positive");
  }
  const double intervals = whole_steps(span, step);
  if (intervals > kMaxSteps) throw ParamError(ParamErrorCode::domain, {}, "native step too fine for range");
  if (intervals < 1.0) throw ParamError(ParamErrorCode::domain, {}, "native step exceeds the range");
  if (intervals <= limit) return step;
  const double multiplier = std::ceil(intervals / limit);
  return multiplier * step;
}

std::size_t selectable_count(double min, double max, double step) {
  return static_cast<std::size_t>(whole_steps(max - min, step)) + 1;
}

std::vector<double> selectable_values(const ParamDescriptor& d) {
  if (!is_numeric(d.kind) || !d.min || !d.max || !d.quantized_step) return {};
  const std::size_t n = selectable_count(*d.min, *d.max, *d.quantized_step);
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    values.push_back(std::min(*d.max, *d.min + static_cast<double>(k) * *d.quantized_step));
  }
  return values;
}

ParamValue snap(const ParamDescriptor& d, const ParamValue& raw) {
  switch (d.kind) {
    case ParamKind::real:
    case ParamKind::integer: {
      const double* x = std::get_if<double>(&raw);
      if (x == nullptr) {
        throw ParamError(ParamErrorCode::kind_mismatch, d.id,
                         std::string("expected a number, got a ") + kind_label(raw));
      }
      if (!std::isfinite(*x)) throw ParamError(ParamErrorCode::domain, d.id, "value must be finite");
      if (!d.min || !d.max || !d.quantized_step) {
        throw ParamError(ParamErrorCode::invalid_descriptor, d.id, "descriptor is not quantized");
      }
      const double lo = *d.min, hi = *d.max, step = *d.quantized_step;
      const double clamped = std::clamp(*x, lo, hi);
      const double t = (clamped - lo) / step;
      const double last = whole_steps(hi - lo, step);
      const double k = std::min(last, std::floor(t + 0.5 + kGridSlack * std::max(1.0, t)));
      double v = std::min(hi, lo + k * step);
      if (d.kind == ParamKind::integer) v = std::round(v);
      return v;
    }
    case ParamKind::boolean:
      if (!std::holds_alternative<bool>(raw)) {
        throw ParamError(ParamErrorCode::kind_mismatch, d.id,
                         std::string("expected a boolean, got a ") + kind_label(raw));
      }
      return raw;
    case ParamKind::choice: {
      const std::string* s = std::get_if<std::string>(&raw);
      if (s == nullptr) {
        throw ParamError(ParamErrorCode::kind_mismatch, d.id,
                         std::string("expected a choice string, got a ") + kind_label(raw));
      }
      if (std::find(d.choices.begin(), d.choices.end(), *s) == d.choices.end()) {
        throw ParamError(ParamErrorCode::unknown_choice, d.id, "'" + *s + "' is not one of the choices");
      }
      return raw;
    }
  }
  throw ParamError(ParamErrorCode::invalid_descriptor, d.id, "unknown kind");
}

ParamDescriptor make_descriptor(ParamDescriptor seed, int limit) {
  const std::string id = seed.id;
  auto fail = [&](const std::string& why) -> ParamError {
    return ParamError(ParamErrorCode::invalid_descriptor, id, why);
  };
  if (id.empty()) throw fail("id must not be empty");
  if (seed.name.empty()) seed.name = id;

  if (is_numeric(seed.kind)) {
    if (!seed.min || !seed.max) throw fail("min and max are required");
    if (!seed.choices.empty()) throw fail("choices are only valid for choice parameters");
    if (seed.kind == ParamKind::integer) {
      if (!seed.native_step) seed.native_step = 1.0;
      if (!is_whole(*seed.min) || !is_whole(*seed.max) || !is_whole(*seed.native_step)) {
        throw fail("integer min, max and step must be whole numbers");
      }
    }
    try {
      seed.quantized_step = quantize(*seed.min, *seed.max, seed.native_step, limit);
    } catch (const ParamError& e) {
      throw ParamError(ParamErrorCode::domain, id, e.what());
    }
    seed.value = snap(seed, seed.value);
  } else {
    if (seed.min || seed.max || seed.native_step) throw fail("min, max and step apply to numeric kinds only");
    seed.quantized_step.reset();
    if (seed.kind == ParamKind::choice) {
      if (seed.choices.empty()) throw fail("choice parameters need at least one choice");
      std::set<std::string> unique(seed.choices.begin(), seed.choices.end());
      if (unique.size() != seed.choices.size()) throw fail("choices must be distinct");
    } else if (!seed.choices.empty()) {
      throw fail("choices are only valid for choice parameters");
    }
    seed.value = snap(seed, seed.value);
  }
  seed.revision = 0;
  return seed;
}

double as_number(const ParamDescriptor& d, const ParamValue& value) {
  const ParamValue v = snap(d, value);
  switch (d.kind) {
    case ParamKind::real:
    case ParamKind::integer: return std::get<double>(v);
    case ParamKind::boolean: return std::get<bool>(v) ? 1.0 : 0.0;
    case ParamKind::choice: {
      const auto it = std::find(d.choices.begin(), d.choices.end(), std::get<std::string>(v));
      return static_cast<double>(it - d.choices.begin());
    }
  }
  return 0.0;
}

}  // namespace parasync::param
