// SPDX-License-Identifier: Apache-2.0
#include "parasync/wire/envelope.hpp"

#include <json.hpp>

#include "parasync/param/json.hpp"

namespace parasync::wire {

using nlohmann::json;

std::string_view to_string(EnvelopeErrorCode code) {
  switch (code) {
    case EnvelopeErrorCode::parse: return "parse";
    case EnvelopeErrorCode::unknown_type: return "unknown_type";
    case EnvelopeErrorCode::missing_field: return "missing_field";
    case EnvelopeErrorCode::wrong_kind: return "wrong_kind";
  }
  return "unknown";
}

namespace {

struct TypeName {
  std::string_view operator()(const HelloHost&) const { return "HELLO_HOST"; }
  std::string_view operator()(const HelloClient&) const { return "HELLO_CLIENT"; }
  std::string_view operator()(const Params&) const { return "PARAMS"; }
  std::string_view operator()(const SetParam&) const { return "SET_PARAM"; }
  std::string_view operator()(const Applied&) const { return "APPLIED"; }
  std::string_view operator()(const Error&) const { return "ERROR"; }
  std::string_view operator()(const Peers&) const { return "PEERS"; }
  std::string_view operator()(const Ping&) const { return "PING"; }
  std::string_view operator()(const Pong&) const { return "PONG"; }
};

json revisions_to_json(const std::vector<ModelRevision>& revs) {
  json a = json::array();
  for (const auto& r : revs) a.push_back({{"model_id", r.model_id}, {"revision", r.revision}});
  return a;
}

json numeric_value(const param::ParamValue& v) { return param::value_to_json(v, param::ParamKind::real); }

struct Encoder {
  json& j;

  void operator()(const HelloHost& m) const {
    j["session"] = m.session;
    j["name"] = m.name;
  }
  void operator()(const HelloClient& m) const {
    j["session"] = m.session;
    j["name"] = m.name;
  }
  void operator()(const Params& m) const {
    j["params"] = json::array();
    for (const auto& d : m.params) j["params"].push_back(param::descriptor_to_json(d));
  }
  void operator()(const SetParam& m) const {
    j["param_id"] = m.param_id;
    j["value"] = numeric_value(m.value);
    j["client_seq"] = m.client_seq;
    if (m.relay_seq) j["relay_seq"] = *m.relay_seq;
    if (m.origin) j["origin"] = *m.origin;
  }
  void operator()(const Applied& m) const {
    j["param_id"] = m.param_id;
    j["value"] = numeric_value(m.value);
    j["param_revision"] = m.param_revision;
    j["model_revisions"] = revisions_to_json(m.model_revisions);
    j["acks"] = json::array();
    for (const auto& a : m.acks) j["acks"].push_back({{"origin", a.origin}, {"client_seq", a.client_seq}});
  }
  void operator()(const Error& m) const {
    j["code"] = m.code;
    j["message"] = m.message;
    if (m.in_reply_to) j["in_reply_to"] = *m.in_reply_to;
  }
  void operator()(const Peers& m) const {
    j["clients"] = json::array();
    for (const auto& p : m.clients) j["clients"].push_back({{"id", p.id}, {"name", p.name}});
    j["host"] = m.host;
    if (m.self) j["self"] = *m.self;
    if (!m.model_revisions.empty()) j["model_revisions"] = revisions_to_json(m.model_revisions);
  }
  void operator()(const Ping& m) const { j["nonce"] = m.nonce; }
  void operator()(const Pong& m) const { j["nonce"] = m.nonce; }
};

// --- decoding ---------------------------------------------------------------

[[noreturn]] void missing(const std::string& field) {
  throw EnvelopeError(EnvelopeErrorCode::missing_field, field, "missing field '" + field + "'");
}

[[noreturn]] void wrong(const std::string& field, const char* expected) {
  throw EnvelopeError(EnvelopeErrorCode::wrong_kind, field, "field '" + field + "' must be " + expected);
}

const json& field(const json& j, const std::string& name) {
  const auto it = j.find(name);
  if (it == j.end()) missing(name);
  return *it;
}

std::string str(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_string()) wrong(name, "a string");
  return v.get<std::string>();
}

std::uint64_t u64_value(const json& v, const std::string& name) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  wrong(name, "an unsigned integer");
}

std::uint64_t u64(const json& j, const std::string& name) { return u64_value(field(j, name), name); }

std::optional<std::uint64_t> opt_u64(const json& j, const std::string& name) {
  const auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return u64_value(*it, name);
}

bool boolean(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_boolean()) wrong(name, "a boolean");
  return v.get<bool>();
}

const json& array(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_array()) wrong(name, "an array");
  return v;
}

const json& object_item(const json& v, const std::string& name) {
  if (!v.is_object()) wrong(name, "an array of objects");
  return v;
}

param::ParamValue value(const json& j) {
  try {
    return param::value_from_json(field(j, "value"));
  } catch (const param::FieldError& e) {
    throw EnvelopeError(EnvelopeErrorCode::wrong_kind, "value", e.what());
  }
}

std::vector<ModelRevision> revisions(const json& j, const std::string& name) {
  std::vector<ModelRevision> out;
  for (const json& item : array(j, name)) {
    const json& o = object_item(item, name);
    const std::uint64_t id = u64(o, "model_id");
    if (id > 0xffffffffu) wrong("model_id", "a 32-bit unsigned integer");
    out.push_back({static_cast<std::uint32_t>(id), u64(o, "revision")});
  }
  return out;
}

Envelope decode_object(const json& j) {
  const std::string type = str(j, "type");
  if (type == "HELLO_HOST") return HelloHost{str(j, "session"), str(j, "name")};
  if (type == "HELLO_CLIENT") return HelloClient{str(j, "session"), str(j, "name")};
  if (type == "PARAMS") {
    Params m;
    for (const json& d : array(j, "params")) {
      try {
        m.params.push_back(param::descriptor_from_json(d, false));
      } catch (const param::FieldError& e) {
        const auto code = e.kind() == param::FieldError::Kind::missing ? EnvelopeErrorCode::missing_field
                                                                        : EnvelopeErrorCode::wrong_kind;
        throw EnvelopeError(code, e.field(), e.what());
      }
    }
    return m;
  }
  if (type == "SET_PARAM") {
    SetParam m;
    m.param_id = str(j, "param_id");
    m.value = value(j);
    m.client_seq = u64(j, "client_seq");
    m.relay_seq = opt_u64(j, "relay_seq");
    m.origin = opt_u64(j, "origin");
    return m;
  }
  if (type == "APPLIED") {
    Applied m;
    m.param_id = str(j, "param_id");
    m.value = value(j);
    m.param_revision = u64(j, "param_revision");
    m.model_revisions = revisions(j, "model_revisions");
    if (j.contains("acks")) {
      for (const json& item : array(j, "acks")) {
        const json& o = object_item(item, "acks");
        m.acks.push_back({u64(o, "origin"), u64(o, "client_seq")});
      }
    }
    return m;
  }
  if (type == "ERROR") return Error{str(j, "code"), str(j, "message"), opt_u64(j, "in_reply_to")};
  if (type == "PEERS") {
    Peers m;
    for (const json& item : array(j, "clients")) {
      const json& o = object_item(item, "clients");
      m.clients.push_back({u64(o, "id"), str(o, "name")});
    }
    m.host = j.contains("host") ? boolean(j, "host") : false;
    m.self = opt_u64(j, "self");
    if (j.contains("model_revisions")) m.model_revisions = revisions(j, "model_revisions");
    return m;
  }
  if (type == "PING") return Ping{u64(j, "nonce")};
  if (type == "PONG") return Pong{u64(j, "nonce")};
  throw EnvelopeError(EnvelopeErrorCode::unknown_type, "type", "unknown envelope type '" + type + "'");
}

}  // namespace

std::string_view type_name(const Envelope& envelope) { return std::visit(TypeName{}, envelope); }

std::string encode_envelope(const Envelope& envelope) {
  json j = json::object();
  j["type"] = std::string(type_name(envelope));
  std::visit(Encoder{j}, envelope);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Envelope decode_envelope(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw EnvelopeError(EnvelopeErrorCode::parse, {}, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw EnvelopeError(EnvelopeErrorCode::parse, {}, "envelope must be a JSON object");
  return decode_object(j);
}

}  // namespace parasync::wire
