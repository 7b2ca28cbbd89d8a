// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parasync/param/descriptor.hpp"

namespace parasync::wire {

struct HelloHost {
  std::string session;
  std::string name;
  bool operator==(const HelloHost&) const = default;
};

struct HelloClient {
  std::string session;
  std::string name;
  bool operator==(const HelloClient&) const = default;
};

/// Parameter announcement. Descriptor revisions are not carried.
struct Params {
  std::vector<param::ParamDescriptor> params;
  bool operator==(const Params&) const = default;
};

/// A parameter edit. The relay stamps `relay_seq` (its per-session arrival
/// order) and `origin` (the sending connection) before forwarding to the host.
struct SetParam {
  std::string param_id;
  param::ParamValue value;
  std::uint64_t client_seq = 0;
  std::optional<std::uint64_t> relay_seq;
  std::optional<std::uint64_t> origin;
  bool operator==(const SetParam&) const = default;
};

struct ModelRevision {
  std::uint32_t model_id = 0;
  std::uint64_t revision = 0;
  bool operator==(const ModelRevision&) const = default;
};

/// Identifies one edit folded into an APPLIED.
struct Ack {
  std::uint64_t origin = 0;
  std::uint64_t client_seq = 0;
  bool operator==(const Ack&) const = default;
};

struct Applied {
  std::string param_id;
  param::ParamValue value;
  std::uint64_t param_revision = 0;
  std::vector<ModelRevision> model_revisions;
  std::vector<Ack> acks;
  bool operator==(const Applied&) const = default;
};

struct Error {
  std::string code;
  std::string message;
  std::optional<std::uint64_t> in_reply_to;
  bool operator==(const Error&) const = default;
};

struct Peer {
  std::uint64_t id = 0;
  std::string name;
  bool operator==(const Peer&) const = default;
};

/// Session membership. `self` is the recipient's own connection id;
/// `model_revisions` (sent to hosts only) lists the relay's cached frame
/// revisions so a reconnecting host can continue above them.
struct Peers {
  std::vector<Peer> clients;
  bool host = false;
  std::optional<std::uint64_t> self;
  std::vector<ModelRevision> model_revisions;
  bool operator==(const Peers&) const = default;
};

struct Ping {
  std::uint64_t nonce = 0;
  bool operator==(const Ping&) const = default;
};

struct Pong {
  std::uint64_t nonce = 0;
  bool operator==(const Pong&) const = default;
};

using Envelope = std::variant<HelloHost, HelloClient, Params, SetParam, Applied, Error, Peers, Ping, Pong>;

/// Wire name: HELLO_HOST, HELLO_CLIENT, PARAMS, SET_PARAM, APPLIED, ERROR,
/// PEERS, PING, PONG.
std::string_view type_name(const Envelope& envelope);

enum class EnvelopeErrorCode { parse, unknown_type, missing_field, wrong_kind };

std::string_view to_string(EnvelopeErrorCode code);

class EnvelopeError : public std::runtime_error {
 public:
  EnvelopeError(EnvelopeErrorCode code, std::string field, const std::string& message)
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  EnvelopeErrorCode code() const { return code_; }
  /// Offending field for missing_field / wrong_kind, else empty.
  const std::string& field() const { return field_; }

 private:
  EnvelopeErrorCode code_;
  std::string field_;
};

std::string encode_envelope(const Envelope& envelope);
Envelope decode_envelope(std::string_view text);

}  // namespace parasync::wire
