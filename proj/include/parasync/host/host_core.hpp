// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "parasync/param/evaluator.hpp"
#include "parasync/wire/envelope.hpp"

namespace parasync::host {

/// Messages in send order: frames are encoded bytes, the rest envelopes.
using Message = std::variant<wire::Envelope, std::vector<std::uint8_t>>;

/// Accepted edit awaiting evaluation, identified for acknowledgement.
struct EditRef {
  std::uint64_t origin = 0;
  std::uint64_t client_seq = 0;
  /// Relay sequence when stamped, else the client sequence.
  std::uint64_t reply_to = 0;
};

struct PendingParam {
  std::string param_id;
  param::ParamValue value;
  std::vector<EditRef> edits;
};

/// Coalesced edits plus the complete bindings to evaluate them with.
struct Batch {
  param::Bindings bindings;
  std::vector<PendingParam> params;
};

struct EvalFailure {
  std::string node;
  std::string message;
};

using EvalOutcome = std::variant<param::ModelMeshes, EvalFailure>;

/// Runs the evaluation a batch asks for. Pure, safe off-thread.
EvalOutcome evaluate_batch(const param::GraphDefinition& graph, const Batch& batch);

/// Host state machine without I/O or timing. Edits are validated and snapped
/// on submit, coalesced per parameter, and only become visible in
/// descriptors, revisions and frames when their evaluation commits.
class HostCore {
 public:
  /// Announces and evaluates once; throws param::GraphError on a bad graph.
  explicit HostCore(param::GraphDefinition graph);

  const param::GraphDefinition& graph() const { return graph_; }
  const std::vector<param::ParamDescriptor>& descriptors() const { return descriptors_; }
  const param::ModelMeshes& meshes() const { return meshes_; }
  const std::map<std::uint32_t, std::uint64_t>& model_revisions() const { return revisions_; }

  /// Raises future revisions above revisions seen elsewhere (a relay cache).
  void resume_revisions(const std::vector<wire::ModelRevision>& seen);

  /// PARAMS followed by one frame per output, each at a fresh revision.
  std::vector<Message> initial_state();

  /// Validates and snaps into the coalescing buffer, or returns the ERROR to send.
  std::optional<wire::Error> submit(const wire::SetParam& edit);

  bool has_pending() const { return !pending_.empty(); }
  Batch take_pending();

  /// Success: frames for every output, then one APPLIED per parameter.
  /// Failure: one eval_failed ERROR per folded edit; state is untouched.
  std::vector<Message> commit(const Batch& batch, const EvalOutcome& outcome);

 private:
  param::ParamDescriptor* find(const std::string& id);
  std::vector<std::uint8_t> next_frame(std::uint32_t model_id, const geometry::Mesh& mesh);

  param::GraphDefinition graph_;
  std::vector<param::ParamDescriptor> descriptors_;
  param::ModelMeshes meshes_;
  std::map<std::uint32_t, std::uint64_t> revisions_;
  std::vector<PendingParam> pending_;
};

/// Leading-edge rate limit: an evaluation may start immediately when the
/// previous one started at least `interval` ago, otherwise at that boundary.
class Throttle {
 public:
  using Clock = std::chrono::steady_clock;

  explicit Throttle(Clock::duration interval) : interval_(interval) {}

  Clock::time_point next_start(Clock::time_point now) const;
  void started(Clock::time_point at) { last_ = at; }
  Clock::duration interval() const { return interval_; }

 private:
  Clock::duration interval_;
  std::optional<Clock::time_point> last_;
};

}  // namespace parasync::host
