// SPDX-License-Identifier: Apache-2.0
#include "parasync/host/host_core.hpp"

#include <algorithm>

#include "parasync/wire/mesh_frame.hpp"

namespace parasync::host {

EvalOutcome evaluate_batch(const param::GraphDefinition& graph, const Batch& batch) {
  try {
    return param::evaluate(graph, batch.bindings);
  } catch (const param::GraphError& e) {
    return EvalFailure{e.subject(), e.what()};
  }
}

HostCore::HostCore(param::GraphDefinition graph) : graph_(std::move(graph)) {
  descriptors_ = param::announce(graph_);
  meshes_ = param::evaluate(graph_, param::bindings_of(descriptors_));
  for (const auto& [model_id, mesh] : meshes_) revisions_[model_id] = 0;
}

void HostCore::resume_revisions(const std::vector<wire::ModelRevision>& seen) {
  for (const auto& r : seen) {
    auto& rev = revisions_[r.model_id];
    rev = std::max(rev, r.revision);
  }
}

std::vector<std::uint8_t> HostCore::next_frame(std::uint32_t model_id, const geometry::Mesh& mesh) {
  return wire::encode_mesh(model_id, ++revisions_[model_id], mesh);
}

std::vector<Message> HostCore::initial_state() {
  std::vector<Message> out;
  out.emplace_back(wire::Envelope{wire::Params{descriptors_}});
  for (const auto& [model_id, mesh] : meshes_) out.emplace_back(next_frame(model_id, mesh));
  return out;
}

param::ParamDescriptor* HostCore::find(const std::string& id) {
  const auto it = std::find_if(descriptors_.begin(), descriptors_.end(), [&](const auto& d) { return d.id == id; });
  return it == descriptors_.end() ? nullptr : &*it;
}

std::optional<wire::Error> HostCore::submit(const wire::SetParam& edit) {
  const std::uint64_t reply_to = edit.relay_seq.value_or(edit.client_seq);
  const param::ParamDescriptor* d = find(edit.param_id);
  if (d == nullptr) return wire::Error{"unknown_param", "unknown parameter '" + edit.param_id + "'", reply_to};
  param::ParamValue value;
  try {
    value = param::snap(*d, edit.value);
  } catch (const param::ParamError& e) {
    return wire::Error{std::string(param::to_string(e.code())), e.what(), reply_to};
  }
  const EditRef ref{edit.origin.value_or(0), edit.client_seq, reply_to};
  const auto it =
      std::find_if(pending_.begin(), pending_.end(), [&](const PendingParam& p) { return p.param_id == edit.param_id; });
  if (it == pending_.end()) {
    pending_.push_back({edit.param_id, std::move(value), {ref}});
  } else {
    it->value = std::move(value);
    it->edits.push_back(ref);
  }
  return std::nullopt;
}

Batch HostCore::take_pending() {
  Batch batch;
  batch.bindings = param::bindings_of(descriptors_);
  for (const auto& p : pending_) batch.bindings[p.param_id] = p.value;
  batch.params = std::move(pending_);
  pending_.clear();
  return batch;
}

std::vector<Message> HostCore::commit(const Batch& batch, const EvalOutcome& outcome) {
  std::vector<Message> out;
  if (const auto* failure = std::get_if<EvalFailure>(&outcome)) {
    for (const auto& p : batch.params) {
      for (const auto& e : p.edits) {
        out.emplace_back(wire::Envelope{wire::Error{
            "eval_failed", "evaluation failed at node '" + failure->node + "': " + failure->message, e.reply_to}});
      }
    }
    return out;
  }
  meshes_ = std::get<param::ModelMeshes>(outcome);
  for (const auto& [model_id, mesh] : meshes_) out.emplace_back(next_frame(model_id, mesh));

  std::vector<wire::ModelRevision> revisions;
  for (const auto& [model_id, rev] : revisions_) revisions.push_back({model_id, rev});
  for (const auto& p : batch.params) {
    param::ParamDescriptor* d = find(p.param_id);
    d->value = p.value;
    d->revision += p.edits.size();
    wire::Applied applied{p.param_id, p.value, d->revision, revisions, {}};
    for (const auto& e : p.edits) applied.acks.push_back({e.origin, e.client_seq});
    out.emplace_back(wire::Envelope{std::move(applied)});
  }
  return out;
}

Throttle::Clock::time_point Throttle::next_start(Clock::time_point now) const {
  if (!last_) return now;
  return std::max(now, *last_ + interval_);
}

}  // namespace parasync::host
