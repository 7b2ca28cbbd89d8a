// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "parasync/client/scripted_client.hpp"

namespace parasync::client {

struct LatencySummary {
  std::size_t count = 0;
  double min_ms = 0;
  double mean_ms = 0;
  double p95_ms = 0;  ///< nearest-rank
  double max_ms = 0;
};

LatencySummary summarize(std::vector<double> samples_ms);

struct BenchResult {
  std::vector<double> latencies_ms;
  LatencySummary summary;
  std::size_t errors = 0;
};

/// Sends `edits` sequential edits, each to a random numeric parameter and a
/// random selectable value different from its current one, waiting for each
/// APPLIED. Latency is edit send to arrival of the frames it produced.
/// Throws ClientError on timeout or disconnect.
BenchResult run_bench(ScriptedClient& client, std::size_t edits, std::uint64_t seed,
                      std::chrono::milliseconds timeout);

}  // namespace parasync::client
