// SPDX-License-Identifier: Apache-2.0
#include "parasync/client/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace parasync::client {

LatencySummary summarize(std::vector<double> samples_ms) {
  LatencySummary s;
  s.count = samples_ms.size();
  if (samples_ms.empty()) return s;
  std::sort(samples_ms.begin(), samples_ms.end());
  s.min_ms = samples_ms.front();
  s.max_ms = samples_ms.back();
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / static_cast<double>(samples_ms.size());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples_ms.size())));
  s.p95_ms = samples_ms[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

BenchResult run_bench(ScriptedClient& client, std::size_t edits, std::uint64_t seed,
                      std::chrono::milliseconds timeout) {
  std::mt19937_64 rng(seed);
  BenchResult result;
  for (std::size_t i = 0; i < edits; ++i) {
    const auto snap = client.snapshot();
    std::vector<const param::ParamDescriptor*> numeric;
    for (const auto& d : snap.params) {
      if (d.kind == param::ParamKind::real || d.kind == param::ParamKind::integer) numeric.push_back(&d);
    }
    if (numeric.empty()) throw ClientError(ClientError::Kind::protocol, "session announces no numeric parameters");
    const auto& d = *numeric[rng() % numeric.size()];
    const double current = param::as_number(d, d.value);
    std::vector<double> others;
    for (double v : param::selectable_values(d)) {
      if (v != current) others.push_back(v);
    }
    const double value = others[rng() % others.size()];
    const auto outcome = client.set(d.id, value, timeout);
    if (std::holds_alternative<wire::Error>(outcome.reply)) {
      ++result.errors;
      continue;
    }
    result.latencies_ms.push_back(std::chrono::duration<double, std::milli>(outcome.latency).count());
  }
  result.summary = summarize(result.latencies_ms);
  return result;
}

}  // namespace parasync::client
