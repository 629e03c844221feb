#pragma once

#include <algorithm>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/json.hpp"

namespace ctxnav::harness {

/// Per-episode inputs to the benchmark metrics.
struct MetricSample {
  bool success = false;
  double path_length = 0.0;      // p_i
  double shortest_length = 0.0;  // l_i
};

struct Metrics {
  std::size_t episodes = 0;
  double sr = 0.0;   // percent
  double spl = 0.0;  // percent
};

/// SR = mean S_i, SPL = 1/N sum S_i * l_i / max(p_i, l_i), both in percent.
inline Metrics compute_metrics(const std::vector<MetricSample>& xs) {
  if (xs.empty()) throw DomainError("compute_metrics: empty result list");
  double s = 0.0, spl = 0.0;
  for (const auto& x : xs) {
    if (!(x.shortest_length > 0.0)) throw DomainError("compute_metrics: shortest path length must be positive");
    if (x.path_length < 0.0) throw DomainError("compute_metrics: negative path length");
    if (!x.success) continue;
    s += 1.0;
    spl += x.shortest_length / std::max(x.path_length, x.shortest_length);
  }
  const double n = static_cast<double>(xs.size());
  return {xs.size(), 100.0 * s / n, 100.0 * spl / n};
}

inline OrderedJson metrics_to_json(const Metrics& m) {
  OrderedJson j;
  j["episodes"] = m.episodes;
  j["SR"] = m.sr;
  j["SPL"] = m.spl;
  return j;
}

}  // namespace ctxnav::harness
