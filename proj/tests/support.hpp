#pragma once

#include "mmtc/sim_core.hpp"

namespace mmtc::test_support {

inline bool same_trace(const SimTrace& a, const SimTrace& b) {
  if (a.ttis.size() != b.ttis.size() || a.devices.size() != b.devices.size()) return false;
  for (std::size_t i = 0; i < a.ttis.size(); ++i) {
    const auto &x = a.ttis[i], &y = b.ttis[i];
    if (x.arrivals != y.arrivals || x.attempts != y.attempts || x.successes != y.successes || x.nacks != y.nacks ||
        x.drops != y.drops)
      return false;
  }
  for (std::size_t i = 0; i < a.devices.size(); ++i) {
    const auto &x = a.devices[i], &y = b.devices[i];
    if (x.state != y.state || x.arrival_tti != y.arrival_tti || x.completion_tti != y.completion_tti ||
        x.attempts_used != y.attempts_used || x.drop_tti != y.drop_tti)
      return false;
  }
  return true;
}

inline SimParams params(double lambda, Tti horizon, std::uint64_t seed, int max_retx = 4) {
  SimParams p;
  p.traffic.arrival_rate_lambda = lambda;
  p.arq.max_retransmissions = max_retx;
  p.horizon_ttis = horizon;
  p.seed = seed;
  return p;
}

}  // namespace mmtc::test_support
