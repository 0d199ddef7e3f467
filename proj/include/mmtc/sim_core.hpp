#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/rng.hpp"

namespace mmtc {

using Tti = std::int64_t;
using DeviceId = std::uint32_t;

struct SimClock {
  Tti tti_index = 0;
  static constexpr double tti_duration_ms = 1.0;

  void step() { ++tti_index; }
};

struct TrafficConfig {
  double arrival_rate_lambda = 0.0;
  int packet_size_bytes = 8;
  double mean_waiting_time_ms = 0.5;
};

struct ArqConfig {
  int ack_delay_ttis = 3;
  int backoff_min_ttis = 0;
  int backoff_max_ttis = 10;
  int max_retransmissions = 4;  // the max_retransmissions-th NACK is final; 0 and 1 both allow a single attempt

  int attempts_allowed() const { return std::max(1, max_retransmissions); }
};

inline std::vector<std::string> validate(const TrafficConfig& t) {
  std::vector<std::string> errs;
  if (!(t.arrival_rate_lambda >= 0.0)) errs.push_back("traffic: arrival_rate_lambda must be >= 0");
  if (t.packet_size_bytes <= 0) errs.push_back("traffic: packet_size_bytes must be > 0");
  if (t.mean_waiting_time_ms < 0.0) errs.push_back("traffic: mean_waiting_time_ms must be >= 0");
  return errs;
}

inline std::vector<std::string> validate(const ArqConfig& a) {
  std::vector<std::string> errs;
  if (a.ack_delay_ttis < 1) errs.push_back("arq: ack_delay_ttis must be >= 1");
  if (a.backoff_min_ttis < 0 || a.backoff_max_ttis < a.backoff_min_ttis)
    errs.push_back("arq: backoff window must satisfy 0 <= min <= max");
  if (a.max_retransmissions < 0) errs.push_back("arq: max_retransmissions must be >= 0");
  return errs;
}

enum class DeviceState { Idle, Backlogged, AwaitingFeedback, Succeeded, Dropped };

struct Device {
  DeviceId id = 0;
  DeviceState state = DeviceState::Idle;
  Tti arrival_tti = 0;                // T1, bound to the TTI boundary after wake-up
  std::optional<Tti> completion_tti;  // T2, TTI after successful reception
  int attempts_used = 0;
  Tti next_attempt_tti = 0;
  Tti drop_tti = -1;
};

struct TtiRecord {
  int arrivals = 0;
  int attempts = 0;
  int successes = 0;  // receptions in this TTI
  int nacks = 0;
  int drops = 0;
};

struct SimTrace {
  std::vector<TtiRecord> ttis;
  std::vector<Device> devices;
  Tti warmup_ttis = 0;
  double waiting_offset_ms = 0.5;

  Tti total_ttis() const { return static_cast<Tti>(ttis.size()); }
  Tti horizon_ttis() const { return total_ttis() - warmup_ttis; }
};

// Poisson(lambda) count per TTI.
inline std::vector<int> generate_arrivals(Rng& rng, const TrafficConfig& traffic, Tti n_ttis) {
  if (n_ttis <= 0) throw std::invalid_argument("generate_arrivals: n_ttis must be > 0");
  if (!(traffic.arrival_rate_lambda >= 0.0)) throw std::invalid_argument("generate_arrivals: lambda < 0");
  std::vector<int> out(static_cast<std::size_t>(n_ttis), 0);
  if (traffic.arrival_rate_lambda == 0.0) return out;
  std::poisson_distribution<int> pd(traffic.arrival_rate_lambda);
  for (auto& v : out) v = pd(rng);
  return out;
}

// `now` is the TTI in which the NACK arrives. Returns the retry TTI, or nullopt when the NACK is final.
inline std::optional<Tti> apply_backoff(const Device& d, Rng& rng, const ArqConfig& arq, Tti now) {
  if (d.attempts_used >= arq.attempts_allowed()) return std::nullopt;
  return now + 1 + uniform_int(rng, arq.backoff_min_ttis, arq.backoff_max_ttis);
}

// Success: `tti` is the completion TTI and must equal now + 1. Nack: `tti` is the feedback TTI, >= now.
struct Outcome {
  DeviceId id = 0;
  bool success = false;
  Tti tti = 0;
};

class AccessScheme {
 public:
  virtual ~AccessScheme() = default;
  virtual std::string kind() const = 0;
  // Devices starting an attempt at `now`; emits outcomes for this or earlier attempts.
  virtual void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) = 0;
  // Device finished for good (success or final drop).
  virtual void on_device_done(DeviceId) {}
  virtual std::optional<ArqConfig> arq_override() const { return std::nullopt; }
  // Upper bound on receptions per TTI.
  virtual int opportunities_per_tti() const = 0;
};

struct SimParams {
  TrafficConfig traffic;
  ArqConfig arq;
  Tti warmup_ttis = 0;
  Tti horizon_ttis = 10000;
  std::uint64_t seed = 1;
};

inline SimTrace simulate(const SimParams& p, AccessScheme& scheme) {
  if (p.horizon_ttis <= 0 || p.warmup_ttis < 0) throw std::invalid_argument("simulate: bad horizon");
  const ArqConfig arq = scheme.arq_override().value_or(p.arq);
  const Tti total = p.warmup_ttis + p.horizon_ttis;
  Rng arrivals_rng = make_stream(p.seed, "arrivals");
  Rng backoff_rng = make_stream(p.seed, "backoff");
  Rng scheme_rng = make_stream(p.seed, "scheme");

  SimTrace trace;
  trace.warmup_ttis = p.warmup_ttis;
  trace.waiting_offset_ms = p.traffic.mean_waiting_time_ms;
  trace.ttis.assign(static_cast<std::size_t>(total), {});
  const std::vector<int> arrivals = generate_arrivals(arrivals_rng, p.traffic, total);
  std::vector<std::vector<DeviceId>> schedule(static_cast<std::size_t>(total));
  auto& devs = trace.devices;
  std::vector<DeviceId> attempters;
  std::vector<Outcome> outcomes;
  SimClock clock;

  for (; clock.tti_index < total; clock.step()) {
    const Tti t = clock.tti_index;
    auto& rec = trace.ttis[static_cast<std::size_t>(t)];
    rec.arrivals = arrivals[static_cast<std::size_t>(t)];
    for (int i = 0; i < rec.arrivals; ++i) {
      Device d;
      d.id = static_cast<DeviceId>(devs.size());
      d.state = DeviceState::Backlogged;
      d.arrival_tti = t;
      d.next_attempt_tti = t;
      devs.push_back(d);
      schedule[static_cast<std::size_t>(t)].push_back(d.id);
    }
    attempters.swap(schedule[static_cast<std::size_t>(t)]);
    std::sort(attempters.begin(), attempters.end());
    for (DeviceId id : attempters) {
      Device& d = devs[id];
      if (d.state != DeviceState::Backlogged || d.next_attempt_tti != t)
        throw std::logic_error("simulate: scheduled device not backlogged");
      d.state = DeviceState::AwaitingFeedback;
      ++d.attempts_used;
    }
    rec.attempts = static_cast<int>(attempters.size());
    outcomes.clear();
    scheme.on_tti(t, attempters, scheme_rng, outcomes);
    attempters.clear();

    for (const Outcome& o : outcomes) {
      if (o.id >= devs.size()) throw std::logic_error(scheme.kind() + ": outcome for unknown device");
      Device& d = devs[o.id];
      if (d.state != DeviceState::AwaitingFeedback)
        throw std::logic_error(scheme.kind() + ": outcome for a device not awaiting feedback");
      if (o.success) {
        if (o.tti != t + 1) throw std::logic_error(scheme.kind() + ": success must complete at now + 1");
        d.state = DeviceState::Succeeded;
        d.completion_tti = o.tti;
        ++rec.successes;
        scheme.on_device_done(d.id);
        continue;
      }
      if (o.tti < t) throw std::logic_error(scheme.kind() + ": feedback in the past");
      ++rec.nacks;
      auto next = apply_backoff(d, backoff_rng, arq, o.tti);
      if (!next) {
        d.state = DeviceState::Dropped;
        d.drop_tti = t;
        ++rec.drops;
        scheme.on_device_done(d.id);
        continue;
      }
      d.state = DeviceState::Backlogged;
      d.next_attempt_tti = *next;
      if (*next < total) schedule[static_cast<std::size_t>(*next)].push_back(d.id);
    }
  }
  return trace;
}

}  // namespace mmtc
