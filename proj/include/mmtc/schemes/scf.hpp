#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/finite_field.hpp"
#include "mmtc/phy_capture.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

struct ScfTopology {
  int n_mini_bs = 2;           // B
  int frequency_slots = 50;    // per TTI
  int slots_per_device = 4;
  int max_colliders = 9;
  int messages_per_device = 2; // real and imaginary parts
  int equations_per_slot = 2;  // per mini-BS
};

struct ScfConfig {
  ScfTopology topology;
  std::uint32_t prime = 257;
  int symbols = 4;             // k, message length over GF(p)
  std::vector<double> p_of_n;  // equation decode probability by collider count, index 0 unused
  int ack_delay = 3;
};

struct ScfFrameStats {
  long long frames = 0;
  long long full_rank_frames = 0;
  long long devices = 0;
  long long resolved_devices = 0;
};

struct ScfFrameResult {
  std::vector<char> resolved;  // per device
  std::size_t rank = 0;
  std::size_t unknowns = 0;
  bool full_rank = false;
};

// Slot choice honours the collider cap: each device picks among slots still below it.
// Devices that cannot place all their replicas are blocked.
inline std::vector<std::vector<int>> scf_pick_slots(int n_devices, const ScfTopology& t, Rng& rng,
                                                    std::vector<char>& blocked) {
  std::vector<std::vector<int>> picks(n_devices);
  std::vector<int> load(t.frequency_slots, 0);
  blocked.assign(n_devices, 0);
  for (int d = 0; d < n_devices; ++d) {
    std::vector<int> open;
    for (int s = 0; s < t.frequency_slots; ++s)
      if (load[s] < t.max_colliders) open.push_back(s);
    if (static_cast<int>(open.size()) < t.slots_per_device) {
      blocked[d] = 1;
      continue;
    }
    for (int r = 0; r < t.slots_per_device; ++r) {
      std::swap(open[r], open[uniform_int(rng, r, static_cast<int>(open.size()) - 1)]);
      picks[d].push_back(open[r]);
      ++load[open[r]];
    }
  }
  return picks;
}

// Each mini-BS decodes, per slot and with probability P(colliders), integer-forcing equations
// with random nonzero GF(p) coefficients over the messages in that slot. The macro BS stacks
// everything and solves; a device is served when both of its messages are determined.
inline ScfFrameResult scf_resolve(const std::vector<std::vector<int>>& picks, const std::vector<char>& blocked,
                                  const ScfConfig& c, const Field& f, Rng& rng) {
  const ScfTopology& t = c.topology;
  const int n = static_cast<int>(picks.size());
  const int mpd = t.messages_per_device;
  std::vector<int> idx(n, -1);
  int active = 0;
  for (int d = 0; d < n; ++d)
    if (!blocked[d]) idx[d] = active++;
  const std::size_t M = static_cast<std::size_t>(active) * mpd;
  FfMatrix W(M, c.symbols);
  for (std::size_t i = 0; i < M; ++i)
    for (int k = 0; k < c.symbols; ++k) W(i, k) = f.random(rng);

  std::vector<std::vector<int>> in_slot(t.frequency_slots);
  for (int d = 0; d < n; ++d)
    for (int s : picks[d]) in_slot[s].push_back(d);
  FfMatrix B(0, M);
  auto P = [&](int k) { return k >= 1 && static_cast<std::size_t>(k) < c.p_of_n.size() ? c.p_of_n[k] : 0.0; };
  for (int s = 0; s < t.frequency_slots; ++s) {
    const int colliders = static_cast<int>(in_slot[s].size());
    if (colliders == 0) continue;
    if (colliders > t.max_colliders) throw std::logic_error("scf: collider cap exceeded");
    for (int b = 0; b < t.n_mini_bs; ++b) {
      if (!bernoulli(rng, P(colliders))) continue;
      for (int e = 0; e < t.equations_per_slot; ++e) {
        std::vector<FfElem> row(M, 0);
        for (int d : in_slot[s])
          for (int m = 0; m < mpd; ++m) row[static_cast<std::size_t>(idx[d]) * mpd + m] = f.random_nonzero(rng);
        B.append_row(row);
      }
    }
  }
  ScfFrameResult r;
  r.resolved.assign(n, 0);
  r.unknowns = M;
  if (M == 0) {
    r.full_rank = true;
    return r;
  }
  if (B.rows() == 0) return r;
  FfMatrix U = ff_mul(f, B, W);
  SolveResult s = ff_solve(f, {B, U});
  if (s.status == SolveStatus::Inconsistent) throw std::logic_error("scf: inconsistent equations");
  r.rank = s.rank;
  r.full_rank = s.solved();
  bool all = true;
  for (int d = 0; d < n; ++d) {
    if (blocked[d]) continue;
    bool ok = true;
    for (int m = 0; m < mpd; ++m) {
      std::size_t j = static_cast<std::size_t>(idx[d]) * mpd + m;
      if (!s.determined[j]) {
        ok = false;
        continue;
      }
      for (int k = 0; k < c.symbols; ++k)
        if (s.messages(j, k) != W(j, k)) throw std::logic_error("scf: wrong message recovered");
    }
    r.resolved[d] = ok;
    all = all && ok;
  }
  // Frame resolvable iff the GF(p) rank equals the message count.
  if (all != (s.rank == M)) throw std::logic_error("scf: resolvability disagrees with rank condition");
  return r;
}

class Scf : public AccessScheme {
 public:
  explicit Scf(ScfConfig c) : c_(std::move(c)), field_(FieldSpec{c_.prime, 1}) {
    const auto& t = c_.topology;
    if (t.n_mini_bs < 1 || t.frequency_slots < 1 || t.slots_per_device < 1 || t.max_colliders < 1 ||
        t.messages_per_device < 1 || t.equations_per_slot < 1)
      throw std::invalid_argument("scf: topology entries must be positive");
    if (t.slots_per_device > t.frequency_slots) throw std::invalid_argument("scf: slots_per_device > frequency_slots");
  }

  std::string kind() const override { return "scf"; }
  int opportunities_per_tti() const override {
    const auto& t = c_.topology;
    int by_equations = t.n_mini_bs * t.equations_per_slot * t.frequency_slots / t.messages_per_device;
    int by_slots = t.max_colliders * t.frequency_slots / t.slots_per_device;
    return std::min(by_equations, by_slots);
  }
  const ScfFrameStats& stats() const { return stats_; }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    const int n = static_cast<int>(attempters.size());
    if (n == 0) return;
    std::vector<char> blocked;
    auto picks = scf_pick_slots(n, c_.topology, rng, blocked);
    ScfFrameResult r = scf_resolve(picks, blocked, c_, field_, rng);
    ++stats_.frames;
    stats_.full_rank_frames += r.full_rank;
    stats_.devices += n;
    for (int d = 0; d < n; ++d) {
      stats_.resolved_devices += r.resolved[d];
      out.push_back({attempters[d], r.resolved[d] != 0, r.resolved[d] ? now + 1 : now + c_.ack_delay});
    }
  }

 private:
  ScfConfig c_;
  Field field_;
  ScfFrameStats stats_;
};

}  // namespace mmtc
