#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/schemes/frame_graph.hpp"
#include "mmtc/sim_core.hpp"
#include "mmtc/sparse_recovery.hpp"

namespace mmtc {

enum class ControlMode { Ideal, Hihtp };

struct CcraConfig {
  int slots_per_frame = 50;
  int n_preambles = 256;  // u
  int replicas = 3;       // per preamble pattern, at most 3
  ControlMode control = ControlMode::Ideal;
  int channel_taps = 4;        // s
  int active_taps = 2;         // k_s
  int control_subcarriers = 0; // n, defaults to u*s
  int control_rows = 0;        // m, defaults to n/2
  double pilot_power = 0.5;    // alpha
  double snr_db = 15.0;
  int hihtp_iters = 30;
  int ack_delay = 3;
};

class Ccra : public AccessScheme {
 public:
  Ccra(CcraConfig c, std::uint64_t pattern_seed) : c_(c) {
    if (c_.replicas < 1 || c_.replicas > 3) throw std::invalid_argument("ccra: replicas must be in [1, 3]");
    if (c_.replicas > c_.slots_per_frame) throw std::invalid_argument("ccra: replicas exceed slots");
    if (c_.n_preambles < 1) throw std::invalid_argument("ccra: n_preambles must be >= 1");
    Rng rng = make_stream(pattern_seed, "ccra-patterns");
    patterns_.resize(c_.n_preambles);
    std::vector<int> slots(c_.slots_per_frame);
    for (auto& p : patterns_) {
      for (int i = 0; i < c_.slots_per_frame; ++i) slots[i] = i;
      for (int r = 0; r < c_.replicas; ++r) std::swap(slots[r], slots[uniform_int(rng, r, c_.slots_per_frame - 1)]);
      p.assign(slots.begin(), slots.begin() + c_.replicas);
    }
    if (c_.control == ControlMode::Hihtp) {
      pattern_.n_blocks = c_.n_preambles;
      pattern_.block_length = c_.channel_taps;
      pattern_.within_block = c_.active_taps;
      int n = c_.control_subcarriers > 0 ? c_.control_subcarriers : c_.n_preambles * c_.channel_taps;
      int m = c_.control_rows > 0 ? c_.control_rows : n / 2;
      channel_ = make_control_channel(pattern_, n, m, c_.pilot_power, rng);
    }
  }

  std::string kind() const override { return "ccra"; }
  int opportunities_per_tti() const override { return c_.slots_per_frame; }
  const std::vector<std::vector<int>>& patterns() const { return patterns_; }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    const int n = static_cast<int>(attempters.size());
    if (n == 0) return;
    std::vector<int> pre(n);
    std::map<int, int> users_on;
    for (int i = 0; i < n; ++i) {
      pre[i] = static_cast<int>(uniform_int(rng, 0, c_.n_preambles - 1));
      ++users_on[pre[i]];
    }
    std::vector<char> seen(c_.n_preambles, 1);
    if (c_.control == ControlMode::Hihtp) seen = detect_on_control(users_on, rng);

    FrameGraph g(n, c_.slots_per_frame);
    std::vector<char> visible(n);
    for (int i = 0; i < n; ++i) {
      for (int s : patterns_[pre[i]]) g.add_replica(i, s);
      visible[i] = users_on[pre[i]] == 1 && seen[pre[i]];
    }
    std::vector<char> resolved = peel(g, visible, std::vector<char>(c_.slots_per_frame, 1));
    for (int i = 0; i < n; ++i)
      out.push_back({attempters[i], resolved[i] != 0, resolved[i] ? now + 1 : now + c_.ack_delay});
  }

 private:
  // Active preambles recovered by HiHTP on the overloaded control channel.
  std::vector<char> detect_on_control(const std::map<int, int>& users_on, Rng& rng) {
    BlockSparsityPattern pat = pattern_;
    pat.active_blocks = static_cast<int>(users_on.size());
    CVec h = CVec::Zero(pat.length());
    const double amp = std::sqrt(c_.pilot_power);
    for (auto& [p, cnt] : users_on)
      for (int u = 0; u < cnt; ++u) {
        std::vector<int> taps(pat.block_length);
        for (int t = 0; t < pat.block_length; ++t) taps[t] = t;
        for (int t = 0; t < pat.within_block; ++t) std::swap(taps[t], taps[uniform_int(rng, t, pat.block_length - 1)]);
        for (int t = 0; t < pat.within_block; ++t)
          h(p * pat.block_length + taps[t]) += amp * complex_normal(rng, 1.0 / pat.within_block);
      }
    const int m = channel_.m();
    const double sigma = noise_sigma(c_.snr_db, m);
    CVec y = channel_.A * h;
    for (int i = 0; i < m; ++i) y(i) += complex_normal(rng, sigma * sigma);
    ThresholdPursuitResult r = hihtp_solve(y, channel_.A, pat, c_.hihtp_iters);
    std::vector<char> seen(c_.n_preambles, 0);
    for (int idx : r.support) seen[idx / pat.block_length] = 1;
    return seen;
  }

  CcraConfig c_;
  std::vector<std::vector<int>> patterns_;
  BlockSparsityPattern pattern_;
  CcraControlChannel channel_;
};

}  // namespace mmtc
