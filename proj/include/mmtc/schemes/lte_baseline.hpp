#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmtc/phy_capture.hpp"
#include "mmtc/resource_model.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

// Multi-stage LTE access reduced to its timing constants.
struct LteBaselineConfig {
  int n_preambles = 54;
  ResourcePlan resources{50, 6, 44, 1};
  DetectionModel detection = DetectionModel::ideal();
  int grant_delay = 10;   // random access response window
  int setup_delay = 40;   // contention resolution and connection setup
  int backoff_max = 20;
  int max_attempts = 10;
};

class LteBaseline : public AccessScheme {
 public:
  explicit LteBaseline(LteBaselineConfig c) : c_(c) {}

  std::string kind() const override { return "lte-baseline"; }
  int opportunities_per_tti() const override { return c_.resources.data_prbs; }

  std::optional<ArqConfig> arq_override() const override {
    ArqConfig a;
    a.ack_delay_ttis = c_.grant_delay;
    a.backoff_min_ttis = 0;
    a.backoff_max_ttis = c_.backoff_max;
    a.max_retransmissions = c_.max_attempts;
    return a;
  }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    std::map<int, std::vector<DeviceId>> by_preamble;
    for (DeviceId id : attempters)
      by_preamble[static_cast<int>(uniform_int(rng, 0, c_.n_preambles - 1))].push_back(id);
    for (auto& [p, ids] : by_preamble) {
      if (!detect_preamble(static_cast<int>(ids.size()), c_.detection, rng)) {
        for (DeviceId id : ids) out.push_back({id, false, now + c_.grant_delay});
        continue;
      }
      if (ids.size() > 1) {
        for (DeviceId id : ids) out.push_back({id, false, now + c_.setup_delay});
        continue;
      }
      Tti d = now + c_.setup_delay + 1;
      while (load_[d] >= c_.resources.data_prbs) ++d;
      ++load_[d];
      data_[d].push_back(ids.front());
    }
    auto it = data_.find(now);
    if (it != data_.end()) {
      for (DeviceId id : it->second) out.push_back({id, true, now + 1});
      data_.erase(it);
    }
    load_.erase(load_.begin(), load_.upper_bound(now));
  }

 private:
  LteBaselineConfig c_;
  std::map<Tti, int> load_;
  std::map<Tti, std::vector<DeviceId>> data_;
};

}  // namespace mmtc
