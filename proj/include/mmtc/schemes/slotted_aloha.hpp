#pragma once

#include <string>
#include <vector>

#include "mmtc/resource_model.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

// One round: n devices on R opportunities, returns the number of singletons.
inline int slotted_aloha_round(int n, int opportunities, Rng& rng) {
  std::vector<int> count(opportunities, 0);
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = static_cast<int>(uniform_int(rng, 0, opportunities - 1));
  for (int p : pick) ++count[p];
  int ok = 0;
  for (int p : pick) ok += count[p] == 1;
  return ok;
}

// Uniform choice over M_D x layers opportunities, success iff alone (and the singleton decodes).
class SlottedAloha : public AccessScheme {
 public:
  SlottedAloha(ResourcePlan plan, int ack_delay, double singleton_decode = 1.0, std::string kind = "sa")
      : plan_(plan),
        opportunities_(mmtc::opportunities_per_tti(plan)),
        ack_delay_(ack_delay),
        p1_(singleton_decode),
        kind_(std::move(kind)),
        count_(opportunities_, 0) {}

  std::string kind() const override { return kind_; }
  int opportunities_per_tti() const override { return opportunities_; }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    pick_.resize(attempters.size());
    for (std::size_t i = 0; i < attempters.size(); ++i) {
      pick_[i] = static_cast<int>(uniform_int(rng, 0, opportunities_ - 1));
      ++count_[pick_[i]];
    }
    for (std::size_t i = 0; i < attempters.size(); ++i) {
      bool ok = count_[pick_[i]] == 1 && bernoulli(rng, p1_);
      out.push_back({attempters[i], ok, ok ? now + 1 : now + ack_delay_});
    }
    for (int p : pick_) count_[p] = 0;
  }

 private:
  ResourcePlan plan_;
  int opportunities_;
  int ack_delay_;
  double p1_;
  std::string kind_;
  std::vector<int> count_;
  std::vector<int> pick_;
};

// Non-orthogonal access with ideal orthogonal DMRS layers: (PRB, layer) pairs act as opportunities.
class Notaft : public SlottedAloha {
 public:
  Notaft(ResourcePlan plan, int ack_delay) : SlottedAloha(plan, ack_delay, 1.0, "notaft") {}
};

}  // namespace mmtc
