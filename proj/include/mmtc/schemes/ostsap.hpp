#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/phy_capture.hpp"
#include "mmtc/resource_model.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

enum class FeedbackVariant { Bitmap, ResourceIndex, ResourceIndexQueue };

inline FeedbackVariant parse_feedback(const std::string& s) {
  if (s == "bitmap") return FeedbackVariant::Bitmap;
  if (s == "resource-index") return FeedbackVariant::ResourceIndex;
  if (s == "resource-index-queue") return FeedbackVariant::ResourceIndexQueue;
  throw std::invalid_argument("unknown feedback variant '" + s +
                              "' (expected bitmap, resource-index, resource-index-queue)");
}

struct OstsapConfig {
  bool two_stage = true;
  ResourcePlan resources;
  PreamblePlan preambles;
  CaptureModel capture = CaptureModel::sud();
  FeedbackVariant feedback = FeedbackVariant::Bitmap;
  DetectionModel detection = DetectionModel::ideal();
  int ack_delay = 3;
  int max_queue_ttis = 10;  // resource-index-queue: latest data slot after the earliest one
};

struct Grant {
  DeviceId id;
  int preamble;
  int resource;
};

// (data resource, granted preambles) for the bitmap and resource-index variants.
// Bitmap acknowledges the lowest-index detected preambles mapped to each resource.
inline std::vector<std::pair<int, std::vector<int>>> assign_preambles(const std::vector<int>& detected_sorted,
                                                                      const OstsapConfig& c) {
  const int k = c.capture.capacity();
  std::vector<std::pair<int, std::vector<int>>> out;
  if (c.feedback == FeedbackVariant::Bitmap) {
    std::map<int, std::vector<int>> per;
    for (int p : detected_sorted) {
      auto& v = per[map_preamble_to_data_resource(p, c.preambles)];
      if (static_cast<int>(v.size()) < k) v.push_back(p);
    }
    for (auto& [r, v] : per) out.emplace_back(r, std::move(v));
  } else {
    for (std::size_t i = 0; i < detected_sorted.size(); ++i) {
      int r = static_cast<int>(i) / k;
      if (r >= c.resources.data_prbs) break;
      if (out.empty() || out.back().first != r) out.emplace_back(r, std::vector<int>{});
      out.back().second.push_back(detected_sorted[i]);
    }
  }
  return out;
}

class Ostsap : public AccessScheme {
 public:
  explicit Ostsap(OstsapConfig c) : c_(std::move(c)) {
    auto errs = validate(c_.preambles, c_.resources);
    if (!errs.empty()) throw std::invalid_argument("ostsap: " + errs.front());
    if (c_.capture.kind == CaptureModel::Kind::Table) throw std::invalid_argument("ostsap: capture must be sud or mud");
    if (c_.max_queue_ttis < 0) throw std::invalid_argument("ostsap: max_queue_ttis must be >= 0");
  }

  std::string kind() const override { return c_.two_stage ? "two-stage" : "one-stage"; }
  int opportunities_per_tti() const override { return c_.resources.data_prbs * c_.capture.capacity(); }
  const OstsapConfig& config() const { return c_; }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    const int S = c_.preambles.n_preambles, MD = c_.resources.data_prbs;
    if (by_preamble_.empty()) {
      by_preamble_.resize(S);
      per_resource_.resize(MD);
    }
    // Stage 1: preamble choice and per-preamble activity detection.
    used_.clear();
    for (DeviceId id : attempters) {
      int p = static_cast<int>(uniform_int(rng, 0, S - 1));
      if (by_preamble_[p].empty()) used_.push_back(p);
      by_preamble_[p].push_back(id);
    }
    std::sort(used_.begin(), used_.end());
    detected_.clear();
    missed_.clear();
    for (int p : used_) {
      if (detect_preamble(static_cast<int>(by_preamble_[p].size()), c_.detection, rng)) detected_.push_back(p);
      else missed_.push_back(p);
    }

    if (!c_.two_stage) {
      // Undetected preambles still put energy on their data resource.
      for (int p : detected_)
        for (DeviceId id : by_preamble_[p]) per_resource_[map_preamble_to_data_resource(p, c_.preambles)].push_back({id, p, 0});
      for (int p : missed_)
        for (DeviceId id : by_preamble_[p]) per_resource_[map_preamble_to_data_resource(p, c_.preambles)].push_back({id, -1, 0});
      for (auto& tx : per_resource_)
        if (!tx.empty()) {
          resolve(now, tx, rng, out);
          tx.clear();
        }
      clear_preambles();
      return;
    }

    for (int p : missed_)
      for (DeviceId id : by_preamble_[p]) out.push_back({id, false, now + c_.ack_delay});
    const Tti first_data = now + c_.ack_delay + 1;
    if (c_.feedback == FeedbackVariant::ResourceIndexQueue) {
      const int per_tti = MD * c_.capture.capacity();
      for (int p : detected_) {
        Tti slot = -1;
        for (Tti d = first_data; d <= first_data + c_.max_queue_ttis; ++d)
          if (load_[d] < per_tti) {
            slot = d;
            break;
          }
        if (slot < 0) {
          for (DeviceId id : by_preamble_[p]) out.push_back({id, false, now + c_.ack_delay});
          continue;
        }
        int r = load_[slot]++ / c_.capture.capacity();
        auto& grid = slot_grid(slot);
        for (DeviceId id : by_preamble_[p]) grid[r].push_back({id, p, r});
      }
    } else {
      auto& grid = slot_grid(first_data);
      ok_preamble_.assign(S, 0);
      for (auto& [r, ps] : assign_preambles(detected_, c_))
        for (int p : ps) {
          ok_preamble_[p] = 1;
          for (DeviceId id : by_preamble_[p]) grid[r].push_back({id, p, r});
        }
      for (int p : detected_)
        if (!ok_preamble_[p])
          for (DeviceId id : by_preamble_[p]) out.push_back({id, false, now + c_.ack_delay});
    }
    clear_preambles();

    // Stage 2: granted data transmissions scheduled for this TTI.
    auto it = pending_.find(now);
    if (it != pending_.end()) {
      for (auto& tx : it->second)
        if (!tx.empty()) resolve(now, tx, rng, out);
      pending_.erase(it);
    }
    load_.erase(load_.begin(), load_.upper_bound(now));
  }

 private:
  std::vector<std::vector<Grant>>& slot_grid(Tti t) {
    auto& g = pending_[t];
    if (g.empty()) g.resize(c_.resources.data_prbs);
    return g;
  }

  void clear_preambles() {
    for (int p : used_) by_preamble_[p].clear();
  }

  void resolve(Tti now, std::vector<Grant>& tx, Rng& rng, std::vector<Outcome>& out) {
    ps_.clear();
    bool undetected = false;
    for (auto& g : tx) {
      ps_.push_back(g.preamble);
      undetected = undetected || g.preamble < 0;
    }
    std::sort(ps_.begin(), ps_.end());
    bool distinct = std::adjacent_find(ps_.begin(), ps_.end()) == ps_.end() && !undetected;
    auto dec = resolve_data_resource(static_cast<int>(tx.size()), distinct, c_.capture, rng);
    ok_.assign(tx.size(), 0);
    for (int i : dec) ok_[i] = 1;
    for (std::size_t i = 0; i < tx.size(); ++i) {
      bool s = ok_[i] && tx[i].preamble >= 0;
      out.push_back({tx[i].id, s, s ? now + 1 : now + c_.ack_delay});
    }
  }

  OstsapConfig c_;
  std::map<Tti, std::vector<std::vector<Grant>>> pending_;  // data TTI -> grants per resource
  std::map<Tti, int> load_;
  std::vector<std::vector<DeviceId>> by_preamble_;
  std::vector<std::vector<Grant>> per_resource_;
  std::vector<int> used_, detected_, missed_, ps_;
  std::vector<char> ok_preamble_, ok_;
};

}  // namespace mmtc
