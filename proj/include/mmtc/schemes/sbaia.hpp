#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/phy_capture.hpp"
#include "mmtc/resource_model.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

using Identity = std::uint32_t;

struct Signature {
  Identity owner = 0;
  std::vector<int> positions;  // ascending, distinct; position = subframe * M + preamble

  std::vector<bool> bits(const SignatureFramePlan& plan) const {
    std::vector<bool> b(plan.positions(), false);
    for (int p : positions) b[p] = true;
    return b;
  }
  int last_subframe(const SignatureFramePlan& plan) const { return positions.back() / plan.preambles_per_prach; }
};

// k independent hashes of the identity select preamble positions over the L x M frame.
inline Signature build_signature(Identity identity, const SignatureFramePlan& plan) {
  if (plan.hashes_per_signature < 1 || plan.hashes_per_signature > plan.positions())
    throw std::invalid_argument("build_signature: k outside [1, L*M]");
  Signature s;
  s.owner = identity;
  const std::uint64_t base = splitmix64(0x5b1a5eedULL ^ identity);
  for (int j = 0; j < plan.hashes_per_signature; ++j) {
    std::uint64_t h = splitmix64(base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(j + 1));
    s.positions.push_back(static_cast<int>(h % static_cast<std::uint64_t>(plan.positions())));
  }
  std::sort(s.positions.begin(), s.positions.end());
  s.positions.erase(std::unique(s.positions.begin(), s.positions.end()), s.positions.end());
  return s;
}

struct SbaiaDesign {
  int n_subframes = 1;  // L
  int hashes = 1;       // k
  double expected_active = 0.0;
  double fp_per_identity = 0.0;
  double fp_ratio = 0.0;  // expected false positives per true activation
  bool clamped = false;
  bool in_regime = false;
};

// Bloom-optimal weight k = M ln2 / lambda, one activated preamble per PRACH on average (L = k).
inline SbaiaDesign sbaia_dimension(double lambda, int preambles_per_prach, int universe,
                                   const DetectionModel& det, double fp_budget, int k_max = 64) {
  SbaiaDesign d;
  const double M = preambles_per_prach;
  double k_star = lambda > 0 ? M * std::log(2.0) / lambda : k_max + 1.0;
  int k = static_cast<int>(std::lround(k_star));
  d.clamped = k < 1 || k > k_max;
  d.hashes = std::clamp(k, 1, k_max);
  d.n_subframes = d.hashes;
  d.expected_active = lambda * d.n_subframes;
  const double positions = M * d.n_subframes;
  const double rho = 1.0 - std::exp(-d.hashes * d.expected_active / positions);
  const double p_one = rho * det.p_detect + (1.0 - rho) * det.p_false;
  d.fp_per_identity = std::pow(p_one, d.hashes);
  const double idle = std::max(0.0, universe - d.expected_active);
  d.fp_ratio = d.expected_active > 0 ? idle * d.fp_per_identity / d.expected_active : 0.0;
  d.in_regime = !d.clamped && lambda > 0 && d.fp_ratio <= fp_budget;
  return d;
}

// Bit-wise AND membership test of every registered signature against the OR superposition,
// one subframe at a time.
class SignatureDecoder {
 public:
  SignatureDecoder(SignatureFramePlan plan, int universe) : plan_(plan) {
    if (universe < 1) throw std::invalid_argument("signature decoder: universe must be >= 1");
    sigs_.reserve(universe);
    by_last_.assign(plan.n_subframes, {});
    for (int u = 0; u < universe; ++u) {
      sigs_.push_back(build_signature(static_cast<Identity>(u), plan));
      by_last_[sigs_.back().last_subframe(plan)].push_back(static_cast<Identity>(u));
    }
    count_.assign(plan.positions(), 0);
    y_.assign(plan.positions(), 0);
  }

  const SignatureFramePlan& plan() const { return plan_; }
  int universe() const { return static_cast<int>(sigs_.size()); }
  const Signature& signature(Identity u) const { return sigs_.at(u); }

  void begin_frame(const std::vector<Identity>& active) {
    std::fill(count_.begin(), count_.end(), 0);
    std::fill(y_.begin(), y_.end(), 0);
    for (Identity u : active)
      for (int p : sigs_.at(u).positions) ++count_[p];
  }

  // Draws the observation of subframe l and returns identities whose signature completes there.
  std::vector<Identity> observe_subframe(int l, const DetectionModel& det, Rng& rng) {
    const int M = plan_.preambles_per_prach;
    for (int p = l * M; p < (l + 1) * M; ++p) y_[p] = detect_preamble(count_[p], det, rng) ? 1 : 0;
    std::vector<Identity> out;
    for (Identity u : by_last_[l]) {
      bool all = true;
      for (int p : sigs_[u].positions)
        if (!y_[p]) {
          all = false;
          break;
        }
      if (all) out.push_back(u);
    }
    return out;
  }

  const std::vector<char>& observation() const { return y_; }

 private:
  SignatureFramePlan plan_;
  std::vector<Signature> sigs_;
  std::vector<std::vector<Identity>> by_last_;
  std::vector<int> count_;
  std::vector<char> y_;
};

struct SignatureFrameResult {
  std::vector<Identity> decoded;          // ascending
  std::vector<Identity> false_positives;  // decoded but not active
};

inline SignatureFrameResult scheme_signature_frame(const std::vector<Identity>& active, SignatureDecoder& dec,
                                                   const DetectionModel& det, Rng& rng) {
  dec.begin_frame(active);
  SignatureFrameResult r;
  for (int l = 0; l < dec.plan().n_subframes; ++l) {
    auto d = dec.observe_subframe(l, det, rng);
    r.decoded.insert(r.decoded.end(), d.begin(), d.end());
  }
  std::sort(r.decoded.begin(), r.decoded.end());
  std::vector<Identity> act = active;
  std::sort(act.begin(), act.end());
  std::set_difference(r.decoded.begin(), r.decoded.end(), act.begin(), act.end(),
                      std::back_inserter(r.false_positives));
  return r;
}

struct SbaiaConfig {
  int preambles_per_prach = 216;
  ResourcePlan resources{50, 12, 38, 1};
  int universe = 1024;
  DetectionModel detection{0.99, 1e-3};
  double fp_budget = 1e-3;
  int k_max = 64;
  double lambda_design = 0.0;
  std::optional<int> n_subframes;  // fixed L overrides dimensioning
  std::optional<int> hashes;       // fixed k overrides dimensioning
  bool early_detection = false;    // true: lower latency bound, false: decision at frame end
  int ack_delay = 3;
  int max_queue_ttis = 20;
};

class Sbaia : public AccessScheme {
 public:
  explicit Sbaia(SbaiaConfig c)
      : c_(c),
        design_(sbaia_dimension(c.lambda_design, c.preambles_per_prach, c.universe, c.detection, c.fp_budget,
                                c.k_max)),
        decoder_(make_plan(c, design_), c.universe) {
    if (c_.universe < 1) throw std::invalid_argument("sbaia: universe must be >= 1");
    owner_.assign(c_.universe, kNone);
    for (int u = c_.universe - 1; u >= 0; --u) free_.push_back(static_cast<Identity>(u));
  }

  std::string kind() const override { return "sbaia"; }
  int opportunities_per_tti() const override { return c_.resources.data_prbs; }
  const SbaiaDesign& design() const { return design_; }
  const SignatureFramePlan& plan() const { return decoder_.plan(); }
  long long false_positive_grants() const { return fp_grants_; }

  void on_device_done(DeviceId id) override {
    auto it = identity_.find(id);
    if (it == identity_.end()) return;
    owner_[it->second] = kNone;
    free_.push_back(it->second);
    identity_.erase(it);
  }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    const int L = decoder_.plan().n_subframes;
    for (DeviceId id : attempters) {
      if (!identity_.count(id)) {
        if (free_.empty()) {
          out.push_back({id, false, now + c_.ack_delay});
          continue;
        }
        std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(free_.size()) - 1));
        std::swap(free_[j], free_.back());
        identity_[id] = free_.back();
        owner_[free_.back()] = id;
        free_.pop_back();
      }
      waiting_.push_back(id);
    }

    const int l = static_cast<int>(now % L);
    if (l == 0) {
      members_.swap(waiting_);
      waiting_.clear();
      member_set_ = std::set<DeviceId>(members_.begin(), members_.end());
      std::vector<Identity> active;
      for (DeviceId id : members_) active.push_back(identity_.at(id));
      decoder_.begin_frame(active);
      frame_decoded_.clear();
    }
    auto dec = decoder_.observe_subframe(l, c_.detection, rng);
    if (c_.early_detection) schedule(now, dec, out);
    else frame_decoded_.insert(frame_decoded_.end(), dec.begin(), dec.end());
    if (l == L - 1) {
      if (!c_.early_detection) {
        std::sort(frame_decoded_.begin(), frame_decoded_.end());
        schedule(now, frame_decoded_, out);
      }
      for (DeviceId id : members_)
        if (!granted_.count(id)) out.push_back({id, false, now + c_.ack_delay});
      granted_.clear();
      members_.clear();
      member_set_.clear();
    }

    auto it = data_.find(now);
    if (it != data_.end()) {
      for (DeviceId id : it->second) out.push_back({id, true, now + 1});
      data_.erase(it);
    }
    load_.erase(load_.begin(), load_.upper_bound(now));
  }

 private:
  static constexpr DeviceId kNone = ~DeviceId{0};

  static SignatureFramePlan make_plan(const SbaiaConfig& c, const SbaiaDesign& d) {
    SignatureFramePlan p;
    p.preambles_per_prach = c.preambles_per_prach;
    p.n_subframes = c.n_subframes.value_or(d.n_subframes);
    p.hashes_per_signature = c.hashes.value_or(d.hashes);
    auto errs = validate(p);
    if (!errs.empty()) throw std::invalid_argument("sbaia: " + errs.front());
    return p;
  }

  // FIFO grants on the first free data PRBs; false positives consume PRBs like real devices.
  void schedule(Tti decision, const std::vector<Identity>& ids, std::vector<Outcome>& out) {
    for (Identity u : ids) {
      DeviceId owner = owner_[u];
      bool member = owner != kNone && member_set_.count(owner) > 0;
      Tti first = decision + c_.ack_delay + 1;
      Tti slot = -1;
      for (Tti d = first; d <= first + c_.max_queue_ttis; ++d)
        if (load_[d] < c_.resources.data_prbs) {
          slot = d;
          break;
        }
      if (!member) {
        if (slot >= 0) {
          ++load_[slot];
          ++fp_grants_;
        }
        continue;
      }
      granted_.insert(owner);
      if (slot < 0) {
        out.push_back({owner, false, decision + c_.ack_delay});
        continue;
      }
      ++load_[slot];
      data_[slot].push_back(owner);
    }
  }

  SbaiaConfig c_;
  SbaiaDesign design_;
  SignatureDecoder decoder_;
  std::vector<DeviceId> owner_;
  std::vector<Identity> free_;
  std::map<DeviceId, Identity> identity_;
  std::vector<DeviceId> waiting_, members_;
  std::vector<Identity> frame_decoded_;
  std::set<DeviceId> member_set_, granted_;
  std::map<Tti, int> load_;
  std::map<Tti, std::vector<DeviceId>> data_;
  long long fp_grants_ = 0;
};

}  // namespace mmtc
