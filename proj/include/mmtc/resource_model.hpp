#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmtc {

struct ResourcePlan {
  int total_prbs_per_tti = 50;
  int control_prbs = 0;  // M_S
  int data_prbs = 50;    // M_D
  int spatial_layers = 1;
};

struct PreamblePlan {
  int n_preambles = 54;       // S
  int over_provisioning = 1;  // N
  int prbs_per_preamble_pool = 6;
};

struct SignatureFramePlan {
  int n_subframes = 1;           // L
  int preambles_per_prach = 216; // M
  int hashes_per_signature = 1;  // k

  int positions() const { return n_subframes * preambles_per_prach; }
};

struct FramePlan {
  int slots_per_frame = 10;  // S
  int replicas = 2;          // R
};

inline std::vector<std::string> validate(const ResourcePlan& p) {
  std::vector<std::string> errs;
  if (p.control_prbs < 0 || p.data_prbs < 0 || p.total_prbs_per_tti < 0)
    errs.push_back("resource plan: PRB counts must be non-negative");
  if (p.control_prbs + p.data_prbs != p.total_prbs_per_tti)
    errs.push_back("resource plan: partition violated, control_prbs + data_prbs = " +
                   std::to_string(p.control_prbs + p.data_prbs) + " but total_prbs_per_tti = " +
                   std::to_string(p.total_prbs_per_tti));
  if (p.spatial_layers < 1) errs.push_back("resource plan: spatial_layers must be >= 1");
  return errs;
}

inline std::vector<std::string> validate(const PreamblePlan& p, const ResourcePlan& r) {
  std::vector<std::string> errs;
  if (p.n_preambles < 1) errs.push_back("preamble plan: n_preambles must be >= 1");
  if (p.over_provisioning < 1) errs.push_back("preamble plan: over_provisioning must be >= 1");
  if (p.n_preambles != p.over_provisioning * r.data_prbs)
    errs.push_back("preamble plan: n_preambles = " + std::to_string(p.n_preambles) +
                   " != over_provisioning * data_prbs = " + std::to_string(p.over_provisioning * r.data_prbs));
  if (p.prbs_per_preamble_pool != r.control_prbs)
    errs.push_back("preamble plan: pool cost " + std::to_string(p.prbs_per_preamble_pool) +
                   " PRBs differs from control_prbs " + std::to_string(r.control_prbs));
  return errs;
}

inline std::vector<std::string> validate(const SignatureFramePlan& p) {
  std::vector<std::string> errs;
  if (p.n_subframes < 1) errs.push_back("signature plan: n_subframes must be >= 1");
  if (p.preambles_per_prach < 1) errs.push_back("signature plan: preambles_per_prach must be >= 1");
  if (p.hashes_per_signature < 1) errs.push_back("signature plan: hashes_per_signature must be >= 1");
  if (p.hashes_per_signature > p.positions()) errs.push_back("signature plan: k exceeds L*M");
  return errs;
}

inline std::vector<std::string> validate(const FramePlan& p) {
  std::vector<std::string> errs;
  if (p.slots_per_frame < 1) errs.push_back("frame plan: slots_per_frame must be >= 1");
  if (p.replicas < 1) errs.push_back("frame plan: replicas must be >= 1");
  if (p.replicas > p.slots_per_frame)
    errs.push_back("frame plan: replicas R = " + std::to_string(p.replicas) + " exceeds slots_per_frame S = " +
                   std::to_string(p.slots_per_frame));
  return errs;
}

inline int opportunities_per_tti(const ResourcePlan& p) {
  if (!validate(p).empty()) throw std::invalid_argument("opportunities_per_tti: invalid plan");
  return p.data_prbs * p.spatial_layers;
}

// Contiguous blocks: preambles [rN, rN + N) point to data resource r.
inline int map_preamble_to_data_resource(int preamble_index, const PreamblePlan& p) {
  if (preamble_index < 0 || preamble_index >= p.n_preambles)
    throw std::out_of_range("preamble index " + std::to_string(preamble_index) + " outside [0, " +
                            std::to_string(p.n_preambles) + ")");
  return preamble_index / p.over_provisioning;
}

// PRACH cost through the (54, 6) and (216, 12) anchors, rounded up.
inline int preamble_pool_prbs(int n_preambles) {
  double prbs = 6.0 + (n_preambles - 54) * (6.0 / 162.0);
  return std::max(1, static_cast<int>(std::ceil(prbs - 1e-9)));
}

struct PlanPreset {
  std::string name;
  ResourcePlan resources;
  std::optional<PreamblePlan> preambles;
  std::string note;
};

inline PlanPreset make_preamble_preset(const std::string& name, int n_preambles, int data_prbs,
                                       const std::string& note) {
  PlanPreset p;
  p.name = name;
  p.resources.control_prbs = preamble_pool_prbs(n_preambles);
  p.resources.data_prbs = data_prbs;
  p.resources.total_prbs_per_tti = p.resources.control_prbs + data_prbs;
  p.preambles = PreamblePlan{n_preambles, n_preambles / data_prbs, p.resources.control_prbs};
  p.note = note;
  return p;
}

inline const std::vector<PlanPreset>& plan_presets() {
  static const std::vector<PlanPreset> presets = [] {
    std::vector<PlanPreset> v;
    v.push_back(make_preamble_preset("ostsap-54", 54, 54, "54 preambles, 54 data resources, N=1"));
    v.push_back(make_preamble_preset("ostsap-108", 108, 54, "108 preambles, 54 data resources, N=2"));
    v.push_back(make_preamble_preset("ostsap-216", 216, 54, "216 preambles, 54 data resources, N=4"));
    {
      PlanPreset p;
      p.name = "sbaia-216";
      p.resources = {50, 12, 38, 1};
      p.note = "216 preambles per PRACH on 12 PRBs, 38 data PRBs";
      v.push_back(p);
    }
    {
      PlanPreset p;
      p.name = "lte-54";
      p.resources = {50, 6, 44, 1};
      p.note = "54 preambles per PRACH on 6 PRBs, 44 data PRBs";
      v.push_back(p);
    }
    {
      PlanPreset p;
      p.name = "notaft-4layer";
      p.resources = {50, 0, 50, 4};
      p.note = "50 PRBs x 4 orthogonal DMRS layers";
      v.push_back(p);
    }
    {
      PlanPreset p;
      p.name = "sa-50";
      p.resources = {50, 0, 50, 1};
      p.note = "50 single-layer opportunities";
      v.push_back(p);
    }
    return v;
  }();
  return presets;
}

inline const PlanPreset& find_plan_preset(const std::string& name) {
  for (const auto& p : plan_presets())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown resource plan preset '" + name + "'");
}

}  // namespace mmtc
