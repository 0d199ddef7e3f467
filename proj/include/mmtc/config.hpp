#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/phy_capture.hpp"
#include "mmtc/resource_model.hpp"
#include "mmtc/schemes/ccra.hpp"
#include "mmtc/schemes/craplnc.hpp"
#include "mmtc/schemes/csmud.hpp"
#include "mmtc/schemes/lte_baseline.hpp"
#include "mmtc/schemes/ostsap.hpp"
#include "mmtc/schemes/sbaia.hpp"
#include "mmtc/schemes/scf.hpp"
#include "mmtc/schemes/slotted_aloha.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

using boost::property_tree::ptree;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemeSpec {
  std::string label;
  std::string type;
  std::map<std::string, std::string> params;
};

struct ScenarioConfig {
  std::string name = "scenario";
  TrafficConfig traffic;
  ArqConfig arq;
  std::vector<double> lambdas;
  int seeds = 20;
  std::uint64_t base_seed = 1;
  Tti horizon_ttis = 10000;
  Tti warmup_ttis = 200;
  int batches = 20;
  std::vector<SchemeSpec> schemes;
  std::filesystem::path base_dir;  // resolves relative decode-table paths
  std::string canonical;           // effective config text, hashed into the manifest
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& scheme_keys() {
  static const std::set<std::string> plan = {"plan", "total_prbs", "control_prbs", "data_prbs", "spatial_layers"};
  auto with_plan = [&](std::set<std::string> s) {
    s.insert(plan.begin(), plan.end());
    return s;
  };
  static const std::map<std::string, std::set<std::string>> keys = {
      {"sa", with_plan({"type", "decode_table", "snr_db"})},
      {"notaft", with_plan({"type"})},
      {"one-stage", with_plan({"type", "capture", "p_detect", "p_false"})},
      {"two-stage", with_plan({"type", "capture", "feedback", "p_detect", "p_false", "max_queue_ttis"})},
      {"lte-baseline",
       with_plan({"type", "n_preambles", "p_detect", "p_false", "grant_delay", "setup_delay", "backoff_max",
                  "max_attempts"})},
      {"sbaia",
       with_plan({"type", "preambles_per_prach", "universe", "p_detect", "p_false", "fp_budget", "k_max",
                  "lambda_design", "subframes", "hashes", "bound", "max_queue_ttis"})},
      {"csmud", {"type", "n_sequences", "spreading_length", "snr_db", "sinr_threshold_db"}},
      {"craplnc",
       {"type", "slots_per_frame", "replicas", "prbs_per_slot", "field", "precoding", "decode_table", "snr_db",
        "symbols"}},
      {"ccra",
       {"type", "slots_per_frame", "n_preambles", "replicas", "control", "channel_taps", "active_taps",
        "control_subcarriers", "control_rows", "pilot_power", "snr_db", "hihtp_iters"}},
      {"scf",
       {"type", "n_mini_bs", "frequency_slots", "slots_per_device", "max_colliders", "equations_per_slot", "prime",
        "decode_table", "snr_db", "symbols"}},
  };
  return keys;
}

inline const std::map<std::string, std::set<std::string>>& section_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario", {"name", "horizon_ttis", "warmup_ttis", "seeds", "base_seed", "batches"}},
      {"traffic", {"lambda", "packet_size_bytes", "mean_waiting_time_ms"}},
      {"arq", {"ack_delay_ttis", "backoff_min_ttis", "backoff_max_ttis", "max_retransmissions"}},
  };
  return keys;
}

inline std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  std::string rest;
  if (!is || (is >> rest)) throw ConfigError(where(section, key) + ": cannot parse '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(where(section, key) + ": expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& section, const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(where(section, key) + ": empty list element");
    tok = tok.substr(b, e - b + 1);
    auto colon = tok.find(':');
    if (colon != std::string::npos) {
      // start:step:stop, inclusive
      std::stringstream rs(tok);
      std::string a, s, z;
      std::getline(rs, a, ':');
      std::getline(rs, s, ':');
      std::getline(rs, z, ':');
      double lo = parse_value<double>(section, key, a), step = parse_value<double>(section, key, s),
             hi = parse_value<double>(section, key, z);
      if (step <= 0) throw ConfigError(where(section, key) + ": range step must be > 0");
      for (int i = 0; lo + i * step <= hi + 1e-9; ++i) out.push_back(lo + i * step);
    } else {
      out.push_back(parse_value<double>(section, key, tok));
    }
  }
  return out;
}

class Params {
 public:
  Params(const SchemeSpec& s) : s_(s) {}
  bool has(const std::string& k) const { return s_.params.count(k) > 0; }
  std::string str(const std::string& k, const std::string& def) const { return has(k) ? s_.params.at(k) : def; }
  template <typename T>
  T num(const std::string& k, T def) const {
    return has(k) ? parse_value<T>(section(), k, s_.params.at(k)) : def;
  }
  bool flag(const std::string& k, bool def) const { return has(k) ? parse_bool(section(), k, s_.params.at(k)) : def; }
  std::string section() const { return "scheme:" + s_.label; }

 private:
  const SchemeSpec& s_;
};

inline ResourcePlan plan_from(const Params& p, const std::string& default_plan) {
  ResourcePlan r = find_plan_preset(p.str("plan", default_plan)).resources;
  r.total_prbs_per_tti = p.num("total_prbs", r.total_prbs_per_tti);
  r.control_prbs = p.num("control_prbs", r.control_prbs);
  r.data_prbs = p.num("data_prbs", r.data_prbs);
  r.spatial_layers = p.num("spatial_layers", r.spatial_layers);
  auto errs = validate(r);
  if (!errs.empty()) throw ConfigError(p.section() + ": " + errs.front());
  return r;
}

inline SnrDecodeTable load_table(const Params& p, const std::string& builtin, const std::filesystem::path& base) {
  std::string v = p.str("decode_table", "builtin:" + builtin);
  if (v == "builtin:craplnc") return default_craplnc_table();
  if (v == "builtin:scf") return default_scf_table();
  if (v.rfind("builtin:", 0) == 0) throw ConfigError(p.section() + ": unknown built-in table '" + v + "'");
  std::filesystem::path path = v;
  if (path.is_relative()) path = base / path;
  std::ifstream in(path);
  if (!in) throw ConfigError(p.section() + ": cannot open decode table " + path.string());
  try {
    return SnrDecodeTable::read_csv(in);
  } catch (const std::exception& e) {
    throw ConfigError(p.section() + ": " + path.string() + ": " + e.what());
  }
}

inline std::string csv_safe(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline std::vector<double> table_row(const Params& p, const SnrDecodeTable& t, double snr) {
  if (!t.has_snr(snr))
    throw ConfigError(p.section() + ": decode table has no row for snr_db = " + csv_safe(snr));
  return t.row(snr);
}

}  // namespace detail

inline ScenarioConfig parse_config(const ptree& root, const std::filesystem::path& base_dir = ".") {
  using namespace detail;
  ScenarioConfig c;
  c.base_dir = base_dir;
  std::vector<std::string> errs;
  for (const auto& [section, tree] : root) {
    if (tree.empty() && !tree.data().empty()) {
      errs.push_back("key '" + section + "' outside any section");
      continue;
    }
    if (section.rfind("scheme:", 0) == 0) {
      SchemeSpec s;
      s.label = section.substr(7);
      if (s.label.empty() || s.label.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                                 std::string::npos)
        errs.push_back("[" + section + "]: scheme label must be non-empty [A-Za-z0-9_.-]");
      for (const auto& [k, v] : tree) s.params[k] = v.data();
      if (!s.params.count("type")) {
        errs.push_back("[" + section + "]: missing 'type'");
        continue;
      }
      s.type = s.params["type"];
      auto it = scheme_keys().find(s.type);
      if (it == scheme_keys().end()) {
        errs.push_back("[" + section + "]: unknown scheme type '" + s.type + "'");
        continue;
      }
      for (const auto& [k, v] : s.params)
        if (!it->second.count(k)) errs.push_back("[" + section + "]: unknown key '" + k + "' for type " + s.type);
      c.schemes.push_back(std::move(s));
      continue;
    }
    auto sk = section_keys().find(section);
    if (sk == section_keys().end()) {
      errs.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [k, v] : tree) {
      if (!sk->second.count(k)) {
        errs.push_back("[" + section + "]: unknown key '" + k + "'");
        continue;
      }
      const std::string& val = v.data();
      try {
        if (section == "scenario") {
          if (k == "name") c.name = val;
          else if (k == "horizon_ttis") c.horizon_ttis = parse_value<long long>(section, k, val);
          else if (k == "warmup_ttis") c.warmup_ttis = parse_value<long long>(section, k, val);
          else if (k == "seeds") c.seeds = parse_value<int>(section, k, val);
          else if (k == "base_seed") c.base_seed = parse_value<std::uint64_t>(section, k, val);
          else if (k == "batches") c.batches = parse_value<int>(section, k, val);
        } else if (section == "traffic") {
          if (k == "lambda") c.lambdas = parse_list(section, k, val);
          else if (k == "packet_size_bytes") c.traffic.packet_size_bytes = parse_value<int>(section, k, val);
          else if (k == "mean_waiting_time_ms") c.traffic.mean_waiting_time_ms = parse_value<double>(section, k, val);
        } else if (section == "arq") {
          if (k == "ack_delay_ttis") c.arq.ack_delay_ttis = parse_value<int>(section, k, val);
          else if (k == "backoff_min_ttis") c.arq.backoff_min_ttis = parse_value<int>(section, k, val);
          else if (k == "backoff_max_ttis") c.arq.backoff_max_ttis = parse_value<int>(section, k, val);
          else if (k == "max_retransmissions") c.arq.max_retransmissions = parse_value<int>(section, k, val);
        }
      } catch (const ConfigError& e) {
        errs.push_back(e.what());
      }
    }
  }
  if (c.lambdas.empty()) errs.push_back("[traffic] lambda: sweep grid must be nonempty");
  for (double l : c.lambdas)
    if (!(l >= 0)) errs.push_back("[traffic] lambda: values must be >= 0");
  if (c.schemes.empty()) errs.push_back("no [scheme:<label>] sections");
  if (c.seeds < 1) errs.push_back("[scenario] seeds must be >= 1");
  if (c.horizon_ttis < 1) errs.push_back("[scenario] horizon_ttis must be >= 1");
  if (c.warmup_ttis < 0) errs.push_back("[scenario] warmup_ttis must be >= 0");
  if (c.batches < 1 || c.batches > c.horizon_ttis) errs.push_back("[scenario] batches must be in [1, horizon_ttis]");
  for (const auto& e : validate(c.traffic)) errs.push_back(e);
  for (const auto& e : validate(c.arq)) errs.push_back(e);
  if (!errs.empty()) {
    std::string msg;
    for (const auto& e : errs) msg += e + "\n";
    throw ConfigError(msg);
  }
  std::ostringstream canon;
  boost::property_tree::write_ini(canon, root);
  c.canonical = canon.str();
  return c;
}

// `overrides` are "section.key=value"; the section is everything before the last dot.
inline void apply_overrides(ptree& root, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected section.key=value");
    std::string path = o.substr(0, eq), value = o.substr(eq + 1);
    auto dot = path.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
      throw ConfigError("override '" + o + "': expected section.key=value");
    std::string section = path.substr(0, dot), key = path.substr(dot + 1);
    auto sec = root.find(section);
    if (sec == root.not_found()) throw ConfigError("override '" + o + "': no section [" + section + "]");
    sec->second.put(ptree::path_type(key, '\0'), value);
  }
}

inline ptree read_config_tree(std::istream& in, const std::string& name) {
  ptree root;
  try {
    boost::property_tree::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  return root;
}

inline ScenarioConfig load_config_text(const std::string& text, const std::string& name,
                                       const std::vector<std::string>& overrides = {},
                                       const std::filesystem::path& base_dir = ".") {
  std::istringstream in(text);
  ptree root = read_config_tree(in, name);
  apply_overrides(root, overrides);
  return parse_config(root, base_dir);
}

inline ScenarioConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str(), path.string(), overrides, path.parent_path());
}

inline DetectionModel detection_from(const detail::Params& p, DetectionModel def) {
  def.p_detect = p.num("p_detect", def.p_detect);
  def.p_false = p.num("p_false", def.p_false);
  if (def.p_detect < 0 || def.p_detect > 1 || def.p_false < 0 || def.p_false > 1)
    throw ConfigError(p.section() + ": detection probabilities must lie in [0,1]");
  return def;
}

// Builds the scheme for one sweep point; `seed` feeds per-run fixed tables (patterns, sequences).
inline std::unique_ptr<AccessScheme> make_scheme(const SchemeSpec& s, const ScenarioConfig& cfg, double lambda,
                                                 std::uint64_t seed) {
  using namespace detail;
  Params p(s);
  const int ack = cfg.arq.ack_delay_ttis;
  const std::string& t = s.type;
  if (t == "sa") {
    ResourcePlan r = plan_from(p, "sa-50");
    double p1 = 1.0;
    if (p.has("decode_table") || p.has("snr_db")) {
      SnrDecodeTable table = load_table(p, "craplnc", cfg.base_dir);
      p1 = table_row(p, table, p.num("snr_db", 10.0)).at(1);
    }
    return std::make_unique<SlottedAloha>(r, ack, p1);
  }
  if (t == "notaft") return std::make_unique<Notaft>(plan_from(p, "notaft-4layer"), ack);
  if (t == "one-stage" || t == "two-stage") {
    OstsapConfig c;
    c.two_stage = t == "two-stage";
    const std::string plan = p.str("plan", "ostsap-54");
    const PlanPreset& preset = find_plan_preset(plan);
    if (!preset.preambles) throw ConfigError(p.section() + ": plan '" + plan + "' has no preamble pool");
    c.resources = plan_from(p, plan);
    c.preambles = *preset.preambles;
    try {
      c.capture = CaptureModel::parse(p.str("capture", "sud"));
      c.feedback = parse_feedback(p.str("feedback", "bitmap"));
    } catch (const std::exception& e) {
      throw ConfigError(p.section() + ": " + e.what());
    }
    c.detection = detection_from(p, DetectionModel::ideal());
    c.ack_delay = ack;
    c.max_queue_ttis = p.num("max_queue_ttis", c.max_queue_ttis);
    auto errs = validate(c.preambles, c.resources);
    if (!errs.empty()) throw ConfigError(p.section() + ": " + errs.front());
    return std::make_unique<Ostsap>(c);
  }
  if (t == "lte-baseline") {
    LteBaselineConfig c;
    c.resources = plan_from(p, "lte-54");
    c.n_preambles = p.num("n_preambles", c.n_preambles);
    c.detection = detection_from(p, DetectionModel::ideal());
    c.grant_delay = p.num("grant_delay", c.grant_delay);
    c.setup_delay = p.num("setup_delay", c.setup_delay);
    c.backoff_max = p.num("backoff_max", c.backoff_max);
    c.max_attempts = p.num("max_attempts", c.max_attempts);
    if (c.n_preambles < 1 || c.grant_delay < 1 || c.setup_delay < 1 || c.backoff_max < 0 || c.max_attempts < 1)
      throw ConfigError(p.section() + ": baseline timing values must be positive");
    return std::make_unique<LteBaseline>(c);
  }
  if (t == "sbaia") {
    SbaiaConfig c;
    c.resources = plan_from(p, "sbaia-216");
    c.preambles_per_prach = p.num("preambles_per_prach", c.preambles_per_prach);
    c.universe = p.num("universe", c.universe);
    c.detection = detection_from(p, c.detection);
    c.fp_budget = p.num("fp_budget", c.fp_budget);
    c.k_max = p.num("k_max", c.k_max);
    c.lambda_design = p.num("lambda_design", lambda);
    if (p.has("subframes")) c.n_subframes = p.num("subframes", 1);
    if (p.has("hashes")) c.hashes = p.num("hashes", 1);
    std::string bound = p.str("bound", "upper");
    if (bound != "lower" && bound != "upper") throw ConfigError(p.section() + ": bound must be lower or upper");
    c.early_detection = bound == "lower";
    c.ack_delay = ack;
    c.max_queue_ttis = p.num("max_queue_ttis", c.max_queue_ttis);
    if (c.universe < 1 || c.k_max < 1 || c.preambles_per_prach < 1)
      throw ConfigError(p.section() + ": universe, k_max and preambles_per_prach must be >= 1");
    try {
      return std::make_unique<Sbaia>(c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p.section() + ": " + e.what());
    }
  }
  if (t == "csmud") {
    CsmudConfig c;
    c.spreading.n_sequences = p.num("n_sequences", 64);
    c.spreading.spreading_length = p.num("spreading_length", 32);
    c.spreading.pilot_length = c.spreading.spreading_length;
    c.snr_db = p.num("snr_db", 10.0);
    c.sinr_threshold_db = p.num("sinr_threshold_db", c.sinr_threshold_db);
    c.ack_delay = ack;
    if (c.spreading.n_sequences < 1 || c.spreading.spreading_length < 1)
      throw ConfigError(p.section() + ": n_sequences and spreading_length must be >= 1");
    return std::make_unique<Csmud>(c, seed);
  }
  if (t == "craplnc") {
    CraplncConfig c;
    c.frame.slots_per_frame = p.num("slots_per_frame", 10);
    c.frame.replicas = p.num("replicas", 2);
    auto errs = validate(c.frame);
    if (!errs.empty()) throw ConfigError(p.section() + ": " + errs.front());
    c.prbs_per_slot = p.num("prbs_per_slot", 50);
    try {
      c.field = FieldSpec::parse(p.str("field", "GF(2^8)"));
      Field check(c.field);
      if (check.spec().p != 2) throw std::invalid_argument("field must have characteristic 2");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p.section() + ": " + e.what());
    }
    c.precoding = p.flag("precoding", true);
    c.p_of_n = table_row(p, load_table(p, "craplnc", cfg.base_dir), p.num("snr_db", 10.0));
    c.symbols = p.num("symbols", c.symbols);
    c.ack_delay = ack;
    if (c.prbs_per_slot < 1 || c.symbols < 1) throw ConfigError(p.section() + ": prbs_per_slot and symbols must be >= 1");
    return std::make_unique<Craplnc>(c);
  }
  if (t == "ccra") {
    CcraConfig c;
    c.slots_per_frame = p.num("slots_per_frame", c.slots_per_frame);
    c.n_preambles = p.num("n_preambles", c.n_preambles);
    c.replicas = p.num("replicas", c.replicas);
    std::string mode = p.str("control", "ideal");
    if (mode == "ideal") c.control = ControlMode::Ideal;
    else if (mode == "hihtp") c.control = ControlMode::Hihtp;
    else throw ConfigError(p.section() + ": control must be ideal or hihtp");
    c.channel_taps = p.num("channel_taps", c.channel_taps);
    c.active_taps = p.num("active_taps", c.active_taps);
    c.control_subcarriers = p.num("control_subcarriers", c.control_subcarriers);
    c.control_rows = p.num("control_rows", c.control_rows);
    c.pilot_power = p.num("pilot_power", c.pilot_power);
    c.snr_db = p.num("snr_db", c.snr_db);
    c.hihtp_iters = p.num("hihtp_iters", c.hihtp_iters);
    c.ack_delay = ack;
    try {
      return std::make_unique<Ccra>(c, seed);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p.section() + ": " + e.what());
    }
  }
  if (t == "scf") {
    ScfConfig c;
    auto& tp = c.topology;
    tp.n_mini_bs = p.num("n_mini_bs", tp.n_mini_bs);
    tp.frequency_slots = p.num("frequency_slots", tp.frequency_slots);
    tp.slots_per_device = p.num("slots_per_device", tp.slots_per_device);
    tp.max_colliders = p.num("max_colliders", tp.max_colliders);
    tp.equations_per_slot = p.num("equations_per_slot", tp.equations_per_slot);
    c.prime = p.num<std::uint32_t>("prime", c.prime);
    if (!is_prime(c.prime)) throw ConfigError(p.section() + ": prime must be a prime");
    c.symbols = p.num("symbols", c.symbols);
    c.p_of_n = table_row(p, load_table(p, "scf", cfg.base_dir), p.num("snr_db", 20.0));
    c.ack_delay = ack;
    try {
      return std::make_unique<Scf>(c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p.section() + ": " + e.what());
    }
  }
  throw ConfigError("unknown scheme type '" + t + "'");
}

// Diagnostics without running: builds every scheme once per distinct lambda.
inline std::vector<std::string> validate_config(const ScenarioConfig& cfg) {
  std::vector<std::string> errs;
  for (const auto& s : cfg.schemes)
    for (double l : cfg.lambdas) {
      try {
        make_scheme(s, cfg, l, cfg.base_seed);
      } catch (const std::exception& e) {
        errs.push_back(e.what());
        break;
      }
    }
  return errs;
}

}  // namespace mmtc
