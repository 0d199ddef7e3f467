#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/rng.hpp"

namespace mmtc {

struct CaptureModel {
  enum class Kind { Sud, Mud, Table };
  Kind kind = Kind::Sud;
  int mud_k = 1;
  std::vector<double> p_of_n;  // Table: index n, P(n); n beyond the table decodes nothing

  static CaptureModel sud() { return {}; }
  static CaptureModel mud(int k) { return {Kind::Mud, k, {}}; }
  static CaptureModel table(std::vector<double> p) { return {Kind::Table, 0, std::move(p)}; }

  // Largest number of packets the model can return from one resource.
  int capacity() const {
    if (kind == Kind::Sud) return 1;
    if (kind == Kind::Mud) return mud_k;
    return static_cast<int>(p_of_n.size());
  }

  static CaptureModel parse(const std::string& s) {
    if (s == "sud") return sud();
    if (s.rfind("mud", 0) == 0) {
      std::string k = s.substr(3);
      if (!k.empty() && k[0] == '_') k = k.substr(1);
      int kk = k.empty() ? 2 : std::stoi(k);
      if (kk < 1) throw std::invalid_argument("capture: mud order must be >= 1");
      return mud(kk);
    }
    throw std::invalid_argument("unknown capture model '" + s + "' (expected sud, mud2, mud_K)");
  }

  std::string to_string() const {
    if (kind == Kind::Sud) return "sud";
    if (kind == Kind::Mud) return "mud" + std::to_string(mud_k);
    return "table";
  }
};

// Decoded packet indices among n packets sharing one data resource.
inline std::vector<int> resolve_data_resource(int n_packets, bool distinct_preambles, const CaptureModel& model,
                                              Rng& rng) {
  std::vector<int> out;
  if (n_packets <= 0) return out;
  switch (model.kind) {
    case CaptureModel::Kind::Sud:
    case CaptureModel::Kind::Mud: {
      int k = model.kind == CaptureModel::Kind::Sud ? 1 : model.mud_k;
      bool distinct = n_packets == 1 || distinct_preambles;
      if (n_packets <= k && distinct)
        for (int i = 0; i < n_packets; ++i) out.push_back(i);
      break;
    }
    case CaptureModel::Kind::Table: {
      double p = static_cast<std::size_t>(n_packets) < model.p_of_n.size() ? model.p_of_n[n_packets] : 0.0;
      for (int i = 0; i < n_packets; ++i)
        if (bernoulli(rng, p)) out.push_back(i);
      break;
    }
  }
  return out;
}

struct DetectionModel {
  double p_detect = 0.99;
  double p_false = 1e-3;

  static DetectionModel ideal() { return {1.0, 0.0}; }
};

// One uniform draw per call whatever the count, so traces stay aligned across p_d values.
inline bool detect_preamble(int activated_by, const DetectionModel& m, Rng& rng) {
  double u = uniform01(rng);
  return activated_by >= 1 ? u < m.p_detect : u < m.p_false;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

class SnrDecodeTable {
 public:
  void set(double snr_db, int n_colliders, double p) {
    if (n_colliders < 1) throw std::invalid_argument("decode table: n_colliders must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("decode table: probability outside [0,1]");
    auto& row = rows_[key(snr_db)];
    if (row.size() < static_cast<std::size_t>(n_colliders) + 1) row.resize(n_colliders + 1, 0.0);
    row[n_colliders] = p;
  }

  // Zero beyond the last tabulated collider count.
  double probability(double snr_db, int n_colliders) const {
    auto it = rows_.find(key(snr_db));
    if (it == rows_.end()) throw std::out_of_range("decode table: no entry for SNR " + fmt_snr(snr_db) + " dB");
    if (n_colliders < 1 || static_cast<std::size_t>(n_colliders) >= it->second.size()) return 0.0;
    return it->second[n_colliders];
  }

  bool has_snr(double snr_db) const { return rows_.count(key(snr_db)) > 0; }

  std::vector<double> snrs() const {
    std::vector<double> v;
    for (const auto& [k, row] : rows_) v.push_back(k / 1000.0);
    return v;
  }

  int max_colliders(double snr_db) const {
    auto it = rows_.find(key(snr_db));
    return it == rows_.end() ? 0 : static_cast<int>(it->second.size()) - 1;
  }

  // P(n) vector for one SNR, index 0 unused.
  std::vector<double> row(double snr_db) const {
    auto it = rows_.find(key(snr_db));
    if (it == rows_.end()) throw std::out_of_range("decode table: no entry for SNR " + fmt_snr(snr_db) + " dB");
    return it->second;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    for (const auto& [k, row] : rows_)
      for (std::size_t n = 2; n < row.size(); ++n)
        if (row[n] > row[n - 1] + 1e-12)
          errs.push_back("decode table: increasing in n_colliders at SNR " + fmt_snr(k / 1000.0) + " dB, n=" +
                         std::to_string(n));
    return errs;
  }

  void write_csv(std::ostream& os) const {
    os << "snr_db,n_colliders,p_decode\n";
    for (const auto& [k, row] : rows_)
      for (std::size_t n = 1; n < row.size(); ++n) {
        std::ostringstream p;
        p << std::setprecision(10) << row[n];
        os << fmt_snr(k / 1000.0) << "," << n << "," << p.str() << "\n";
      }
  }

  static SnrDecodeTable read_csv(std::istream& is) {
    SnrDecodeTable t;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        if (line != "snr_db,n_colliders,p_decode")
          throw std::runtime_error("decode table line " + std::to_string(lineno) +
                                   ": expected header snr_db,n_colliders,p_decode");
        header = true;
        continue;
      }
      std::stringstream ss(line);
      std::string a, b, c;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
        throw std::runtime_error("decode table line " + std::to_string(lineno) + ": expected 3 columns");
      try {
        t.set(std::stod(a), std::stoi(b), std::stod(c));
      } catch (const std::exception& e) {
        throw std::runtime_error("decode table line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (!header) throw std::runtime_error("decode table: empty input");
    auto errs = t.validate();
    if (!errs.empty()) throw std::runtime_error(errs.front());
    return t;
  }

 private:
  static long key(double snr_db) { return std::lround(snr_db * 1000.0); }
  static std::string fmt_snr(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }
  std::map<long, std::vector<double>> rows_;
};

// Offline link abstraction for slot-level physical-layer network coding:
// P(snr, n) = exp(-n^2 (2^R - 1) / snr), R = 0.5 bit per channel use, n <= 4.
inline double plnc_decode_probability(double snr_db, int n) {
  if (n < 1 || n > 4) return 0.0;
  const double gap = std::pow(2.0, 0.5) - 1.0;
  return std::exp(-static_cast<double>(n) * n * gap / db_to_linear(snr_db));
}

// Computation rate, bits per real dimension, of the integer equation a over real channel h:
// R = 1/2 log2+(1 / (|a|^2 - snr (h.a)^2 / (1 + snr |h|^2))).
inline double cf_computation_rate(const std::vector<double>& h, const std::vector<int>& a, double snr_linear) {
  if (h.size() != a.size()) throw std::invalid_argument("cf_computation_rate: size mismatch");
  double hh = 0, ha = 0, aa = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    hh += h[i] * h[i];
    ha += h[i] * a[i];
    aa += static_cast<double>(a[i]) * a[i];
  }
  const double q = aa - snr_linear * ha * ha / (1.0 + snr_linear * hh);
  if (q <= 0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, 0.5 * std::log2(1.0 / q));
}

// Best equation with every coefficient nonzero, searched by scaled rounding of h.
inline double cf_best_rate(const std::vector<double>& h, double snr_linear, int max_coeff = 3, int scales = 400) {
  double hmax = 0;
  for (double v : h) hmax = std::max(hmax, std::abs(v));
  if (hmax == 0) return 0.0;
  std::vector<int> a(h.size());
  double best = 0;
  for (int k = 1; k <= scales; ++k) {
    const double c = (max_coeff + 0.5) * k / (scales * hmax);
    for (std::size_t i = 0; i < h.size(); ++i) {
      int v = static_cast<int>(std::lround(c * h[i]));
      if (v == 0) v = h[i] < 0 ? -1 : 1;
      a[i] = std::clamp(v, -max_coeff, max_coeff);
    }
    best = std::max(best, cf_computation_rate(h, a, snr_linear));
  }
  return best;
}

// Link oracle behind the SCF decode table: real Rayleigh block fading, an equation over all n
// colliders decodes when its best computation rate reaches the code rate (rate-1/4 QPSK,
// 0.25 bit per real dimension).
inline double cf_decode_oracle(double snr_db, int n, int trials, Rng& rng, double rate = 0.25) {
  if (n < 1 || trials < 1) throw std::invalid_argument("cf_decode_oracle: n and trials must be >= 1");
  std::normal_distribution<double> nd;
  std::vector<double> h(n);
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    for (double& v : h) v = nd(rng);
    ok += cf_best_rate(h, db_to_linear(snr_db)) >= rate;
  }
  return static_cast<double>(ok) / trials;
}

inline SnrDecodeTable tabulate(double (*fn)(double, int), const std::vector<double>& snrs, int n_max) {
  SnrDecodeTable t;
  for (double s : snrs)
    for (int n = 1; n <= n_max; ++n) t.set(s, n, fn(s, n));
  return t;
}

inline SnrDecodeTable default_craplnc_table() {
  return tabulate(plnc_decode_probability, {0.0, 5.0, 10.0, 15.0, 20.0}, 4);
}

// Output of cf_decode_oracle, 20000 draws per entry (tools/decode_oracle, seed 1).
inline SnrDecodeTable default_scf_table() {
  static const std::vector<std::pair<double, std::vector<double>>> rows{
      {5.0, {0.71855, 0.46795, 0.28595, 0.15275, 0.0774, 0.03455, 0.01345, 0.0054, 0.0016}},
      {10.0, {0.8348, 0.6804, 0.52775, 0.37995, 0.25895, 0.1647, 0.09795, 0.0497, 0.0233}},
      {15.0, {0.9096, 0.81565, 0.69315, 0.55695, 0.41485, 0.29445, 0.1997, 0.12335, 0.06925}},
      {20.0, {0.94885, 0.88525, 0.7727, 0.6284, 0.48505, 0.3523, 0.24345, 0.1599, 0.09415}},
      {25.0, {0.9698, 0.909, 0.8075, 0.6564, 0.5067, 0.37005, 0.2578, 0.16625, 0.1034}},
      {30.0, {0.9836, 0.92415, 0.80905, 0.6716, 0.52295, 0.37975, 0.2633, 0.17425, 0.10865}},
  };
  SnrDecodeTable t;
  for (const auto& [snr, p] : rows)
    for (std::size_t n = 0; n < p.size(); ++n) t.set(snr, static_cast<int>(n) + 1, p[n]);
  return t;
}

}  // namespace mmtc
