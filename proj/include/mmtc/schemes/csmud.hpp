#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmtc/sparse_recovery.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

struct CsmudConfig {
  SpreadingConfig spreading;
  double snr_db = 10.0;
  double sinr_threshold_db = 3.0;  // data decodes when the post-LS SINR clears this
  int ack_delay = 3;
};

struct CsmudTtiResult {
  std::vector<char> success;  // per attempter
  int detected = 0;
};

// Activity detection: GOMP stops once the residual is below epsilon and at least the
// energy-estimated number of users has been selected, so the support can grow past m.
inline GompResult csmud_detect(const CMat& S, const CVec& y, double sigma) {
  const int K = static_cast<int>(S.cols()), m = static_cast<int>(S.rows());
  GompOptions opt;
  opt.max_groups = K;
  opt.residual_threshold = epsilon_for(sigma, m);
  opt.min_groups = estimate_active_count(y, sigma, K);
  return gomp_solve(S, y, 1, opt);
}

// One TTI of one-stage CS-MUD: activity and channels by GOMP, data by least-squares equalization.
inline CsmudTtiResult csmud_tti(const CMat& S, const std::vector<int>& sequence, const CsmudConfig& c, Rng& rng) {
  const int n = static_cast<int>(sequence.size());
  const int m = static_cast<int>(S.rows());
  const int K = c.spreading.n_sequences;
  CsmudTtiResult r;
  r.success.assign(n, 0);
  std::vector<cd> h(n);
  std::vector<int> users_on(K, 0);
  CVec y = CVec::Zero(m);
  for (int i = 0; i < n; ++i) {
    h[i] = complex_normal(rng, 1.0);
    ++users_on[sequence[i]];
    y += S.col(sequence[i]) * h[i];
  }
  const double sigma = noise_sigma(c.snr_db, m);
  for (int i = 0; i < m; ++i) y(i) += complex_normal(rng, sigma * sigma);
  if (n == 0) return r;

  GompResult g = csmud_detect(S, y, sigma);
  r.detected = static_cast<int>(g.active_set.size());
  if (g.active_set.empty()) return r;

  CMat St = gather_columns(S, g.active_set);
  CMat W = Eigen::CompleteOrthogonalDecomposition<CMat>(St).pseudoInverse();
  const double thr = db_to_linear(c.sinr_threshold_db);
  for (int i = 0; i < n; ++i) {
    if (users_on[sequence[i]] != 1) continue;
    auto pos = std::lower_bound(g.active_set.begin(), g.active_set.end(), sequence[i]);
    if (pos == g.active_set.end() || *pos != sequence[i]) continue;
    auto w = W.row(pos - g.active_set.begin());
    double signal = std::norm((w * S.col(sequence[i]))(0) * h[i]);
    double interference = sigma * sigma * w.squaredNorm();
    for (int j = 0; j < n; ++j)
      if (j != i) interference += std::norm((w * S.col(sequence[j]))(0) * h[j]);
    if (signal >= thr * interference) r.success[i] = 1;
  }
  return r;
}

class Csmud : public AccessScheme {
 public:
  Csmud(CsmudConfig c, std::uint64_t sequence_seed) : c_(c) {
    Rng rng = make_stream(sequence_seed, "csmud-sequences");
    S_ = pn_sequences(c_.spreading, rng);
    if (c_.spreading.channel_taps != 1) throw std::invalid_argument("csmud: scheme supports one-tap channels");
  }

  std::string kind() const override { return "csmud"; }
  int opportunities_per_tti() const override { return c_.spreading.n_sequences; }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    if (attempters.empty()) return;
    std::vector<int> seq(attempters.size());
    for (auto& s : seq) s = static_cast<int>(uniform_int(rng, 0, c_.spreading.n_sequences - 1));
    CsmudTtiResult r = csmud_tti(S_, seq, c_, rng);
    for (std::size_t i = 0; i < attempters.size(); ++i)
      out.push_back({attempters[i], r.success[i] != 0, r.success[i] ? now + 1 : now + c_.ack_delay});
  }

 private:
  CsmudConfig c_;
  CMat S_;
};

}  // namespace mmtc
