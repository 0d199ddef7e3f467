#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/phy_capture.hpp"
#include "mmtc/rng.hpp"

namespace mmtc {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct SpreadingConfig {
  int n_sequences = 64;       // K
  int spreading_length = 32;  // N_S
  int pilot_length = 32;      // N_P
  int data_length = 0;        // N_D
  int channel_taps = 1;       // N_h

  int rows() const { return spreading_length + channel_taps - 1; }
  int cols() const { return n_sequences * channel_taps; }
};

struct SparseProblem {
  CMat S;
  CVec h;
  CVec y;
  CVec noise;
  double sigma = 0.0;
  double epsilon = 0.0;
  int group_size = 1;
  std::vector<int> active_set;  // group indices, ascending

  int n_groups() const { return group_size > 0 ? static_cast<int>(S.cols()) / group_size : 0; }
};

inline cd complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  double re = n(rng);
  double im = n(rng);
  return {re, im};
}

// Unit-norm (+-1 +-j)/sqrt(2 N_S) sequences; with N_h taps each group holds shifted copies.
inline CMat pn_sequences(const SpreadingConfig& cfg, Rng& rng) {
  if (cfg.n_sequences < 1 || cfg.spreading_length < 1 || cfg.channel_taps < 1)
    throw std::invalid_argument("spreading config: dimensions must be positive");
  const double a = 1.0 / std::sqrt(2.0 * cfg.spreading_length);
  CMat S = CMat::Zero(cfg.rows(), cfg.cols());
  for (int i = 0; i < cfg.n_sequences; ++i) {
    std::vector<cd> seq(cfg.spreading_length);
    for (auto& v : seq) {
      double re = (rng() & 1) ? a : -a;
      double im = (rng() & 1) ? a : -a;
      v = {re, im};
    }
    for (int t = 0; t < cfg.channel_taps; ++t)
      for (int n = 0; n < cfg.spreading_length; ++n) S(n + t, i * cfg.channel_taps + t) = seq[n];
  }
  return S;
}

// Active-count estimate from received energy: each active user adds E|h|^2 ||s||^2 = 1.
inline int estimate_active_count(const CVec& y, double sigma, int max_count) {
  const double e = y.squaredNorm() - static_cast<double>(y.size()) * sigma * sigma;
  return std::clamp(static_cast<int>(std::lround(e)), 0, max_count);
}

inline double epsilon_for(double sigma, int m) {
  return sigma * std::sqrt(m + 2.0 * std::sqrt(static_cast<double>(m)));
}

// Noise variance per entry for per-user SNR (unit-norm columns, unit channel energy).
inline double noise_sigma(double snr_db, int m) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::sqrt(1.0 / (m * db_to_linear(snr_db)));
}

// Draws n_active distinct groups of an existing matrix; snr_db = +inf means noiseless.
inline SparseProblem generate_problem_for(const CMat& S, int group_size, int n_active, double snr_db, Rng& rng) {
  SparseProblem p;
  p.S = S;
  p.group_size = group_size;
  const int G = p.n_groups();
  if (n_active < 0 || n_active > G) throw std::invalid_argument("generate_problem: n_active exceeds group count");
  std::vector<int> groups(G);
  std::iota(groups.begin(), groups.end(), 0);
  for (int i = 0; i < n_active; ++i) {
    int j = static_cast<int>(uniform_int(rng, i, G - 1));
    std::swap(groups[i], groups[j]);
  }
  p.active_set.assign(groups.begin(), groups.begin() + n_active);
  std::sort(p.active_set.begin(), p.active_set.end());
  p.h = CVec::Zero(S.cols());
  for (int g : p.active_set)
    for (int t = 0; t < group_size; ++t) p.h(g * group_size + t) = complex_normal(rng, 1.0 / group_size);
  const int m = static_cast<int>(S.rows());
  p.sigma = noise_sigma(snr_db, m);
  p.noise = CVec::Zero(m);
  if (p.sigma > 0)
    for (int i = 0; i < m; ++i) p.noise(i) = complex_normal(rng, p.sigma * p.sigma);
  p.y = S * p.h + p.noise;
  p.epsilon = epsilon_for(p.sigma, m);
  return p;
}

inline SparseProblem generate_problem(const SpreadingConfig& cfg, int n_active, double snr_db, Rng& rng) {
  if (n_active > cfg.n_sequences) throw std::invalid_argument("generate_problem: n_active > K");
  CMat S = pn_sequences(cfg, rng);
  return generate_problem_for(S, cfg.channel_taps, n_active, snr_db, rng);
}

struct LsFit {
  CVec x;
  bool rank_deficient = false;
};

// Least-squares fit, least-norm when A lacks full column rank.
inline LsFit least_squares(const CMat& A, const CVec& y) {
  LsFit f;
  if (A.cols() == 0) {
    f.x = CVec::Zero(0);
    return f;
  }
  Eigen::CompleteOrthogonalDecomposition<CMat> cod(A);
  f.x = cod.solve(y);
  f.rank_deficient = cod.rank() < A.cols();
  return f;
}

inline CMat gather_columns(const CMat& A, const std::vector<int>& cols) {
  CMat out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = A.col(cols[j]);
  return out;
}

struct GompOptions {
  std::optional<int> max_groups;
  std::optional<double> residual_threshold;  // defaults to the problem's epsilon
  int min_groups = 0;  // keep selecting past the threshold until this many groups
};

struct GompResult {
  CVec h;
  std::vector<int> active_set;  // ascending group indices
  std::vector<double> residual_norms;  // after each selection (batched picks share one value), index 0 is ||y||
  bool flagged = false;  // stopped on the group cap with the residual above threshold
};

// Greedy group selection by correlation magnitude with a least-squares refit per step.
// Once the residual is exhausted, remaining picks follow the least-norm coefficient magnitudes.
inline GompResult gomp_solve(const CMat& S, const CVec& y, int group_size, const GompOptions& opt = {},
                             double default_threshold = 0.0) {
  if (group_size < 1 || S.cols() % group_size != 0) throw std::invalid_argument("gomp: bad group size");
  if (S.rows() != y.size()) throw std::invalid_argument("gomp: dimension mismatch");
  const int G = static_cast<int>(S.cols()) / group_size;
  const int cap = std::min(G, opt.max_groups.value_or(G));
  const double y_norm = y.norm();
  const double thr = opt.residual_threshold.value_or(default_threshold);
  const bool use_thr = opt.residual_threshold.has_value() || !opt.max_groups.has_value();
  const double exhausted = 1e-10 * std::max(1.0, y_norm);

  GompResult res;
  res.h = CVec::Zero(S.cols());
  CVec r = y;
  res.residual_norms.push_back(y_norm);
  std::vector<bool> chosen(G, false);
  std::vector<int> cols;
  std::optional<CVec> min_norm_all;

  while (static_cast<int>(res.active_set.size()) < cap) {
    double rn = r.norm();
    const bool enough = static_cast<int>(res.active_set.size()) >= opt.min_groups;
    if (use_thr && enough && rn <= std::max(thr, exhausted)) break;
    if (!use_thr && y_norm == 0.0) break;
    std::vector<int> picks;
    if (rn > exhausted) {
      CVec c = S.adjoint() * r;
      int best = -1;
      double best_score = -1.0;
      for (int g = 0; g < G; ++g) {
        if (chosen[g]) continue;
        double sc = c.segment(g * group_size, group_size).norm();
        if (sc > best_score) best = g, best_score = sc;
      }
      if (best < 0) break;
      picks.push_back(best);
    } else {
      // The min-norm ordering is fixed, so the remaining picks are taken in one batch with one refit.
      if (!min_norm_all) min_norm_all = least_squares(S, y).x;
      std::vector<int> rest;
      for (int g = 0; g < G; ++g)
        if (!chosen[g]) rest.push_back(g);
      std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
        return min_norm_all->segment(a * group_size, group_size).norm() >
               min_norm_all->segment(b * group_size, group_size).norm();
      });
      const int target = use_thr ? std::min(cap, opt.min_groups) : cap;
      const int take = std::min<int>(static_cast<int>(rest.size()), target - static_cast<int>(res.active_set.size()));
      if (take <= 0) break;
      picks.assign(rest.begin(), rest.begin() + take);
    }
    for (int g : picks) {
      chosen[g] = true;
      res.active_set.push_back(g);
      for (int t = 0; t < group_size; ++t) cols.push_back(g * group_size + t);
    }
    LsFit fit = least_squares(gather_columns(S, cols), y);
    r = y - gather_columns(S, cols) * fit.x;
    res.residual_norms.insert(res.residual_norms.end(), picks.size(), r.norm());
    res.h.setZero();
    for (std::size_t j = 0; j < cols.size(); ++j) res.h(cols[j]) = fit.x(static_cast<Eigen::Index>(j));
  }
  if (use_thr && res.residual_norms.back() > std::max(thr, exhausted) &&
      static_cast<int>(res.active_set.size()) >= cap && cap < G)
    res.flagged = true;
  std::sort(res.active_set.begin(), res.active_set.end());
  return res;
}

inline GompResult gomp_solve(const SparseProblem& p, const GompOptions& opt = {}) {
  return gomp_solve(p.S, p.y, p.group_size, opt, p.epsilon);
}

struct BlockSparsityPattern {
  int n_blocks = 1;       // u
  int block_length = 1;   // s
  int active_blocks = 1;  // k_u
  int within_block = 1;   // k_s

  int length() const { return n_blocks * block_length; }
  int sparsity() const { return active_blocks * within_block; }

  void check() const {
    if (n_blocks < 1 || block_length < 1) throw std::invalid_argument("pattern: u and s must be positive");
    if (active_blocks < 0 || active_blocks > n_blocks) throw std::invalid_argument("pattern: k_u outside [0, u]");
    if (within_block < 0 || within_block > block_length) throw std::invalid_argument("pattern: k_s outside [0, s]");
  }
};

// Per block keep the k_s largest magnitudes, then keep the k_u blocks of largest l2 norm.
// Ties go to the lowest index.
template <typename Vec>
std::vector<int> block_column_threshold(const Vec& v, const BlockSparsityPattern& pat) {
  pat.check();
  if (static_cast<int>(v.size()) != pat.length()) throw std::invalid_argument("block_column_threshold: dimension mismatch");
  const int u = pat.n_blocks, s = pat.block_length;
  std::vector<std::vector<int>> kept(u);
  std::vector<double> energy(u, 0.0);
  std::vector<int> idx(s);
  for (int b = 0; b < u; ++b) {
    std::iota(idx.begin(), idx.end(), b * s);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) { return std::abs(v[a]) > std::abs(v[c]); });
    kept[b].assign(idx.begin(), idx.begin() + pat.within_block);
    for (int i : kept[b]) energy[b] += std::norm(v[i]);
  }
  std::vector<int> blocks(u);
  std::iota(blocks.begin(), blocks.end(), 0);
  std::stable_sort(blocks.begin(), blocks.end(), [&](int a, int c) { return energy[a] > energy[c]; });
  std::vector<int> support;
  for (int i = 0; i < pat.active_blocks; ++i)
    support.insert(support.end(), kept[blocks[i]].begin(), kept[blocks[i]].end());
  std::sort(support.begin(), support.end());
  return support;
}

// Plain k largest magnitudes, lowest index on ties.
template <typename Vec>
std::vector<int> hard_threshold(const Vec& v, int k) {
  const int n = static_cast<int>(v.size());
  if (k < 0 || k > n) throw std::invalid_argument("hard_threshold: k outside [0, n]");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) { return std::abs(v[a]) > std::abs(v[c]); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct ThresholdPursuitResult {
  CVec h;
  std::vector<int> support;
  int iterations = 0;
  bool converged = false;       // support fixpoint reached
  bool rank_deficient = false;  // some restricted fit needed the least-norm solution
};

template <typename Thresholder>
ThresholdPursuitResult threshold_pursuit(const CVec& y, const CMat& A, int max_iters, double step,
                                         Thresholder&& select) {
  if (A.rows() != y.size()) throw std::invalid_argument("threshold pursuit: dimension mismatch");
  ThresholdPursuitResult res;
  res.h = CVec::Zero(A.cols());
  std::vector<int> prev;
  for (int it = 0; it < max_iters; ++it) {
    CVec g = res.h + step * (A.adjoint() * (y - A * res.h));
    std::vector<int> supp = select(g);
    LsFit fit = least_squares(gather_columns(A, supp), y);
    res.rank_deficient = res.rank_deficient || fit.rank_deficient;
    res.h.setZero();
    for (std::size_t j = 0; j < supp.size(); ++j) res.h(supp[j]) = fit.x(static_cast<Eigen::Index>(j));
    res.iterations = it + 1;
    res.support = supp;
    if (supp == prev) {
      res.converged = true;
      break;
    }
    prev = std::move(supp);
  }
  return res;
}

inline ThresholdPursuitResult hihtp_solve(const CVec& y, const CMat& A, const BlockSparsityPattern& pat,
                                          int max_iters = 50, double step = 1.0) {
  if (A.cols() != pat.length()) throw std::invalid_argument("hihtp: A must have u*s columns");
  return threshold_pursuit(y, A, max_iters, step, [&](const CVec& g) { return block_column_threshold(g, pat); });
}

inline ThresholdPursuitResult htp_solve(const CVec& y, const CMat& A, int k, int max_iters = 50,
                                        double step = 1.0) {
  return threshold_pursuit(y, A, max_iters, step, [&](const CVec& g) { return hard_threshold(g, k); });
}

struct CcraControlChannel {
  int n_subcarriers = 0;     // n
  std::vector<int> rows;     // B, |B| = m
  double pilot_power = 0.5;  // alpha; data gets 1 - alpha
  CMat A;

  int m() const { return static_cast<int>(rows.size()); }
  double data_power() const { return 1.0 - pilot_power; }
};

// Rows B drawn uniformly without replacement from an n-point DFT; columns 0..us-1; scaled by 1/sqrt(m).
inline CcraControlChannel make_control_channel(const BlockSparsityPattern& pat, int n_subcarriers, int m,
                                               double pilot_power, Rng& rng) {
  pat.check();
  if (n_subcarriers < pat.length()) throw std::invalid_argument("control channel: n must be >= u*s");
  if (m < 1 || m > n_subcarriers) throw std::invalid_argument("control channel: m outside [1, n]");
  if (pilot_power <= 0.0 || pilot_power > 1.0) throw std::invalid_argument("control channel: alpha outside (0, 1]");
  CcraControlChannel c;
  c.n_subcarriers = n_subcarriers;
  c.pilot_power = pilot_power;
  std::vector<int> all(n_subcarriers);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < m; ++i) std::swap(all[i], all[uniform_int(rng, i, n_subcarriers - 1)]);
  c.rows.assign(all.begin(), all.begin() + m);
  std::sort(c.rows.begin(), c.rows.end());
  c.A = CMat(m, pat.length());
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int r = 0; r < m; ++r)
    for (int col = 0; col < pat.length(); ++col) {
      double ph = -2.0 * M_PI * static_cast<double>(c.rows[r]) * col / n_subcarriers;
      c.A(r, col) = std::polar(scale, ph);
    }
  return c;
}

struct BlockSparseInstance {
  CVec h;  // includes the sqrt(alpha) pilot amplitude
  CVec y;
  std::vector<int> support;
  std::vector<int> active_blocks;
  double sigma = 0.0;
};

// (k_u, k_s)-sparse channel with unit energy per active block, observed through the control channel.
inline BlockSparseInstance generate_block_sparse(const CcraControlChannel& ch, const BlockSparsityPattern& pat,
                                                 double snr_db, Rng& rng) {
  pat.check();
  BlockSparseInstance inst;
  inst.h = CVec::Zero(pat.length());
  std::vector<int> blocks(pat.n_blocks);
  std::iota(blocks.begin(), blocks.end(), 0);
  for (int i = 0; i < pat.active_blocks; ++i) std::swap(blocks[i], blocks[uniform_int(rng, i, pat.n_blocks - 1)]);
  inst.active_blocks.assign(blocks.begin(), blocks.begin() + pat.active_blocks);
  std::sort(inst.active_blocks.begin(), inst.active_blocks.end());
  const double amp = std::sqrt(ch.pilot_power);
  for (int b : inst.active_blocks) {
    std::vector<int> taps(pat.block_length);
    std::iota(taps.begin(), taps.end(), 0);
    for (int i = 0; i < pat.within_block; ++i) std::swap(taps[i], taps[uniform_int(rng, i, pat.block_length - 1)]);
    for (int i = 0; i < pat.within_block; ++i) {
      int idx = b * pat.block_length + taps[i];
      inst.h(idx) = amp * complex_normal(rng, 1.0 / pat.within_block);
      inst.support.push_back(idx);
    }
  }
  std::sort(inst.support.begin(), inst.support.end());
  const int m = ch.m();
  inst.sigma = noise_sigma(snr_db, m);
  inst.y = ch.A * inst.h;
  if (inst.sigma > 0)
    for (int i = 0; i < m; ++i) inst.y(i) += complex_normal(rng, inst.sigma * inst.sigma);
  return inst;
}

// Text format:
//   mmtc-sparse-problem 1
//   rows <M> cols <N> group_size <g>
//   sigma <s> epsilon <e>
//   active <count> <i...>
//   S            then M lines of N "re im" pairs
//   h            then N lines "re im"
//   y            then M lines "re im"
//   noise        then M lines "re im"
namespace detail {
inline void write_cvec(std::ostream& os, const char* tag, const CVec& v) {
  os << tag << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v(i).real() << " " << v(i).imag() << "\n";
}
inline CVec read_cvec(std::istream& is, const char* tag, Eigen::Index n) {
  std::string t;
  if (!(is >> t) || t != tag) throw std::runtime_error(std::string("sparse problem: expected '") + tag + "'");
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double re, im;
    if (!(is >> re >> im)) throw std::runtime_error(std::string("sparse problem: truncated '") + tag + "'");
    v(i) = {re, im};
  }
  return v;
}
inline void expect(std::istream& is, const std::string& word) {
  std::string t;
  if (!(is >> t) || t != word) throw std::runtime_error("sparse problem: expected '" + word + "'");
}
}  // namespace detail

inline void write_problem(std::ostream& os, const SparseProblem& p) {
  os << std::setprecision(17);
  os << "mmtc-sparse-problem 1\n";
  os << "rows " << p.S.rows() << " cols " << p.S.cols() << " group_size " << p.group_size << "\n";
  os << "sigma " << p.sigma << " epsilon " << p.epsilon << "\n";
  os << "active " << p.active_set.size();
  for (int a : p.active_set) os << " " << a;
  os << "\nS\n";
  for (Eigen::Index r = 0; r < p.S.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.S.cols(); ++c)
      os << (c ? " " : "") << p.S(r, c).real() << " " << p.S(r, c).imag();
    os << "\n";
  }
  detail::write_cvec(os, "h", p.h);
  detail::write_cvec(os, "y", p.y);
  detail::write_cvec(os, "noise", p.noise);
}

inline SparseProblem read_problem(std::istream& is) {
  SparseProblem p;
  int version = 0;
  detail::expect(is, "mmtc-sparse-problem");
  if (!(is >> version) || version != 1) throw std::runtime_error("sparse problem: unsupported version");
  Eigen::Index rows = 0, cols = 0;
  detail::expect(is, "rows");
  is >> rows;
  detail::expect(is, "cols");
  is >> cols;
  detail::expect(is, "group_size");
  is >> p.group_size;
  detail::expect(is, "sigma");
  is >> p.sigma;
  detail::expect(is, "epsilon");
  is >> p.epsilon;
  detail::expect(is, "active");
  std::size_t na = 0;
  is >> na;
  p.active_set.resize(na);
  for (auto& a : p.active_set) is >> a;
  if (!is || rows < 1 || cols < 1 || p.group_size < 1) throw std::runtime_error("sparse problem: bad header");
  detail::expect(is, "S");
  p.S = CMat(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double re, im;
      if (!(is >> re >> im)) throw std::runtime_error("sparse problem: truncated matrix");
      p.S(r, c) = {re, im};
    }
  p.h = detail::read_cvec(is, "h", cols);
  p.y = detail::read_cvec(is, "y", rows);
  p.noise = detail::read_cvec(is, "noise", rows);
  return p;
}

}  // namespace mmtc
