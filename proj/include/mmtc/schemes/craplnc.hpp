#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/finite_field.hpp"
#include "mmtc/phy_capture.hpp"
#include "mmtc/resource_model.hpp"
#include "mmtc/schemes/frame_graph.hpp"
#include "mmtc/sim_core.hpp"

namespace mmtc {

struct CraplncFrame {
  FrameGraph graph;
  std::vector<std::vector<FfElem>> alpha;  // per user, aligned with graph.user_cells
  std::vector<double> cell_draw;           // one uniform per cell
  FfMatrix messages;                       // users x symbols
};

struct CraplncFrameResult {
  std::vector<char> resolved;
  int by_sic = 0;
  int by_rank = 0;
  int equations = 0;
};

// SIC peeling first; when it stalls, slots holding several unresolved users contribute
// precoded linear combinations and users whose unit vector lies in the row space are resolved.
inline CraplncFrameResult craplnc_resolve(const CraplncFrame& fr, const std::vector<double>& p_of_n,
                                          const Field& f) {
  const FrameGraph& g = fr.graph;
  const int n = g.users();
  auto P = [&](int k) { return k >= 1 && static_cast<std::size_t>(k) < p_of_n.size() ? p_of_n[k] : 0.0; };
  CraplncFrameResult res;
  res.resolved.assign(n, 0);
  std::vector<char> visible(n, 1), cell_ok(g.cells());
  for (int c = 0; c < g.cells(); ++c) cell_ok[c] = fr.cell_draw[c] < P(1);

  auto alpha_of = [&](int u, int c) {
    const auto& cells = g.user_cells[u];
    for (std::size_t r = 0; r < cells.size(); ++r)
      if (cells[r] == c) return fr.alpha[u][r];
    throw std::logic_error("craplnc: replica not found");
  };

  for (;;) {
    std::vector<char> before = res.resolved;
    peel(g, res.resolved, visible, cell_ok);
    for (int u = 0; u < n; ++u) res.by_sic += res.resolved[u] && !before[u];

    std::vector<int> col_of(n, -1), users;
    for (int u = 0; u < n; ++u)
      if (!res.resolved[u]) {
        col_of[u] = static_cast<int>(users.size());
        users.push_back(u);
      }
    if (users.empty()) break;
    FfMatrix A(0, users.size()), U(0, fr.messages.cols());
    for (int c = 0; c < g.cells(); ++c) {
      std::vector<int> left;
      for (int u : g.cell_users[c])
        if (!res.resolved[u]) left.push_back(u);
      if (left.size() < 2 || !(fr.cell_draw[c] < P(static_cast<int>(left.size())))) continue;
      std::vector<FfElem> row(users.size(), 0), rhs(fr.messages.cols(), 0);
      for (int u : left) {
        FfElem a = alpha_of(u, c);
        row[col_of[u]] = a;
        for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = f.add(rhs[j], f.mul(a, fr.messages(u, j)));
      }
      A.append_row(row);
      U.append_row(rhs);
    }
    if (A.rows() == 0) break;
    res.equations = static_cast<int>(A.rows());
    SolveResult s = ff_solve(f, {A, U});
    if (s.status == SolveStatus::Inconsistent) throw std::logic_error("craplnc: inconsistent frame equations");
    int gained = 0;
    for (std::size_t j = 0; j < users.size(); ++j) {
      if (!s.determined[j]) continue;
      for (std::size_t k = 0; k < fr.messages.cols(); ++k)
        if (s.messages(j, k) != fr.messages(users[j], k)) throw std::logic_error("craplnc: wrong message recovered");
      res.resolved[users[j]] = 1;
      ++gained;
    }
    res.by_rank += gained;
    if (gained == 0) break;
  }
  return res;
}

struct CraplncConfig {
  FramePlan frame{10, 2};
  int prbs_per_slot = 50;
  FieldSpec field{2, 8};
  bool precoding = true;
  std::vector<double> p_of_n;  // decode probability by residual collider count, index 0 unused
  int symbols = 2;
  int ack_delay = 3;
};

class Craplnc : public AccessScheme {
 public:
  explicit Craplnc(CraplncConfig c) : c_(std::move(c)), field_(c_.field) {
    auto errs = validate(c_.frame);
    if (!errs.empty()) throw std::invalid_argument("craplnc: " + errs.front());
    if (c_.prbs_per_slot < 1) throw std::invalid_argument("craplnc: prbs_per_slot must be >= 1");
  }

  std::string kind() const override { return "craplnc"; }
  int opportunities_per_tti() const override { return c_.prbs_per_slot; }

  void on_tti(Tti now, const std::vector<DeviceId>& attempters, Rng& rng, std::vector<Outcome>& out) override {
    const int S = c_.frame.slots_per_frame;
    waiting_.insert(waiting_.end(), attempters.begin(), attempters.end());
    if (now % S == 0) {
      members_.swap(waiting_);
      waiting_.clear();
    }
    if (now % S != S - 1) return;

    const int n = static_cast<int>(members_.size());
    CraplncFrame fr;
    fr.graph = FrameGraph(n, S * c_.prbs_per_slot);
    fr.alpha.assign(n, {});
    fr.messages = FfMatrix(n, c_.symbols);
    for (int u = 0; u < n; ++u) {
      std::vector<int> slots(S);
      for (int i = 0; i < S; ++i) slots[i] = i;
      for (int r = 0; r < c_.frame.replicas; ++r) std::swap(slots[r], slots[uniform_int(rng, r, S - 1)]);
      for (int r = 0; r < c_.frame.replicas; ++r) {
        int prb = static_cast<int>(uniform_int(rng, 0, c_.prbs_per_slot - 1));
        fr.graph.add_replica(u, slots[r] * c_.prbs_per_slot + prb);
        fr.alpha[u].push_back(c_.precoding ? field_.random_nonzero(rng) : 1);
      }
      for (int k = 0; k < c_.symbols; ++k) fr.messages(u, k) = field_.random(rng);
    }
    fr.cell_draw.assign(fr.graph.cells(), 1.0);
    for (int cell = 0; cell < fr.graph.cells(); ++cell)
      if (!fr.graph.cell_users[cell].empty()) fr.cell_draw[cell] = uniform01(rng);
    CraplncFrameResult r = craplnc_resolve(fr, c_.p_of_n, field_);
    for (int u = 0; u < n; ++u)
      out.push_back({members_[u], r.resolved[u] != 0, r.resolved[u] ? now + 1 : now + c_.ack_delay});
    members_.clear();
  }

 private:
  CraplncConfig c_;
  Field field_;
  std::vector<DeviceId> waiting_, members_;
};

}  // namespace mmtc
