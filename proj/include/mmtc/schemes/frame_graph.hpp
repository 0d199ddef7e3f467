#pragma once

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <vector>

namespace mmtc {

// Bipartite graph of user replicas and frame cells (slot, or slot x PRB).
struct FrameGraph {
  std::vector<std::vector<int>> user_cells;
  std::vector<std::vector<int>> cell_users;

  FrameGraph() = default;
  FrameGraph(int n_users, int n_cells) : user_cells(n_users), cell_users(n_cells) {}

  int users() const { return static_cast<int>(user_cells.size()); }
  int cells() const { return static_cast<int>(cell_users.size()); }

  void add_replica(int user, int cell) {
    if (user < 0 || user >= users() || cell < 0 || cell >= cells()) throw std::out_of_range("frame graph: bad edge");
    user_cells[user].push_back(cell);
    cell_users[cell].push_back(user);
  }
};

// Iterative SIC: a cell whose only unresolved user is visible and whose decode succeeds
// yields that user; its replicas are cancelled everywhere. Runs to a fixpoint.
inline void peel(const FrameGraph& g, std::vector<char>& resolved, const std::vector<char>& visible,
                 const std::vector<char>& cell_ok) {
  std::vector<int> left(g.cells(), 0);
  std::deque<int> queue;
  for (int c = 0; c < g.cells(); ++c) {
    for (int u : g.cell_users[c]) left[c] += !resolved[u];
    if (left[c] == 1) queue.push_back(c);
  }
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    if (left[c] != 1 || !cell_ok[c]) continue;
    int who = -1;
    for (int u : g.cell_users[c])
      if (!resolved[u]) who = u;
    if (who < 0 || !visible[who]) continue;
    resolved[who] = 1;
    for (int c2 : g.user_cells[who])
      if (--left[c2] == 1) queue.push_back(c2);
  }
}

inline std::vector<char> peel(const FrameGraph& g, const std::vector<char>& visible, const std::vector<char>& cell_ok) {
  std::vector<char> resolved(g.users(), 0);
  peel(g, resolved, visible, cell_ok);
  return resolved;
}

// Brute force: the unresolved set is the union of all stuck sets, where X is stuck if no member
// of X is visible with a decodable cell holding no other member of X. Exponential in users.
inline std::vector<char> peeling_oracle(const FrameGraph& g, const std::vector<char>& visible,
                                        const std::vector<char>& cell_ok) {
  const int n = g.users();
  if (n > 20) throw std::invalid_argument("peeling_oracle: too many users");
  unsigned stuck_union = 0;
  for (unsigned x = 1; x < (1u << n); ++x) {
    bool stuck = true;
    for (int u = 0; u < n && stuck; ++u) {
      if (!(x >> u & 1) || !visible[u]) continue;
      for (int c : g.user_cells[u]) {
        if (!cell_ok[c]) continue;
        int inside = 0;
        for (int v : g.cell_users[c]) inside += (x >> v) & 1;
        if (inside == 1) {
          stuck = false;
          break;
        }
      }
    }
    if (stuck) stuck_union |= x;
  }
  std::vector<char> resolved(n);
  for (int u = 0; u < n; ++u) resolved[u] = !((stuck_union >> u) & 1);
  return resolved;
}

}  // namespace mmtc
