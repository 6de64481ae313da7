#pragma once

// Brute-force LP reference for tiny systems: enumerate every choice of n
// tight rows among the constraints and the bounds x >= 0, solve the square
// system exactly, keep feasible points, take the best objective.

#include <optional>
#include <random>
#include <vector>

#include "aara/lp.hpp"

namespace aara::lp::testing {

struct OracleResult {
  Rat objective;
  Assignment values;
};

inline std::optional<std::vector<Rat>> solveSquare(std::vector<std::vector<Rat>> m) {
  const size_t n = m.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(m[piv], m[col]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rat f = m[r][col] / m[col][col];
      for (size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<Rat> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

inline std::optional<OracleResult> vertexOracle(const System& s, const Objective& o) {
  const size_t n = s.numVars();
  // Row r: coeffs·x = rhs when tight.
  struct Row {
    std::vector<Rat> a;
    Rat rhs;
  };
  std::vector<Row> rows;
  for (const auto& c : s.constraints()) {
    Row r{std::vector<Rat>(n), -c.lhs.constant};
    for (const auto& [v, k] : c.lhs.terms) r.a[static_cast<size_t>(v)] = k;
    rows.push_back(r);
  }
  for (size_t i = 0; i < n; ++i) {
    Row r{std::vector<Rat>(n), 0};
    r.a[i] = 1;
    rows.push_back(r);
  }
  std::optional<OracleResult> best;
  std::vector<size_t> pick;
  auto consider = [&]() {
    std::vector<std::vector<Rat>> m;
    for (size_t r : pick) {
      auto row = rows[r].a;
      row.push_back(rows[r].rhs);
      m.push_back(row);
    }
    auto x = solveSquare(m);
    if (!x) return;
    Assignment a;
    for (size_t i = 0; i < n; ++i) a[static_cast<Var>(i)] = (*x)[i];
    if (firstViolated(s, a)) return;
    Rat val = 0;
    for (const auto& [v, w] : o.weights) val += w * a.at(v);
    if (!best || val < best->objective) best = OracleResult{val, a};
  };
  auto rec = [&](auto&& self, size_t start) -> void {
    if (pick.size() == n) {
      consider();
      return;
    }
    for (size_t r = start; r < rows.size(); ++r) {
      pick.push_back(r);
      self(self, r + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return best;
}

inline System randomSystem(std::mt19937_64& rng, size_t maxVars = 4) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  System s;
  int n = uni(1, static_cast<int>(maxVars));
  for (int i = 0; i < n; ++i) s.newVar("x" + std::to_string(i));
  int m = uni(1, 5);
  for (int c = 0; c < m; ++c) {
    LinExpr e(uni(-4, 4));
    for (int i = 0; i < n; ++i) {
      int k = uni(-3, 3);
      if (k != 0) e.add(i, k);
    }
    if (uni(0, 4) == 0) s.addEq(e, "e" + std::to_string(c));
    else s.addGe(e, "g" + std::to_string(c));
  }
  return s;
}

inline Objective randomObjective(std::mt19937_64& rng, size_t n) {
  Objective o;
  for (size_t i = 0; i < n; ++i)
    o.add(static_cast<Var>(i), std::uniform_int_distribution<int>(1, 5)(rng));
  return o;
}

}  // namespace aara::lp::testing
