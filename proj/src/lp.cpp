#include "aara/lp.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "aara/errors.hpp"

namespace aara::lp {

LinExpr LinExpr::var(Var v, const Rat& coeff) {
  LinExpr e;
  e.add(v, coeff);
  return e;
}

LinExpr& LinExpr::add(Var v, const Rat& coeff) {
  if (coeff == 0) return *this;
  auto [it, inserted] = terms.emplace(v, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms.erase(it);
  }
  return *this;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [v, c] : o.terms) add(v, c);
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [v, c] : o.terms) add(v, -c);
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(const Rat& k) {
  if (k == 0) {
    terms.clear();
    constant = 0;
    return *this;
  }
  for (auto& [v, c] : terms) c *= k;
  constant *= k;
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(const Rat& k, LinExpr a) { return a *= k; }

void Objective::add(Var v, const Rat& w) {
  if (w <= 0) throw Error(ErrorKind::Internal, "objective weights must be positive");
  weights[v] += w;
}

Var System::newVar(std::string tag) {
  tags_.push_back(std::move(tag));
  return static_cast<Var>(tags_.size() - 1);
}

void System::addGe(LinExpr e, std::string tag) {
  constraints_.push_back({std::move(e), Rel::Ge, std::move(tag)});
}

void System::addEq(LinExpr e, std::string tag) {
  constraints_.push_back({std::move(e), Rel::Eq, std::move(tag)});
}

std::string show(const LinExpr& e) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : e.terms) {
    Rat mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (mag != 1) os << toString(mag) << " ";
    os << "x" << v;
  }
  if (e.constant != 0 || first) {
    if (first) {
      os << toString(e.constant);
    } else {
      os << (e.constant < 0 ? " - " : " + ") << toString(abs(e.constant));
    }
  }
  return os.str();
}

std::string System::dump(const Objective& obj) const {
  std::ostringstream os;
  os << "/* " << numVars() << " variables, " << constraints_.size() << " constraints */\n";
  os << "min: ";
  LinExpr o;
  for (const auto& [v, w] : obj.weights) o.add(v, w);
  os << show(o) << ";\n";
  for (size_t i = 0; i < constraints_.size(); ++i) {
    const auto& c = constraints_[i];
    LinExpr lhs = c.lhs;
    Rat rhs = -lhs.constant;
    lhs.constant = 0;
    os << "c" << i << ": " << show(lhs) << (c.rel == Rel::Ge ? " >= " : " = ") << toString(rhs)
       << ";  /* " << c.tag << " */\n";
  }
  return os.str();
}

Rat evalAssignment(const Assignment& a, const LinExpr& e) {
  Rat sum = e.constant;
  for (const auto& [v, c] : e.terms) {
    auto it = a.find(v);
    if (it == a.end()) throw Error(ErrorKind::UnboundVar, "variable x" + std::to_string(v) + " is unassigned");
    sum += c * it->second;
  }
  return sum;
}

bool satisfies(const Constraint& c, const Assignment& a) {
  Rat val = evalAssignment(a, c.lhs);
  return c.rel == Rel::Ge ? val >= 0 : val == 0;
}

std::optional<std::size_t> firstViolated(const System& sys, const Assignment& a) {
  for (size_t i = 0; i < sys.constraints().size(); ++i)
    if (!satisfies(sys.constraints()[i], a)) return i;
  for (const auto& [v, q] : a)
    if (q < 0) return sys.constraints().size();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sparse exact tableau simplex.

namespace {

using Entry = std::pair<int, Rat>;
using Row = std::vector<Entry>;  // sorted by column, no zeros

const Rat* lookup(const Row& r, int col) {
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const Entry& e, int c) { return e.first < c; });
  if (it == r.end() || it->first != col) return nullptr;
  return &it->second;
}

// a += k * b
void axpy(Row& a, const Rat& k, const Row& b) {
  Row out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(std::move(a[i++]));
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, k * b[j].second);
      ++j;
    } else {
      Rat v = a[i].second + k * b[j].second;
      if (v != 0) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  a = std::move(out);
}

class Tableau {
 public:
  std::vector<Row> rows;
  std::vector<Rat> rhs;
  std::vector<int> basis;
  std::vector<Rat> cost;     // reduced costs, dense over columns
  Rat value;                 // current objective value
  int numCols = 0;
  std::vector<bool> allowed; // columns that may enter
  std::size_t pivots = 0;

  void setCosts(const std::vector<Rat>& c) {
    cost = c;
    cost.resize(static_cast<size_t>(numCols));
    value = 0;
    for (size_t r = 0; r < rows.size(); ++r) {
      const Rat& cb = c[static_cast<size_t>(basis[r])];
      if (cb == 0) continue;
      for (const auto& [col, a] : rows[r]) cost[static_cast<size_t>(col)] -= cb * a;
      value += cb * rhs[r];
    }
  }

  void pivot(size_t r, int col) {
    ++pivots;
    Rat inv = 1 / *lookup(rows[r], col);
    for (auto& [c, a] : rows[r]) a *= inv;
    rhs[r] *= inv;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i == r) continue;
      const Rat* a = lookup(rows[i], col);
      if (!a) continue;
      Rat k = -*a;
      axpy(rows[i], k, rows[r]);
      rhs[i] += k * rhs[r];
    }
    Rat cj = cost[static_cast<size_t>(col)];
    if (cj != 0) {
      for (const auto& [c, a] : rows[r]) cost[static_cast<size_t>(c)] -= cj * a;
      value += cj * rhs[r];
    }
    basis[r] = col;
  }

  // Bland's rule: lowest-index improving column, lowest-index leaving basic.
  // Returns false when optimal; throws on unboundedness.
  bool step() {
    int enter = -1;
    for (int c = 0; c < numCols; ++c) {
      if (allowed[static_cast<size_t>(c)] && cost[static_cast<size_t>(c)] < 0) {
        enter = c;
        break;
      }
    }
    if (enter < 0) return false;
    std::optional<size_t> leave;
    Rat best;
    for (size_t r = 0; r < rows.size(); ++r) {
      const Rat* a = lookup(rows[r], enter);
      if (!a || *a <= 0) continue;
      Rat ratio = rhs[r] / *a;
      if (!leave || ratio < best || (ratio == best && basis[r] < basis[*leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (!leave) throw Error(ErrorKind::Internal, "LP unbounded (impossible for positive weights)");
    pivot(*leave, enter);
    return true;
  }
};

}  // namespace

SolveResult solve(const System& sys, const Objective& obj) {
  const int n = static_cast<int>(sys.numVars());
  Tableau t;
  int next = n;
  std::vector<int> artificial;

  for (const auto& c : sys.constraints()) {
    Row row;
    for (const auto& [v, a] : c.lhs.terms) row.emplace_back(v, a);
    Rat b = -c.lhs.constant;
    int slack = -1;
    if (c.rel == Rel::Ge) {
      if (row.empty()) {
        if (b > 0) {  // 0 >= b with b > 0
          SolveResult res;
          return res;
        }
        continue;
      }
      slack = next++;
      row.emplace_back(slack, Rat(-1));
    } else if (row.empty()) {
      if (b != 0) return SolveResult{};
      continue;
    }
    if (b < 0) {
      for (auto& [col, a] : row) a = -a;
      b = -b;
    }
    int basic;
    if (slack >= 0 && *lookup(row, slack) == 1) {
      basic = slack;
    } else {
      basic = next++;
      artificial.push_back(basic);
      row.emplace_back(basic, Rat(1));
    }
    t.rows.push_back(std::move(row));
    t.rhs.push_back(std::move(b));
    t.basis.push_back(basic);
  }
  t.numCols = next;
  t.allowed.assign(static_cast<size_t>(next), true);

  std::vector<bool> isArt(static_cast<size_t>(next), false);
  for (int a : artificial) isArt[static_cast<size_t>(a)] = true;

  // Phase 1.
  if (!artificial.empty()) {
    std::vector<Rat> c1(static_cast<size_t>(next));
    for (int a : artificial) c1[static_cast<size_t>(a)] = 1;
    t.setCosts(c1);
    while (t.step()) {
    }
    if (t.value > 0) {
      SolveResult res;
      res.pivots = t.pivots;
      return res;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (size_t r = 0; r < t.rows.size();) {
      if (!isArt[static_cast<size_t>(t.basis[r])]) {
        ++r;
        continue;
      }
      int col = -1;
      for (const auto& [c, a] : t.rows[r])
        if (!isArt[static_cast<size_t>(c)]) {
          col = c;
          break;
        }
      if (col >= 0) {
        t.pivot(r, col);
        ++r;
      } else {  // redundant row
        t.rows.erase(t.rows.begin() + static_cast<long>(r));
        t.rhs.erase(t.rhs.begin() + static_cast<long>(r));
        t.basis.erase(t.basis.begin() + static_cast<long>(r));
      }
    }
    for (int a : artificial) t.allowed[static_cast<size_t>(a)] = false;
    for (auto& row : t.rows)
      row.erase(std::remove_if(row.begin(), row.end(),
                               [&](const Entry& e) { return isArt[static_cast<size_t>(e.first)]; }),
                row.end());
  }

  // Phase 2.
  std::vector<Rat> c2(static_cast<size_t>(next));
  for (const auto& [v, w] : obj.weights)
    if (v >= 0 && v < n) c2[static_cast<size_t>(v)] = w;
  t.setCosts(c2);
  while (t.step()) {
  }

  SolveResult res;
  res.status = SolveResult::Status::Optimal;
  res.pivots = t.pivots;
  for (int v = 0; v < n; ++v) res.values[v] = 0;
  for (size_t r = 0; r < t.rows.size(); ++r)
    if (t.basis[r] < n) res.values[t.basis[r]] = t.rhs[r];
  res.objective = 0;
  for (const auto& [v, w] : obj.weights) res.objective += w * res.values[v];
  if (auto bad = firstViolated(sys, res.values))
    throw Error(ErrorKind::Internal, "simplex returned an assignment violating constraint " +
                                         std::to_string(*bad));
  return res;
}

}  // namespace aara::lp
