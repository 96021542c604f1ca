#pragma once

// Ordered Bratteli diagram of the cover towers, its Vershik map, and the
// projection of cylinders to floors.
//
// Vertices at level k are tower indices (1 and max(d-k+1,2)..d); level 0 is
// v_0, which behaves like tower 1. Edges into level k:
//   v(1) -> v(1)  order 1
//   v(2) -> v(1)  order 2, present for k >= d
//   v(1) -> v(d)
//   v(j) -> v(j-1) for 3 <= j <= d
// There is at most one edge between two vertices, so a path is its sequence
// of tower indices.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibtower/covers.hpp"
#include "fibtower/errors.hpp"
#include "fibtower/kneading.hpp"

namespace fibtower {

struct DiagramEdge {
  int level = 1;  // edge from level-1 to level
  int source = 1;
  int target = 1;
  int order = 1;  // position among the edges into target
  bool maximal = true;
};

class Diagram {
 public:
  Diagram(int d, int depth) : d_(d), depth_(depth) {
    if (d < 2) throw std::domain_error("d must be >= 2");
    if (depth < 0) throw std::domain_error("depth must be >= 0");
    for (int k = 0; k <= depth; ++k) vertices_.push_back(tower_indices(d, k));
    edges_.emplace_back();
    for (int k = 1; k <= depth; ++k) {
      std::vector<DiagramEdge> in;
      for (int t : vertices_[k]) {
        if (t == 1) {
          bool pair = k >= d;
          in.push_back({k, 1, 1, 1, !pair});
          if (pair) in.push_back({k, 2, 1, 2, true});
        } else if (t == d) {
          in.push_back({k, 1, d, 1, true});
        } else {
          in.push_back({k, t + 1, t, 1, true});
        }
      }
      edges_.push_back(std::move(in));
    }
  }

  int d() const { return d_; }
  int depth() const { return depth_; }
  const std::vector<int>& vertices(int k) const { return vertices_.at(static_cast<std::size_t>(k)); }
  const std::vector<DiagramEdge>& edges_into_level(int k) const {
    if (k < 1 || k > depth_) throw std::out_of_range("no edges into level " + std::to_string(k));
    return edges_[static_cast<std::size_t>(k)];
  }
  std::size_t vertex_position(int k, int tower) const {
    const auto& v = vertices(k);
    auto it = std::find(v.begin(), v.end(), tower);
    if (it == v.end())
      throw std::out_of_range("no vertex v_" + std::to_string(k) + "(" + std::to_string(tower) + ")");
    return static_cast<std::size_t>(it - v.begin());
  }

  // Edge order is written as labels "1"/"2" on the two edges into v_k(1).
  std::string to_dot() const {
    std::ostringstream os;
    auto name = [](int k, int t) {
      return k == 0 ? std::string("v0") : "v" + std::to_string(k) + "_" + std::to_string(t);
    };
    os << "digraph bratteli {\n  rankdir=TB;\n  node [shape=point];\n";
    os << "  v0 [shape=circle,label=\"v_0\"];\n";
    for (int k = 1; k <= depth_; ++k) {
      os << "  { rank=same;";
      for (int t : vertices_[k]) os << " " << name(k, t);
      os << " }\n";
      for (int t : vertices_[k])
        os << "  " << name(k, t) << " [shape=circle,label=\"v_" << k << "(" << t << ")\"];\n";
    }
    for (int k = 1; k <= depth_; ++k)
      for (const auto& e : edges_[k]) {
        os << "  " << name(k - 1, e.source) << " -> " << name(k, e.target);
        bool paired = e.target == 1 && k >= d_;
        if (paired) os << " [label=\"" << e.order << "\"]";
        os << ";\n";
      }
    os << "}\n";
    return os.str();
  }

 private:
  int d_, depth_;
  std::vector<std::vector<int>> vertices_;
  std::vector<std::vector<DiagramEdge>> edges_;
};

inline Diagram build_diagram(int d, int depth) { return Diagram(d, depth); }

using IntMatrix = std::vector<std::vector<std::int64_t>>;

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow");
  return r;
}

inline IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  if (a.empty() || b.empty() || a[0].size() != b.size())
    throw std::invalid_argument("matrix shapes do not match");
  IntMatrix c(a.size(), std::vector<std::int64_t>(b[0].size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < b[0].size(); ++j) {
        std::int64_t p;
        if (__builtin_mul_overflow(a[i][k], b[k][j], &p)) throw std::overflow_error("integer overflow");
        c[i][j] = checked_add(c[i][j], p);
      }
    }
  return c;
}

// k-th incidence matrix: rows are the vertices of level k-1, columns those of
// level k, both in increasing tower order.
inline IntMatrix incidence_matrix(int d, int k) {
  if (k < 1) throw std::domain_error("incidence matrices start at level 1");
  Diagram g(d, k);
  IntMatrix m(g.vertices(k - 1).size(), std::vector<std::int64_t>(g.vertices(k).size(), 0));
  for (const auto& e : g.edges_into_level(k))
    ++m[g.vertex_position(k - 1, e.source)][g.vertex_position(k, e.target)];
  return m;
}

// F_d^j through the cutting-time closed form.
inline IntMatrix stationary_power(int d, std::int64_t j) {
  if (j < 1) throw std::domain_error("stationary_power needs j >= 1");
  const Combinatorics& c = combinatorics(d);
  IntMatrix m(static_cast<std::size_t>(d), std::vector<std::int64_t>(static_cast<std::size_t>(d)));
  for (int r = 0; r < d; ++r)
    for (int col = 0; col < d; ++col)
      m[r][col] = col == 0 ? c.S(j - d + 1 - r) : c.S(j - 2 * d + 1 + col - r);
  return m;
}

// Number of paths from v_0 to each vertex of level j, in vertex order.
inline std::vector<std::int64_t> path_counts(int d, std::int64_t j) {
  if (j < 0) throw std::domain_error("level must be >= 0");
  const Combinatorics& c = combinatorics(d);
  if (j < d) return std::vector<std::int64_t>(static_cast<std::size_t>(j + 1), 1);
  std::vector<std::int64_t> n{c.S(j - d + 1)};
  for (int l = 2; l <= d; ++l) n.push_back(c.S(j + l - 2 * d));
  return n;
}

// Finite path from v_0: towers[m-1] is the tower index of the vertex at level m.
struct FinitePath {
  std::vector<int> towers;
  int level() const { return static_cast<int>(towers.size()); }
  int terminal() const { return towers.empty() ? 1 : towers.back(); }
  friend bool operator==(const FinitePath&, const FinitePath&) = default;
};

inline bool edge_exists(int d, int level, int source, int target) {
  if (!tower_exists(d, target, level) || !tower_exists(d, source, level - 1)) return false;
  if (source == 1) return target == 1 || target == d;
  if (source == 2) return target == 1;
  return target == source - 1;
}

inline bool valid_path(int d, const FinitePath& p) {
  int prev = 1;
  for (int m = 1; m <= p.level(); ++m) {
    if (!edge_exists(d, m, prev, p.towers[m - 1])) return false;
    prev = p.towers[m - 1];
  }
  return true;
}

inline std::vector<FinitePath> enumerate_paths(int d, int k) {
  std::vector<FinitePath> out{FinitePath{}};
  for (int m = 1; m <= k; ++m) {
    std::vector<FinitePath> next;
    for (const auto& p : out)
      for (int t : tower_indices(d, m))
        if (edge_exists(d, m, p.terminal(), t)) {
          FinitePath q = p;
          q.towers.push_back(t);
          next.push_back(std::move(q));
        }
    out = std::move(next);
  }
  return out;
}

inline std::int64_t eta(int d, const FinitePath& p) {
  const Combinatorics& c = combinatorics(d);
  std::int64_t s = 0;
  for (int m = std::max(d, 1); m <= p.level(); ++m)
    if (p.towers[m - 1] == 1 && p.towers[m - 2] == 2) s = checked_add(s, c.S(m - d));
  return s;
}

// The unique minimal path from v_0 to v_k(i).
inline FinitePath minimal_path_to(int d, int k, int i) {
  if (!tower_exists(d, i, k))
    throw std::out_of_range("no vertex v_" + std::to_string(k) + "(" + std::to_string(i) + ")");
  FinitePath p;
  p.towers.assign(static_cast<std::size_t>(k), 1);
  int t = i;
  for (int m = k; m >= 1; --m) {
    p.towers[m - 1] = t;
    t = (t == 1 || t == d) ? 1 : t + 1;
  }
  return p;
}

// Successor of a finite path among paths into the same vertex; nullopt for the
// last one.
inline std::optional<FinitePath> next_in_fiber(int d, const FinitePath& p) {
  for (int j = d; j <= p.level(); ++j) {
    if (p.towers[j - 1] == 1 && p.towers[j - 2] == 1) {
      FinitePath q = minimal_path_to(d, j - 1, 2);
      q.towers.push_back(1);
      q.towers.insert(q.towers.end(), p.towers.begin() + j, p.towers.end());
      return q;
    }
  }
  return std::nullopt;
}

// Infinite path: explicit prefix followed by a tail rule.
enum class Tail { minimal, maximal, undetermined };

struct AdicPath {
  std::vector<int> prefix;
  Tail tail = Tail::minimal;
};

inline AdicPath minimal_adic_path() { return AdicPath{{}, Tail::minimal}; }

// x^{max,l}: through v_{d-1}(l), all edges maximal.
inline AdicPath maximal_adic_path(int d, int l) {
  if (l < 1 || l > d) throw std::out_of_range("maximal paths are indexed 1..d");
  return AdicPath{minimal_path_to(d, d - 1, l).towers, Tail::maximal};
}

namespace detail {

inline int tail_next(int d, int level, int current, Tail tail) {
  switch (tail) {
    case Tail::minimal:
      if (current != 1) throw std::invalid_argument("a minimal tail must leave from tower 1");
      return 1;
    case Tail::maximal:
      // Out of v(1) both edges are maximal until the diagram is stationary.
      if (current == 1 && level < d - 1) throw DepthInsufficient("maximal tail is ambiguous before level d-1");
      if (current == 1) return d;
      return current == 2 ? 1 : current - 1;
    case Tail::undetermined:
      break;
  }
  throw DepthInsufficient("path undetermined beyond its prefix");
}

}  // namespace detail

inline FinitePath truncate(int d, const AdicPath& x, int depth) {
  FinitePath p;
  int cur = 1;
  for (int m = 1; m <= depth; ++m) {
    cur = m <= static_cast<int>(x.prefix.size()) ? x.prefix[m - 1] : detail::tail_next(d, m - 1, cur, x.tail);
    p.towers.push_back(cur);
  }
  return p;
}

inline AdicPath vershik_successor(int d, const AdicPath& x) {
  const int L = static_cast<int>(x.prefix.size());
  int j0 = -1;
  for (int j = d; j <= L; ++j)
    if (x.prefix[j - 1] == 1 && x.prefix[j - 2] == 1) {
      j0 = j;
      break;
    }
  if (j0 < 0) {
    switch (x.tail) {
      case Tail::minimal:
        if (L > 0 && x.prefix.back() != 1) throw std::invalid_argument("a minimal tail must leave from tower 1");
        j0 = std::max(L + 1, d);
        break;
      case Tail::maximal:
        if (L < d - 1) throw DepthInsufficient("maximal tail is ambiguous before level d-1");
        return minimal_adic_path();
      case Tail::undetermined:
        throw DepthInsufficient("no non-maximal edge within the determined prefix");
    }
  }
  FinitePath head = minimal_path_to(d, j0 - 1, 2);
  AdicPath y;
  y.prefix = std::move(head.towers);
  y.prefix.push_back(1);
  for (int m = j0 + 1; m <= L; ++m) y.prefix.push_back(x.prefix[m - 1]);
  y.tail = x.tail;
  return y;
}

// Floor J_{i,k}^{eta} for a path of length k ending at v_k(i).
inline Floor project_cylinder(const Cover& cover, const FinitePath& p) {
  if (p.level() != cover.k())
    throw std::invalid_argument("path level " + std::to_string(p.level()) + " differs from cover level " +
                                std::to_string(cover.k()));
  if (!valid_path(cover.d(), p)) throw std::invalid_argument("not a path of the diagram");
  const Tower& t = cover.tower(p.terminal());
  std::int64_t e = eta(cover.d(), p);
  if (e >= static_cast<std::int64_t>(t.floors.size()))
    throw std::logic_error("eta beyond tower height");
  return t.floors[static_cast<std::size_t>(e)];
}

struct SemiconjugacyReport {
  int d = 2;
  int depth = 0;
  std::int64_t n_max = 0;
  std::int64_t checked = 0;
  std::int64_t first_failure = -1;
  bool passed() const { return first_failure < 0 && checked == n_max + 1; }
};

inline std::int64_t semiconjugacy_orbit_need(int d, int depth, std::int64_t n_max) {
  return std::max(n_max, cover_orbit_need(d, depth));
}

// c_n lies in the projected floor of V^n(x_min) truncated at depth, n = 0..n_max.
inline SemiconjugacyReport verify_semiconjugacy(const Realization& r, int depth, std::int64_t n_max) {
  const int d = r.d();
  SemiconjugacyReport rep;
  rep.d = d;
  rep.depth = depth;
  rep.n_max = n_max;
  Cover cover = build_cover(r, depth);
  const CriticalOrbit& orb = *r.orbit;
  AdicPath x = minimal_adic_path();
  for (std::int64_t n = 0; n <= n_max; ++n) {
    if (n > 0) x = vershik_successor(d, x);
    Floor f = project_cylinder(cover, truncate(d, x, depth));
    Where w = locate(orb, n, f);
    if (w == Where::unknown) throw PrecisionExhausted("membership of c_" + std::to_string(n) + " undecided");
    ++rep.checked;
    if (w == Where::outside) {
      rep.first_failure = n;
      break;
    }
  }
  return rep;
}

// eta of x^{max,l} at level l+kd-2 equals S(l+(k-1)d-1)-1, for all levels up to depth.
inline std::int64_t check_maximal_path_eta(int d, int depth, std::string* where = nullptr) {
  const Combinatorics& c = combinatorics(d);
  std::int64_t checked = 0;
  for (int l = 1; l <= d; ++l) {
    AdicPath x = maximal_adic_path(d, l);
    for (int k = 1; l + k * d - 2 <= depth; ++k) {
      int level = l + k * d - 2;
      if (level == d - 1) continue;
      FinitePath p = truncate(d, x, level);
      bool theta = p.towers[level - 1] == 1 && level >= d && p.towers[level - 2] == 2;
      if (!theta || eta(d, p) != c.S(l + (k - 1) * d - 1) - 1) {
        if (where) *where = "l=" + std::to_string(l) + ",k=" + std::to_string(k);
        return -1;
      }
      ++checked;
    }
  }
  return checked;
}

}  // namespace fibtower
