#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/pointcloud.hpp"

namespace topoalign {

/// Death value of a feature that never dies.
inline constexpr double kEssential = std::numeric_limits<double>::infinity();

struct Edge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double length = 0.0;
  std::size_t rank = 0;  // position in the sorted filtration

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct PersistenceFeature {
  int dim = 0;
  double birth = 0.0;
  double death = kEssential;

  bool essential() const noexcept { return std::isinf(death); }
  double persistence() const noexcept { return death - birth; }

  friend bool operator==(const PersistenceFeature&, const PersistenceFeature&) = default;
};

/// Canonical feature order: (dim, birth, death), essentials last within equal births.
inline bool feature_less(const PersistenceFeature& a, const PersistenceFeature& b) {
  return std::tie(a.dim, a.birth, a.death) < std::tie(b.dim, b.birth, b.death);
}

struct PersistenceDiagram {
  std::vector<PersistenceFeature> features;
  int max_dim = 0;

  /// Features of one homology dimension, optionally without essentials.
  PersistenceDiagram restricted(int dim, bool finite_only = false) const {
    PersistenceDiagram out;
    out.max_dim = dim;
    for (const auto& f : features)
      if (f.dim == dim && !(finite_only && f.essential())) out.features.push_back(f);
    return out;
  }

  void sort() { std::sort(features.begin(), features.end(), feature_less); }

  std::size_t size() const noexcept { return features.size(); }
  bool empty() const noexcept { return features.empty(); }
};

/// One H0 pair: the vertex whose component dies and the edge that kills it.
struct H0Pair {
  std::size_t creator = 0;
  Edge destroyer;
};

/// Simplex pairs behind the finite H0 features, in the same order as the diagram's finite features.
struct PersistencePairing {
  std::vector<H0Pair> pairs;

  std::vector<Edge> destroyer_edges() const {
    std::vector<Edge> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.destroyer);
    return out;
  }
};

struct H0Result {
  PersistenceDiagram diagram;  // finite features in filtration order, then the essential one
  PersistencePairing pairing;
};

/// All n(n-1)/2 edges sorted by (length, i, j) with ranks assigned.
inline std::vector<Edge> sorted_edge_filtration(const DistanceMatrix& m) {
  const std::size_t n = m.size();
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, m(i, j), 0});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.length, a.i, a.j) < std::tie(b.length, b.i, b.j);
  });
  for (std::size_t r = 0; r < edges.size(); ++r) edges[r].rank = r;
  return edges;
}

namespace detail {

/// Union-find whose representative is always the smallest vertex of its set.
class MinRootUnionFind {
 public:
  explicit MinRootUnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) x = std::exchange(parent_[x], root);
    return root;
  }

  /// Links the larger root under the smaller one.
  void link(std::size_t elder, std::size_t younger) { parent_[younger] = elder; }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// 0-dimensional Vietoris-Rips persistence by a Kruskal sweep.
///
/// Merges follow the elder rule: the component whose root vertex has the smaller index
/// survives and the other root becomes the creator of the dying feature. Destroyer edges
/// form the minimum spanning tree under the (length, i, j) order.
inline H0Result h0_persistence(const DistanceMatrix& m) {
  const std::size_t n = m.size();
  H0Result result;
  result.diagram.max_dim = 0;
  if (n == 0) return result;

  detail::MinRootUnionFind uf(n);
  result.pairing.pairs.reserve(n - 1);
  for (const Edge& e : sorted_edge_filtration(m)) {
    const std::size_t ri = uf.find(e.i);
    const std::size_t rj = uf.find(e.j);
    if (ri == rj) continue;
    const auto [elder, younger] = std::minmax(ri, rj);
    uf.link(elder, younger);
    result.diagram.features.push_back({0, 0.0, e.length});
    result.pairing.pairs.push_back({younger, e});
    if (result.pairing.pairs.size() == n - 1) break;
  }
  result.diagram.features.push_back({0, 0.0, kEssential});
  return result;
}

inline constexpr std::size_t kDefaultSimplexBudget = 5'000'000;

namespace detail {

/// Simplices of one dimension stored as a flat vertex array.
struct SimplexTable {
  std::size_t width = 0;  // vertices per simplex
  std::vector<std::uint32_t> vertices;
  std::vector<double> diameters;

  std::size_t size() const { return diameters.size(); }
  const std::uint32_t* at(std::size_t k) const { return vertices.data() + k * width; }
};

/// Enumerates cliques of the scale-thresholded graph up to `max_vertices` vertices.
class CliqueEnumerator {
 public:
  CliqueEnumerator(const DistanceMatrix& m, double max_scale) : m_(m), neighbors_(m.size()) {
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = i + 1; j < m.size(); ++j)
        if (m(i, j) <= max_scale) neighbors_[i].push_back(static_cast<std::uint32_t>(j));
  }

  /// Calls visit(vertices, count, diameter) for every clique with 1..max_vertices vertices;
  /// visit returns false to stop the enumeration.
  template <typename Visit>
  void enumerate(std::size_t max_vertices, Visit&& visit) const {
    std::vector<std::uint32_t> stack;
    for (std::uint32_t v = 0; v < neighbors_.size(); ++v) {
      stack.assign(1, v);
      if (!extend(stack, 0.0, neighbors_[v], max_vertices, visit)) return;
    }
  }

 private:
  template <typename Visit>
  bool extend(std::vector<std::uint32_t>& stack, double diameter, const std::vector<std::uint32_t>& candidates,
              std::size_t max_vertices, Visit& visit) const {
    if (!visit(stack.data(), stack.size(), diameter)) return false;
    if (stack.size() == max_vertices) return true;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const std::uint32_t w = candidates[c];
      double diam = diameter;
      for (const std::uint32_t u : stack) diam = std::max(diam, m_(u, w));
      std::vector<std::uint32_t> next;
      if (stack.size() + 1 < max_vertices) {
        const auto& nw = neighbors_[w];
        std::set_intersection(candidates.begin() + static_cast<std::ptrdiff_t>(c) + 1, candidates.end(),
                              nw.begin(), nw.end(), std::back_inserter(next));
      }
      stack.push_back(w);
      const bool keep_going = extend(stack, diam, next, max_vertices, visit);
      stack.pop_back();
      if (!keep_going) return false;
    }
    return true;
  }

  const DistanceMatrix& m_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

/// Base-n positional key of a simplex; unique within one dimension.
inline std::uint64_t simplex_key(const std::uint32_t* v, std::size_t count, std::size_t n) {
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < count; ++k) key = key * n + v[k];
  return key;
}

}  // namespace detail

/// Vietoris-Rips persistence in dimensions 0..max_dim over Z/2.
///
/// Simplices up to dimension max_dim+1 with diameter <= max_scale are ordered by
/// (diameter, dimension, lexicographic vertex tuple) and the boundary matrix is reduced
/// column by column. Zero-persistence pairs are dropped. Throws BudgetExceeded when the
/// simplex count exceeds `budget`.
inline PersistenceDiagram rips_persistence(const DistanceMatrix& m, int max_dim, double max_scale = kEssential,
                                           std::size_t budget = kDefaultSimplexBudget) {
  if (max_dim < 0) throw InvalidArgument("max_dim must be non-negative");
  const std::size_t n = m.size();
  const std::size_t max_vertices = static_cast<std::size_t>(max_dim) + 2;
  if (n > 0 && max_vertices > 1) {
    // simplex keys are base-n numbers with max_vertices digits
    const double key_space = std::pow(static_cast<double>(n), static_cast<double>(max_vertices));
    if (key_space >= 1.8e19) throw BudgetExceeded("cloud too large for dimension " + std::to_string(max_dim));
  }
  detail::CliqueEnumerator cliques(m, max_scale);

  // Counting pass, so an oversized request fails before any allocation.
  const std::size_t count_cap = budget > std::numeric_limits<std::size_t>::max() / 16 ? budget : budget * 16;
  std::size_t total = 0;
  cliques.enumerate(max_vertices, [&](const std::uint32_t*, std::size_t, double) { return ++total <= count_cap; });
  if (total > budget) {
    const std::string required = total > count_cap ? "more than " + std::to_string(count_cap) : std::to_string(total);
    throw BudgetExceeded("Rips complex needs " + required + " simplices, budget allows " + std::to_string(budget));
  }

  std::vector<detail::SimplexTable> tables(max_vertices);
  for (std::size_t k = 0; k < max_vertices; ++k) tables[k].width = k + 1;
  cliques.enumerate(max_vertices, [&](const std::uint32_t* v, std::size_t count, double diam) {
    auto& t = tables[count - 1];
    t.vertices.insert(t.vertices.end(), v, v + count);
    t.diameters.push_back(diam);
    return true;
  });

  // Filtration order over (dimension, index-within-table) handles.
  struct Handle {
    std::uint32_t dim;
    std::uint32_t index;
  };
  std::vector<Handle> order;
  order.reserve(total);
  for (std::uint32_t k = 0; k < max_vertices; ++k)
    for (std::uint32_t s = 0; s < tables[k].size(); ++s) order.push_back({k, s});
  std::sort(order.begin(), order.end(), [&](const Handle& a, const Handle& b) {
    const double da = tables[a.dim].diameters[a.index];
    const double db = tables[b.dim].diameters[b.index];
    if (da != db) return da < db;
    if (a.dim != b.dim) return a.dim < b.dim;
    const auto* va = tables[a.dim].at(a.index);
    const auto* vb = tables[b.dim].at(b.index);
    return std::lexicographical_compare(va, va + a.dim + 1, vb, vb + b.dim + 1);
  });

  std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> position(max_vertices);
  for (std::uint32_t p = 0; p < order.size(); ++p) {
    const auto& h = order[p];
    position[h.dim].emplace(detail::simplex_key(tables[h.dim].at(h.index), h.dim + 1, n), p);
  }
  auto diameter_at = [&](std::uint32_t p) { return tables[order[p].dim].diameters[order[p].index]; };

  // Standard column reduction; columns hold row positions in ascending order.
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> pivot_owner(order.size(), kNone);
  std::vector<std::vector<std::uint32_t>> reduced(order.size());
  std::vector<bool> is_positive(order.size(), true);
  std::vector<std::uint32_t> face(max_vertices);
  std::vector<std::uint32_t> scratch;

  PersistenceDiagram diagram;
  diagram.max_dim = max_dim;
  for (std::uint32_t col = 0; col < order.size(); ++col) {
    const auto& h = order[col];
    if (h.dim == 0) continue;
    const auto* v = tables[h.dim].at(h.index);
    auto& column = reduced[col];
    for (std::size_t drop = 0; drop <= h.dim; ++drop) {
      std::size_t w = 0;
      for (std::size_t k = 0; k <= h.dim; ++k)
        if (k != drop) face[w++] = v[k];
      column.push_back(position[h.dim - 1].at(detail::simplex_key(face.data(), h.dim, n)));
    }
    std::sort(column.begin(), column.end());
    while (!column.empty() && pivot_owner[column.back()] != kNone) {
      const auto& other = reduced[pivot_owner[column.back()]];
      scratch.clear();
      std::set_symmetric_difference(column.begin(), column.end(), other.begin(), other.end(),
                                    std::back_inserter(scratch));
      column.swap(scratch);
    }
    if (column.empty()) continue;
    const std::uint32_t low = column.back();
    pivot_owner[low] = col;
    is_positive[col] = false;
    const double birth = diameter_at(low);
    const double death = diameter_at(col);
    if (death > birth) diagram.features.push_back({static_cast<int>(order[low].dim), birth, death});
  }
  for (std::uint32_t p = 0; p < order.size(); ++p) {
    const auto dim = order[p].dim;
    if (is_positive[p] && pivot_owner[p] == kNone && dim <= static_cast<std::uint32_t>(max_dim))
      diagram.features.push_back({static_cast<int>(dim), diameter_at(p), kEssential});
  }
  diagram.sort();
  return diagram;
}

/// Number of features alive at `scale` (birth <= scale < death) per dimension; dimensions
/// with no live feature are absent from the map.
inline std::map<int, std::size_t> betti_counts(const PersistenceDiagram& d, double scale) {
  if (!(scale >= 0.0)) throw InvalidArgument("scale must be non-negative");
  std::map<int, std::size_t> counts;
  for (const auto& f : d.features)
    if (f.birth <= scale && scale < f.death) ++counts[f.dim];
  return counts;
}

// Diagram text format: one "dim birth death" per line, "inf" for essential deaths.

inline void write_diagram(std::ostream& out, const PersistenceDiagram& d) {
  auto sorted = d;
  sorted.sort();
  for (const auto& f : sorted.features)
    out << f.dim << ' ' << format_real(f.birth) << ' ' << format_real(f.death) << '\n';
}

inline PersistenceDiagram parse_diagram(std::istream& in) {
  PersistenceDiagram d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream fields{std::string(t)};
    std::string dim_s, birth_s, death_s, extra;
    if (!(fields >> dim_s >> birth_s >> death_s) || (fields >> extra))
      throw ParseError("expected 'dim birth death'", line_no);
    int dim = 0;
    const auto dr = std::from_chars(dim_s.data(), dim_s.data() + dim_s.size(), dim);
    if (dr.ec != std::errc{} || dr.ptr != dim_s.data() + dim_s.size() || dim < 0)
      throw ParseError("invalid dimension '" + dim_s + "'", line_no, 1);
    PersistenceFeature f{dim, 0.0, kEssential};
    if (!detail::parse_double(birth_s, f.birth)) throw ParseError("invalid birth '" + birth_s + "'", line_no, 2);
    if (death_s != "inf" && !detail::parse_double(death_s, f.death))
      throw ParseError("invalid death '" + death_s + "'", line_no, 3);
    if (f.death < f.birth) throw ParseError("death precedes birth", line_no, 3);
    d.max_dim = std::max(d.max_dim, dim);
    d.features.push_back(f);
  }
  if (in.bad()) throw Error("I/O failure while reading diagram");
  d.sort();
  return d;
}

}  // namespace topoalign
