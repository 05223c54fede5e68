#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "topoalign/assignment.hpp"
#include "topoalign/error.hpp"
#include "topoalign/persistence.hpp"

namespace topoalign {

/// Marks a feature matched to the diagonal.
inline constexpr std::size_t kDiagonal = std::numeric_limits<std::size_t>::max();

/// An augmented bijection between two diagrams' finite features.
struct DiagramMatching {
  /// (index into first diagram or kDiagonal, index into second diagram or kDiagonal)
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double cost = 0.0;
};

/// Infinity-norm distance between two diagram points.
inline double point_distance(const PersistenceFeature& a, const PersistenceFeature& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

/// Infinity-norm distance from a point to its projection on the diagonal.
inline double diagonal_distance(const PersistenceFeature& a) { return (a.death - a.birth) / 2.0; }

namespace detail {

/// Finite features of both diagrams, checked to share a single dimension.
inline std::pair<std::vector<PersistenceFeature>, std::vector<PersistenceFeature>> finite_points(
    const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  std::pair<std::vector<PersistenceFeature>, std::vector<PersistenceFeature>> out;
  int dim = -1;
  auto take = [&](const PersistenceDiagram& d, std::vector<PersistenceFeature>& dst) {
    for (const auto& f : d.features) {
      if (dim < 0) dim = f.dim;
      if (f.dim != dim) throw InvalidArgument("diagram distances need diagrams restricted to one dimension");
      if (!f.essential()) dst.push_back(f);
    }
  };
  take(d1, out.first);
  take(d2, out.second);
  return out;
}

/// Square cost over the diagonal-augmented point sets.
///
/// Rows: points of A, then one diagonal slot per point of B.
/// Columns: points of B, then one diagonal slot per point of A.
class AugmentedCost {
 public:
  AugmentedCost(const std::vector<PersistenceFeature>& a, const std::vector<PersistenceFeature>& b) : a_(a), b_(b) {}

  std::size_t size() const { return a_.size() + b_.size(); }

  double operator()(std::size_t row, std::size_t col) const {
    const bool real_row = row < a_.size();
    const bool real_col = col < b_.size();
    if (real_row && real_col) return point_distance(a_[row], b_[col]);
    if (real_row) return diagonal_distance(a_[row]);
    if (real_col) return diagonal_distance(b_[col]);
    return 0.0;
  }

  std::pair<std::size_t, std::size_t> pair_of(std::size_t row, std::size_t col) const {
    return {row < a_.size() ? row : kDiagonal, col < b_.size() ? col : kDiagonal};
  }

 private:
  const std::vector<PersistenceFeature>& a_;
  const std::vector<PersistenceFeature>& b_;
};

inline DiagramMatching to_matching(const AugmentedCost& cost, const std::vector<std::size_t>& col_of_row) {
  DiagramMatching m;
  for (std::size_t r = 0; r < col_of_row.size(); ++r) {
    const auto p = cost.pair_of(r, col_of_row[r]);
    if (p.first != kDiagonal || p.second != kDiagonal) m.pairs.push_back(p);
  }
  return m;
}

}  // namespace detail

/// Optimal p-Wasserstein matching; essentials are ignored.
inline DiagramMatching wasserstein_matching(const PersistenceDiagram& d1, const PersistenceDiagram& d2, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw InvalidArgument("Wasserstein order p must be finite and >= 1");
  const auto [a, b] = detail::finite_points(d1, d2);
  const detail::AugmentedCost cost(a, b);
  const auto assignment =
      solve_assignment<double>(cost.size(), [&](std::size_t r, std::size_t c) { return std::pow(cost(r, c), p); });
  auto matching = detail::to_matching(cost, assignment);
  double total = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) total += std::pow(cost(r, assignment[r]), p);
  matching.cost = std::pow(total, 1.0 / p);
  return matching;
}

inline double wasserstein_distance(const PersistenceDiagram& d1, const PersistenceDiagram& d2, double p) {
  return wasserstein_matching(d1, d2, p).cost;
}

/// Optimal bottleneck matching by binary search over the candidate costs; essentials are ignored.
inline DiagramMatching bottleneck_matching(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  const auto [a, b] = detail::finite_points(d1, d2);
  const detail::AugmentedCost cost(a, b);
  const std::size_t n = cost.size();

  std::vector<double> candidates{0.0};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) candidates.push_back(cost(r, c));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::size_t> assignment;
  auto feasible = [&](double threshold, std::vector<std::size_t>& out) {
    return has_perfect_matching(n, [&](std::size_t r, std::size_t c) { return cost(r, c) <= threshold; }, out);
  };
  // The largest candidate always admits a perfect matching.
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<std::size_t> trial;
    if (feasible(candidates[mid], trial))
      hi = mid;
    else
      lo = mid + 1;
  }
  feasible(candidates[lo], assignment);
  auto matching = detail::to_matching(cost, assignment);
  matching.cost = candidates[lo];
  return matching;
}

inline double bottleneck_distance(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  return bottleneck_matching(d1, d2).cost;
}

}  // namespace topoalign
