#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "topoalign/error.hpp"

namespace topoalign {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method, O(n^3)).
///
/// `cost(r, c)` must be finite. Returns the column assigned to each row.
template <typename Real, typename CostFn>
std::vector<std::size_t> solve_assignment(std::size_t n, CostFn&& cost) {
  constexpr Real kInf = std::numeric_limits<Real>::infinity();
  // 1-based potentials; column 0 is a virtual start column.
  std::vector<Real> u(n + 1, Real{0}), v(n + 1, Real{0});
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<Real> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t r = 1; r <= n; ++r) {
    row_of[0] = r;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = row_of[col0];
      Real delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const Real slack = static_cast<Real>(cost(r0 - 1, c - 1)) - u[r0] - v[c];
        if (slack < min_slack[c]) {
          min_slack[c] = slack;
          way[c] = col0;
        }
        if (min_slack[c] < delta) {
          delta = min_slack[c];
          col1 = c;
        }
      }
      if (col1 == 0) throw InvalidArgument("assignment cost matrix has non-finite entries");
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[row_of[c]] += delta;
          v[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col0 = col1;
    } while (row_of[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      row_of[col0] = row_of[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t c = 1; c <= n; ++c)
    if (row_of[c] != 0) col_of_row[row_of[c] - 1] = c - 1;
  return col_of_row;
}

/// True when the bipartite graph on n+n vertices has a perfect matching (Kuhn's augmenting paths).
/// On success `match_of_left` holds the right vertex matched to each left vertex.
template <typename Adjacent>
bool has_perfect_matching(std::size_t n, Adjacent&& adjacent, std::vector<std::size_t>& match_of_left) {
  constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_of_right(n, kFree);
  std::vector<char> seen(n);

  auto augment = [&](auto&& self, std::size_t left) -> bool {
    for (std::size_t right = 0; right < n; ++right) {
      if (seen[right] || !adjacent(left, right)) continue;
      seen[right] = 1;
      if (match_of_right[right] == kFree || self(self, match_of_right[right])) {
        match_of_right[right] = left;
        return true;
      }
    }
    return false;
  };

  for (std::size_t left = 0; left < n; ++left) {
    std::fill(seen.begin(), seen.end(), 0);
    if (!augment(augment, left)) return false;
  }
  match_of_left.assign(n, kFree);
  for (std::size_t right = 0; right < n; ++right) match_of_left[match_of_right[right]] = right;
  return true;
}

}  // namespace topoalign
