#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "topoalign/error.hpp"

namespace topoalign::train {

/// Zeroes a random contiguous run covering a fraction of the coordinates.
struct MaskOp {
  double min_fraction = 0.1;
  double max_fraction = 0.3;
};

/// Moving average over a window of 2*radius+1 coordinates, edges replicated.
struct SmoothOp {
  std::size_t radius = 1;
};

/// Replaces each of `groups` contiguous coordinate groups by its mean.
struct CollapseOp {
  std::size_t groups = 4;
};

/// Per-coordinate affine map a*x + b with a in [1-scale, 1+scale], b in [-shift, shift].
struct JitterOp {
  double scale = 0.2;
  double shift = 0.2;
};

using PerturbationOp = std::variant<MaskOp, SmoothOp, CollapseOp, JitterOp>;

inline std::vector<PerturbationOp> default_perturbations() { return {MaskOp{}, SmoothOp{}, CollapseOp{}, JitterOp{}}; }

using Vector = Eigen::VectorXd;

/// Applies one operation; `rng` supplies the op's random parameters.
template <typename Rng>
Vector apply_perturbation(const PerturbationOp& op, const Vector& x, Rng& rng) {
  const auto d = x.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return std::visit(
      [&](const auto& o) -> Vector {
        using Op = std::decay_t<decltype(o)>;
        Vector y = x;
        if constexpr (std::is_same_v<Op, MaskOp>) {
          if (!(0.0 <= o.min_fraction && o.min_fraction <= o.max_fraction && o.max_fraction <= 1.0))
            throw InvalidArgument("mask fractions must satisfy 0 <= min <= max <= 1");
          const double frac = o.min_fraction + (o.max_fraction - o.min_fraction) * unit(rng);
          const auto len = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(frac * d)), 0, d);
          std::uniform_int_distribution<Eigen::Index> start_dist(0, d - len);
          y.segment(start_dist(rng), len).setZero();
        } else if constexpr (std::is_same_v<Op, SmoothOp>) {
          const auto r = static_cast<Eigen::Index>(o.radius);
          for (Eigen::Index j = 0; j < d; ++j) {
            double sum = 0.0;
            for (Eigen::Index k = j - r; k <= j + r; ++k) sum += x(std::clamp<Eigen::Index>(k, 0, d - 1));
            y(j) = sum / static_cast<double>(2 * r + 1);
          }
        } else if constexpr (std::is_same_v<Op, CollapseOp>) {
          if (o.groups < 1) throw InvalidArgument("collapse needs at least one group");
          const auto groups = std::min<Eigen::Index>(static_cast<Eigen::Index>(o.groups), d);
          for (Eigen::Index g = 0; g < groups; ++g) {
            const Eigen::Index begin = g * d / groups;
            const Eigen::Index end = (g + 1) * d / groups;
            y.segment(begin, end - begin).setConstant(x.segment(begin, end - begin).mean());
          }
        } else {
          if (!(o.scale >= 0.0 && o.shift >= 0.0)) throw InvalidArgument("jitter ranges must be non-negative");
          for (Eigen::Index j = 0; j < d; ++j) {
            const double a = 1.0 + o.scale * (2.0 * unit(rng) - 1.0);
            const double b = o.shift * (2.0 * unit(rng) - 1.0);
            y(j) = a * x(j) + b;
          }
        }
        return y;
      },
      op);
}

/// With probability xi applies one uniformly chosen op from `ops`, otherwise returns x.
/// The coin is drawn even when xi is 0.
template <typename Rng>
Vector rsp_perturb(const Vector& x, std::span<const PerturbationOp> ops, double xi, Rng& rng) {
  if (ops.empty()) throw InvalidArgument("perturbation list is empty");
  if (!(xi >= 0.0 && xi <= 1.0)) throw InvalidArgument("perturbation probability must lie in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (!(unit(rng) < xi)) return x;
  std::uniform_int_distribution<std::size_t> pick(0, ops.size() - 1);
  return apply_perturbation(ops[pick(rng)], x, rng);
}

}  // namespace topoalign::train
