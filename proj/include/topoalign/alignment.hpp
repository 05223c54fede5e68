#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "topoalign/error.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/pointcloud.hpp"

namespace topoalign {

/// The four objects the structure-alignment loss reads: both distance matrices and
/// the H0 pairings that select entries from them. Holds references only.
struct IsaContext {
  const DistanceMatrix& m_x;
  const DistanceMatrix& m_z;
  const PersistencePairing& gamma_x;
  const PersistencePairing& gamma_z;

  void validate() const {
    if (m_x.size() != m_z.size())
      throw InvalidArgument("input and latent distance matrices differ in size (" + std::to_string(m_x.size()) +
                            " vs " + std::to_string(m_z.size()) + ")");
    const std::size_t n = m_x.size();
    for (const auto* g : {&gamma_x, &gamma_z})
      for (const auto& p : g->pairs)
        if (!(p.destroyer.i < p.destroyer.j && p.destroyer.j < n))
          throw InvalidArgument("pairing edge (" + std::to_string(p.destroyer.i) + ", " +
                                std::to_string(p.destroyer.j) + ") out of range for n = " + std::to_string(n));
  }

  /// The same context with the roles of the two spaces exchanged.
  IsaContext swapped() const { return {m_z, m_x, gamma_z, gamma_x}; }
};

/// Half the squared mismatch of distance entries selected by each space's pairing, summed
/// over both selections. Unnormalized.
inline double isa_loss(const IsaContext& ctx) {
  ctx.validate();
  double sum_x = 0.0;
  for (const auto& p : ctx.gamma_x.pairs) {
    const double diff = ctx.m_x(p.destroyer.i, p.destroyer.j) - ctx.m_z(p.destroyer.i, p.destroyer.j);
    sum_x += diff * diff;
  }
  double sum_z = 0.0;
  for (const auto& p : ctx.gamma_z.pairs) {
    const double diff = ctx.m_z(p.destroyer.i, p.destroyer.j) - ctx.m_x(p.destroyer.i, p.destroyer.j);
    sum_z += diff * diff;
  }
  return 0.5 * (sum_x + sum_z);
}

/// Gradient of isa_loss with respect to the latent coordinates, pairings held fixed.
///
/// Requires ctx.m_z == pairwise_distances(z). Selected edges whose latent endpoints
/// coincide contribute zero.
inline RowMatrix isa_loss_grad(const IsaContext& ctx, const PointCloud& z) {
  ctx.validate();
  if (z.size() != ctx.m_z.size()) throw InvalidArgument("latent cloud size does not match its distance matrix");
  const auto& pts = z.points();
  RowMatrix grad = RowMatrix::Zero(pts.rows(), pts.cols());
  auto accumulate = [&](const PersistencePairing& gamma) {
    for (const auto& p : gamma.pairs) {
      const auto i = static_cast<Eigen::Index>(p.destroyer.i);
      const auto j = static_cast<Eigen::Index>(p.destroyer.j);
      const double dz = ctx.m_z(p.destroyer.i, p.destroyer.j);
      if (dz == 0.0) continue;
      const double coef = (dz - ctx.m_x(p.destroyer.i, p.destroyer.j)) / dz;
      grad.row(i) += coef * (pts.row(i) - pts.row(j));
      grad.row(j) -= coef * (pts.row(i) - pts.row(j));
    }
  };
  accumulate(ctx.gamma_x);
  accumulate(ctx.gamma_z);
  return grad;
}

/// Alignment loss between two clouds with freshly computed H0 pairings.
inline double structure_discrepancy(const PointCloud& x, const PointCloud& z) {
  if (x.size() != z.size())
    throw InvalidArgument("clouds differ in size (" + std::to_string(x.size()) + " vs " + std::to_string(z.size()) +
                          ")");
  const auto m_x = pairwise_distances(x);
  const auto m_z = pairwise_distances(z);
  const auto h_x = h0_persistence(m_x);
  const auto h_z = h0_persistence(m_z);
  return isa_loss({m_x, m_z, h_x.pairing, h_z.pairing});
}

}  // namespace topoalign
