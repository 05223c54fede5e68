#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "topoalign/alignment.hpp"

namespace {

using namespace topoalign;

/// Loss with both pairings frozen at their values for `z0`.
struct FrozenIsa {
  DistanceMatrix m_x;
  PersistencePairing gamma_x, gamma_z;

  FrozenIsa(const PointCloud& x, const PointCloud& z0)
      : m_x(pairwise_distances(x)),
        gamma_x(h0_persistence(m_x).pairing),
        gamma_z(h0_persistence(pairwise_distances(z0)).pairing) {}

  double loss(const PointCloud& z) const {
    const auto m_z = pairwise_distances(z);
    return isa_loss({m_x, m_z, gamma_x, gamma_z});
  }

  RowMatrix grad(const PointCloud& z) const {
    const auto m_z = pairwise_distances(z);
    return isa_loss_grad({m_x, m_z, gamma_x, gamma_z}, z);
  }
};

TEST(IsaLoss, IdenticalCloudsGiveZero) {
  std::mt19937_64 rng(50);
  const auto x = oracle::random_cloud(rng, 10, 3);
  EXPECT_EQ(structure_discrepancy(x, x), 0.0);
  const FrozenIsa f(x, x);
  EXPECT_EQ(f.grad(x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(IsaLoss, DoubledLineCloud) {
  const auto x = oracle::cloud_from({{0}, {1}, {3}});
  const auto z = oracle::cloud_from({{0}, {2}, {6}});
  EXPECT_NEAR(structure_discrepancy(x, z), 5.0, 1e-12);
}

TEST(IsaLoss, RigidMotionGivesZero) {
  std::mt19937_64 rng(51);
  const auto x = oracle::random_cloud(rng, 8, 2);
  const double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const RowMatrix z = (x.points() * rot.transpose()).rowwise() + Eigen::RowVector2d(3.0, -1.0);
  EXPECT_NEAR(structure_discrepancy(x, PointCloud(z)), 0.0, 1e-20);
}

TEST(IsaLoss, NonNegativeAndSymmetric) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = oracle::random_cloud(rng, 3 + trial % 9, 3);
    const auto z = oracle::random_cloud(rng, x.size(), 2);
    const auto m_x = pairwise_distances(x);
    const auto m_z = pairwise_distances(z);
    const auto g_x = h0_persistence(m_x).pairing;
    const auto g_z = h0_persistence(m_z).pairing;
    const IsaContext ctx{m_x, m_z, g_x, g_z};
    EXPECT_GE(isa_loss(ctx), 0.0);
    EXPECT_EQ(isa_loss(ctx), isa_loss(ctx.swapped()));
    EXPECT_EQ(structure_discrepancy(x, z), structure_discrepancy(z, x));
  }
}

TEST(IsaLoss, SizeMismatchIsRejected) {
  const auto x = oracle::cloud_from({{0}, {1}, {3}});
  const auto z = oracle::cloud_from({{0}, {1}});
  EXPECT_THROW(structure_discrepancy(x, z), InvalidArgument);
}

TEST(IsaGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(53);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + trial % 10;
    const auto x = oracle::random_cloud(rng, n, 1 + trial % 4);
    const auto z = oracle::random_cloud(rng, n, 1 + trial % 3);
    const FrozenIsa f(x, z);
    const RowMatrix analytic = f.grad(z);
    RowMatrix numeric(analytic.rows(), analytic.cols());
    for (Eigen::Index i = 0; i < numeric.rows(); ++i)
      for (Eigen::Index j = 0; j < numeric.cols(); ++j) {
        RowMatrix plus = z.points(), minus = z.points();
        plus(i, j) += h;
        minus(i, j) -= h;
        numeric(i, j) = (f.loss(PointCloud(plus)) - f.loss(PointCloud(minus))) / (2.0 * h);
      }
    const std::vector<double> a(analytic.data(), analytic.data() + analytic.size());
    const std::vector<double> b(numeric.data(), numeric.data() + numeric.size());
    EXPECT_LE(oracle::relative_error(a, b), 1e-5) << "trial " << trial;
  }
}

TEST(IsaGradient, CoincidentLatentPointsContributeZero) {
  const auto x = oracle::cloud_from({{0}, {1}, {3}});
  const auto z = oracle::cloud_from({{0, 0}, {0, 0}, {1, 1}});
  const FrozenIsa f(x, z);
  const RowMatrix g = f.grad(z);
  EXPECT_TRUE(g.allFinite());
}

TEST(IsaGradient, DescentNeverIncreasesDiscrepancy) {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> gap(0.2, 2.0), stretch(0.5, 3.0);
  for (int instance = 0; instance < 20; ++instance) {
    // Line clouds whose latent copy keeps the point order, with every gap rescaled.
    const std::size_t n = 3 + instance % 8;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    RowMatrix xs(static_cast<Eigen::Index>(n), 1), zs(static_cast<Eigen::Index>(n), 1);
    double xpos = 0.0, zpos = 0.0;
    for (const auto i : order) {
      xs(static_cast<Eigen::Index>(i), 0) = xpos;
      zs(static_cast<Eigen::Index>(i), 0) = zpos;
      const double g = gap(rng);
      xpos += g;
      zpos += g * stretch(rng);
    }
    const PointCloud x(xs);
    PointCloud z(zs);
    double previous = structure_discrepancy(x, z);
    for (int step = 0; step < 100; ++step) {
      const FrozenIsa f(x, z);
      z = PointCloud(z.points() - 1e-2 * f.grad(z));
      const double now = structure_discrepancy(x, z);
      ASSERT_LE(now, previous + 1e-12) << "instance " << instance << " step " << step;
      previous = now;
    }
  }
}

}  // namespace
