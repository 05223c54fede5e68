#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles/oracles.hpp"
#include "topoalign/sde.hpp"

namespace {

using namespace topoalign;

void expect_monotone_trace(const GumParams& g) {
  for (std::size_t k = 1; k < g.log_likelihood_trace.size(); ++k)
    EXPECT_GE(g.log_likelihood_trace[k], g.log_likelihood_trace[k - 1] - 1e-10) << "iteration " << k;
  EXPECT_GE(g.pi, 0.0);
  EXPECT_LE(g.pi, 1.0);
  EXPECT_GE(g.sigma, kSigmaFloor);
  EXPECT_GE(g.omega, kOmegaFloor);
}

TEST(Entropy, ClosedForms) {
  const std::vector<double> one_hot = {0, 1, 0};
  const std::vector<double> uniform = {0.25, 0.25, 0.25, 0.25};
  const std::vector<double> half = {0.5, 0.5, 0, 0};
  EXPECT_EQ(entropy(one_hot), 0.0);
  EXPECT_NEAR(entropy(uniform), std::log(4.0), 1e-15);
  EXPECT_NEAR(entropy(half), std::log(2.0), 1e-15);
}

TEST(Entropy, RejectsNonDistributions) {
  const std::vector<double> bad_sum = {0.5, 0.6};
  const std::vector<double> negative = {1.5, -0.5};
  EXPECT_THROW(entropy(bad_sum), InvalidArgument);
  EXPECT_THROW(entropy(negative), InvalidArgument);
}

TEST(GumPosterior, NoUniformComponent) {
  GumParams g;
  g.pi = 1.0;
  g.sigma = 0.3;
  g.omega = 2.0;
  for (const double e : {0.0, 0.5, 1.9}) EXPECT_EQ(gum_posterior(e, g), 0.0);
}

TEST(GumPosterior, EqualMixtureAtZero) {
  GumParams g;
  g.pi = 0.5;
  g.sigma = 1.0;
  g.omega = 1.0;
  EXPECT_NEAR(gum_posterior(0.0, g), 0.5562, 5e-5);
  const double closed = 0.5 / (0.5 * 2.0 / std::sqrt(2.0 * std::numbers::pi) + 0.5);
  EXPECT_NEAR(gum_posterior(0.0, g), closed, 1e-15);
}

TEST(GumPosterior, ZeroOutsideTheUniformSupport) {
  GumParams g;
  g.pi = 0.3;
  g.sigma = 0.1;
  g.omega = 1.0;
  EXPECT_EQ(gum_posterior(1.0001, g), 0.0);
  EXPECT_THROW(gum_posterior(-0.1, g), InvalidArgument);
}

TEST(GumPosterior, MonotoneOnTheSupport) {
  for (const auto& [pi, sigma, omega] : {std::tuple{0.8, 0.04, 2.0}, std::tuple{0.3, 1.0, 1.0},
                                         std::tuple{0.99, 0.5, 5.0}}) {
    GumParams g;
    g.pi = pi;
    g.sigma = sigma;
    g.omega = omega;
    double previous = gum_posterior(0.0, g);
    for (int k = 1; k < 1000; ++k) {
      const double h = gum_posterior(omega * k / 999.0, g);
      ASSERT_GE(h, previous);
      ASSERT_LE(h, 1.0);
      previous = h;
    }
  }
}

TEST(GumFit, SeededMixtureRecoversTheWeight) {
  const auto e = oracle::gum_sample(5, 5000, 0.8, 0.04, 2.0);
  const auto g = gum_fit(e);
  expect_monotone_trace(g);
  EXPECT_GE(g.pi, 0.7);
  EXPECT_LE(g.pi, 0.9);
  const auto grid = oracle::gum_grid_search(e);
  EXPECT_NEAR(g.pi, grid.pi, 0.05);
}

TEST(GumFit, PureHalfGaussian) {
  const auto e = oracle::gum_sample(6, 5000, 1.0, 0.04, 2.0);
  const auto g = gum_fit(e);
  expect_monotone_trace(g);
  EXPECT_GE(g.pi, 0.95);
}

TEST(GumFit, TwoEqualSamples) {
  const std::vector<double> e = {0.1, 0.1};
  const auto g = gum_fit(e);
  expect_monotone_trace(g);
  EXPECT_TRUE(std::isfinite(g.log_likelihood));
  EXPECT_FALSE(g.degenerate);
}

TEST(GumFit, AllZerosIsDegenerate) {
  const std::vector<double> e(10, 0.0);
  const auto g = gum_fit(e);
  EXPECT_TRUE(g.degenerate);
  EXPECT_EQ(g.pi, 1.0);
  EXPECT_EQ(g.sigma, kSigmaFloor);
  EXPECT_EQ(g.omega, kOmegaFloor);
}

TEST(GumFit, RejectsBadInput) {
  EXPECT_THROW(gum_fit(std::vector<double>{0.3}), InvalidArgument);
  EXPECT_THROW(gum_fit(std::vector<double>{0.3, -1.0}), InvalidArgument);
}

TEST(GumFit, LikelihoodNeverDecreasesAcrossManySamples) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const double pi = 0.5 + 0.5 * static_cast<double>(seed % 5) / 4.0;
    const auto e = oracle::gum_sample(100 + seed, 20 + 30 * (seed % 7), pi, 0.01 + 0.05 * (seed % 3), 1.0 + seed % 4);
    expect_monotone_trace(gum_fit(e));
  }
}

TEST(GumFit, Deterministic) {
  const auto e = oracle::gum_sample(9, 300, 0.7, 0.05, 1.5);
  const auto a = gum_fit(e);
  const auto b = gum_fit(e);
  EXPECT_EQ(a.pi, b.pi);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.omega, b.omega);
  EXPECT_EQ(a.log_likelihood_trace, b.log_likelihood_trace);
}

TEST(StructureDamageScore, Examples) {
  EXPECT_EQ(structure_damage_score(0.0, 1.0, 1.0).sds, 0.0);
  EXPECT_EQ(structure_damage_score(1.0, 0.0, 1.0).sds, 2.0);
  EXPECT_NEAR(structure_damage_score(0.5, 0.3, 2.0).sds, 1.575, 1e-15);
}

TEST(StructureDamageScore, MonotoneInBothArguments) {
  for (const double lambda : {0.5, 1.0, 2.0}) {
    for (int a = 0; a < 100; ++a)
      for (int b = 0; b < 100; ++b) {
        const double h = a / 99.0, g = b / 99.0;
        const double here = structure_damage_score(h, g, lambda).sds;
        if (a + 1 < 100) {
          ASSERT_LE(here, structure_damage_score((a + 1) / 99.0, g, lambda).sds);
        }
        if (b + 1 < 100) {
          ASSERT_GE(here, structure_damage_score(h, (b + 1) / 99.0, lambda).sds);
        }
      }
  }
}

TEST(StructureDamageScore, HardMisclassifiedOutranksEasyCorrect) {
  const auto e = oracle::gum_sample(12, 500, 0.8, 0.04, 2.0);
  const auto g = gum_fit(e);
  const double easy = structure_damage_score(gum_posterior(0.05, g), 0.95, 1.0).sds;
  const double hard = structure_damage_score(gum_posterior(1.5, g), 0.10, 1.0).sds;
  EXPECT_GE(hard, easy);
}

TEST(WeightedLoss, Examples) {
  SampleScore zero{0.0, 1.0, 0.0, 0.0};
  SampleScore unit{0.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(weighted_classification_loss(zero, 7.0), 0.0);
  EXPECT_EQ(weighted_classification_loss(unit, 7.0), 7.0);
  EXPECT_NEAR(weighted_classification_loss(structure_damage_score(0.5, 0.3, 2.0), 2.0), 3.15, 1e-14);
}

}  // namespace
