// Betti numbers of a noisy sampled circle and sphere across a range of scales.
//
//   betti_profile [points-per-shape] [noise] [seed]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>

#include "topoalign/topoalign.hpp"

namespace {

using topoalign::RowMatrix;

RowMatrix circle(std::size_t n, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, noise);
  RowMatrix pts(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts(i, 0) = std::cos(t) + jitter(rng);
    pts(i, 1) = std::sin(t) + jitter(rng);
  }
  return pts;
}

RowMatrix sphere(std::size_t n, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0), jitter(0.0, noise);
  RowMatrix pts(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    v.normalize();
    for (int j = 0; j < 3; ++j) pts(i, j) = v(j) + jitter(rng);
  }
  return pts;
}

void profile(const char* name, const RowMatrix& pts, int max_dim) {
  const auto m = topoalign::pairwise_distances(topoalign::PointCloud(pts));
  const auto diagram = topoalign::rips_persistence(m, max_dim);
  std::printf("%s (%td points, %zu diagram features)\n", name, pts.rows(), diagram.size());
  std::printf("  scale   b0   b1   b2\n");
  for (double scale = 0.0; scale <= 2.0001; scale += 0.2) {
    const auto b = topoalign::betti_counts(diagram, scale);
    auto at = [&](int d) { return b.contains(d) ? b.at(d) : std::size_t{0}; };
    std::printf("  %5.2f %4zu %4zu %4zu\n", scale, at(0), at(1), at(2));
  }
  double longest = 0.0;
  for (const auto& f : diagram.restricted(max_dim, true).features) longest = std::max(longest, f.persistence());
  std::printf("  most persistent H%d interval: %.3f\n\n", max_dim, longest);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;
  const double noise = argc > 2 ? std::strtod(argv[2], nullptr) : 0.03;
  std::mt19937_64 rng(argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 5);
  try {
    profile("circle", circle(n, noise, rng), 1);
    profile("sphere", sphere(n, noise, rng), 2);
  } catch (const topoalign::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
