#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "topoalign/error.hpp"

namespace topoalign {

/// Shannon entropy in nats, with 0 log 0 = 0.
inline double entropy(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("entropy of an empty distribution");
  double total = 0.0;
  for (const double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("probabilities do not sum to 1");
  double h = 0.0;
  for (const double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return std::max(h, 0.0);
}

/// Classifier output for one sample with its cached entropy and ground-truth probability.
struct PredictionRecord {
  std::vector<double> probs;
  std::size_t label = 0;
  double entropy = 0.0;
  double gt_prob = 0.0;
};

inline PredictionRecord make_prediction_record(std::vector<double> probs, std::size_t label) {
  if (label >= probs.size()) throw InvalidArgument("label outside the class range");
  PredictionRecord r;
  r.entropy = entropy(probs);
  r.gt_prob = probs[label];
  r.label = label;
  r.probs = std::move(probs);
  return r;
}

inline constexpr double kSigmaFloor = 1e-8;
inline constexpr double kOmegaFloor = 1e-8;

/// Gaussian-uniform mixture over entropies: weight `pi` on a half-Gaussian of variance
/// `sigma`, the rest on Uniform(0, omega).
struct GumParams {
  double pi = 1.0;
  double sigma = kSigmaFloor;
  double omega = kOmegaFloor;
  double log_likelihood = 0.0;  // of the sign-mirrored sample
  std::size_t iterations = 0;
  bool degenerate = false;
  std::vector<double> log_likelihood_trace;  // initial value, then one entry per iteration
};

namespace detail {

inline double gaussian_density(double x, double variance) {
  return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

}  // namespace detail

/// Posterior probability that a sample with entropy `e` comes from the uniform (hard) component.
inline double gum_posterior(double e, const GumParams& params) {
  if (!(e >= 0.0)) throw InvalidArgument("entropy must be non-negative");
  const double uniform = e <= params.omega ? (1.0 - params.pi) / params.omega : 0.0;
  if (uniform == 0.0) return 0.0;
  const double gaussian = params.pi * 2.0 * detail::gaussian_density(e, params.sigma);
  return uniform / (gaussian + uniform);
}

struct GumFitOptions {
  std::size_t max_iter = 100;
  double tol = 1e-6;
};

namespace detail {

/// Log-likelihood of the symmetric (sign-mirrored) mixture, which depends on |E| only.
inline double mirrored_log_likelihood(std::span<const double> e, double pi, double sigma, double omega) {
  double ll = 0.0;
  for (const double v : e) {
    const double uniform = v <= omega ? (1.0 - pi) / (2.0 * omega) : 0.0;
    ll += std::log(pi * gaussian_density(v, sigma) + uniform);
  }
  return ll;
}

}  // namespace detail

/// Fits the Gaussian-uniform mixture to a batch of entropies by EM.
///
/// Every entropy enters twice, as +E and -E with weight 1/2, so the Gaussian is centred
/// at zero and the uniform spans [-omega, omega]. Each iteration computes the posterior
/// h_i, then updates
///   pi    = sum(1 - h) / n
///   sigma = sum((1 - h) E^2) / sum(1 - h)
///   omega = sqrt(3 (eta2 - eta1^2)),  eta_k = sum(h / (1 - pi) E^k) / sum(1 - h).
/// The moment-matched omega is kept only if it does not lower the likelihood; otherwise
/// omega stays put and the step reduces to an exact M-step in (pi, sigma), which cannot
/// decrease it. Stops when the likelihood changes by less than `tol`.
inline GumParams gum_fit(std::span<const double> entropies, const GumFitOptions& options = {}) {
  if (entropies.size() < 2) throw InvalidArgument("gum_fit needs at least two samples");
  for (const double e : entropies)
    if (!(e >= 0.0) || std::isinf(e)) throw InvalidArgument("entropies must be finite and non-negative");

  GumParams params;
  if (std::all_of(entropies.begin(), entropies.end(), [](double e) { return e == 0.0; })) {
    params.degenerate = true;
    params.log_likelihood = detail::mirrored_log_likelihood(entropies, params.pi, params.sigma, params.omega);
    params.log_likelihood_trace.push_back(params.log_likelihood);
    return params;
  }

  // Mirrored sample: (value, weight) pairs.
  struct Mirrored {
    double value;
    double weight;
  };
  std::vector<Mirrored> sample;
  sample.reserve(2 * entropies.size());
  for (const double e : entropies) {
    sample.push_back({e, 0.5});
    sample.push_back({-e, 0.5});
  }
  const double n = static_cast<double>(entropies.size());

  double second_moment = 0.0;
  double max_abs = 0.0;
  for (const auto& s : sample) {
    second_moment += s.weight * s.value * s.value;
    max_abs = std::max(max_abs, std::abs(s.value));
  }
  params.pi = 0.5;
  params.sigma = std::max(second_moment / n, kSigmaFloor);
  params.omega = std::max(max_abs, kOmegaFloor);
  params.log_likelihood = detail::mirrored_log_likelihood(entropies, params.pi, params.sigma, params.omega);
  params.log_likelihood_trace.push_back(params.log_likelihood);

  std::vector<double> h(sample.size());
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    // E-step
    const double uniform_density = (1.0 - params.pi) / (2.0 * params.omega);
    for (std::size_t k = 0; k < sample.size(); ++k) {
      const double v = sample[k].value;
      const double u = std::abs(v) <= params.omega ? uniform_density : 0.0;
      const double g = params.pi * detail::gaussian_density(v, params.sigma);
      h[k] = u == 0.0 ? 0.0 : u / (g + u);
    }

    // M-step
    double easy_mass = 0.0;
    double easy_second = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
      const double w = sample[k].weight * (1.0 - h[k]);
      easy_mass += w;
      easy_second += w * sample[k].value * sample[k].value;
    }
    const double pi = std::clamp(easy_mass / n, 0.0, 1.0);
    const double sigma = easy_mass > 0.0 ? std::max(easy_second / easy_mass, kSigmaFloor) : params.sigma;

    double omega = params.omega;
    if (pi < 1.0 && easy_mass > 0.0) {
      double eta1 = 0.0;
      double eta2 = 0.0;
      for (std::size_t k = 0; k < sample.size(); ++k) {
        const double w = sample[k].weight * h[k] / (1.0 - pi);
        eta1 += w * sample[k].value;
        eta2 += w * sample[k].value * sample[k].value;
      }
      eta1 /= easy_mass;
      eta2 /= easy_mass;
      omega = std::max(std::sqrt(std::max(3.0 * (eta2 - eta1 * eta1), 0.0)), kOmegaFloor);
    }

    double ll = detail::mirrored_log_likelihood(entropies, pi, sigma, omega);
    if (!(ll >= params.log_likelihood)) {
      omega = params.omega;
      ll = detail::mirrored_log_likelihood(entropies, pi, sigma, omega);
    }

    const double change = ll - params.log_likelihood;
    params.pi = pi;
    params.sigma = sigma;
    params.omega = omega;
    params.log_likelihood = ll;
    params.iterations = it;
    params.log_likelihood_trace.push_back(ll);
    if (std::abs(change) < options.tol) break;
  }
  return params;
}

/// Per-sample weight built from the hard-sample posterior and the ground-truth probability.
struct SampleScore {
  double h = 0.0;
  double w1 = 1.0;  // (1 + h)^lambda
  double w2 = 1.0;  // 1 - gt_prob
  double sds = 1.0;  // w1 * w2
};

inline SampleScore structure_damage_score(double h, double gt_prob, double lambda) {
  if (!(h >= 0.0 && h <= 1.0)) throw InvalidArgument("posterior outside [0, 1]");
  if (!(gt_prob >= 0.0 && gt_prob <= 1.0)) throw InvalidArgument("ground-truth probability outside [0, 1]");
  if (!(lambda >= 0.0) || std::isinf(lambda)) throw InvalidArgument("lambda must be finite and non-negative");
  SampleScore s;
  s.h = h;
  s.w1 = std::pow(1.0 + h, lambda);
  s.w2 = 1.0 - gt_prob;
  s.sds = s.w1 * s.w2;
  return s;
}

inline double weighted_classification_loss(const SampleScore& score, double arc_loss) {
  if (!(arc_loss >= 0.0)) throw InvalidArgument("classification loss must be non-negative");
  return score.sds * arc_loss;
}

}  // namespace topoalign
