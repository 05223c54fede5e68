#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "topoalign/alignment.hpp"
#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/pointcloud.hpp"
#include "topoalign/sde.hpp"
#include "topoalign/train/arcface.hpp"
#include "topoalign/train/config.hpp"
#include "topoalign/train/dataset.hpp"
#include "topoalign/train/encoder.hpp"
#include "topoalign/train/perturb.hpp"

namespace topoalign::train {

/// Everything that evolves during training.
struct TrainState {
  EncoderParams params;
  EncoderParams velocity;
  std::mt19937_64 rng;
  std::vector<PerturbationOp> ops = default_perturbations();
};

/// Initial state; the parameter draw depends only on the seed and the shapes.
inline TrainState make_train_state(std::size_t input_dim, std::size_t num_classes, const TrainConfig& cfg) {
  cfg.validate();
  TrainState st;
  st.rng.seed(cfg.rng_seed);
  st.params = init_encoder(input_dim, cfg.hidden_dim, cfg.latent_dim, num_classes, st.rng);
  st.velocity = st.params.zeros_like();
  return st;
}

/// Per-step quantities held constant while differentiating the objective.
struct FrozenBatch {
  RowMatrix inputs;                  // possibly perturbed samples fed to the encoder
  std::vector<std::size_t> labels;
  std::vector<double> weights;       // SDS per sample (1 when reweighting is off)
  DistanceMatrix m_x;                // distances of the original, unperturbed batch
  PersistencePairing gamma_x;
  PersistencePairing gamma_z;
  double alpha = 0.0;                // effective alignment weight
};

struct ObjectiveValue {
  double l_cls = 0.0;
  double l_sa = 0.0;
  double total = 0.0;
};

/// Combined objective mean_i(w_i * L_arc,i) + alpha * L_sa and, when `grad` is given,
/// its exact gradient with respect to every parameter (grad is overwritten).
inline ObjectiveValue evaluate_objective(const EncoderParams& params, const FrozenBatch& batch, const TrainConfig& cfg,
                                         EncoderParams* grad = nullptr) {
  const auto acts = encode(params, batch.inputs);
  const auto n = acts.latent.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  RowMatrix d_latent;
  if (grad) {
    *grad = params.zeros_like();
    d_latent = RowMatrix::Zero(n, acts.latent.cols());
  }

  ObjectiveValue v;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd f = acts.latent.row(i).transpose();
    const auto label = batch.labels[static_cast<std::size_t>(i)];
    const double w = batch.weights[static_cast<std::size_t>(i)];
    const auto e = arcface_loss(f, label, params.centers, cfg.s, cfg.m);
    v.l_cls += w * e.loss * inv_n;
    if (grad) {
      Eigen::VectorXd d_f = Eigen::VectorXd::Zero(f.size());
      arcface_backward(e, label, params.centers, cfg.s, cfg.m, w * inv_n, d_f, grad->centers);
      d_latent.row(i) += d_f.transpose();
    }
  }

  const PointCloud z(acts.latent);
  const auto m_z = pairwise_distances(z);
  const IsaContext ctx{batch.m_x, m_z, batch.gamma_x, batch.gamma_z};
  v.l_sa = isa_loss(ctx);
  v.total = v.l_cls + batch.alpha * v.l_sa;

  if (grad) {
    if (batch.alpha != 0.0) d_latent += batch.alpha * isa_loss_grad(ctx, z);
    encode_backward(params, batch.inputs, acts, d_latent, *grad);
  }
  return v;
}

struct StepMetrics {
  double l_cls = 0.0;
  double l_sa = 0.0;
  double total = 0.0;
  double omega_mean = 0.0;
  double omega_min = 0.0;
  double omega_max = 0.0;
  std::size_t perturbed = 0;
  GumParams gum;
  bool degenerate_batch = false;  // every input point identical
};

/// Builds the frozen terms for one batch: perturbation, forward pass, SDS weights and pairings.
inline FrozenBatch prepare_batch(const PointCloud& batch_x, std::span<const std::size_t> labels, TrainState& state,
                                 const TrainConfig& cfg, const Components& comp, StepMetrics& metrics) {
  const auto n = static_cast<Eigen::Index>(batch_x.size());
  if (n < 2) throw InvalidArgument("a training batch needs at least two samples");
  if (labels.size() != batch_x.size()) throw InvalidArgument("label count does not match the batch");

  FrozenBatch fb;
  fb.labels.assign(labels.begin(), labels.end());
  fb.inputs = batch_x.points();
  if (comp.rsp) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd x = batch_x.points().row(i).transpose();
      const Eigen::VectorXd y = rsp_perturb(x, state.ops, cfg.xi, state.rng);
      if (y != x) ++metrics.perturbed;
      fb.inputs.row(i) = y.transpose();
    }
  }

  const auto acts = encode(state.params, fb.inputs);
  std::vector<double> entropies(static_cast<std::size_t>(n));
  std::vector<double> gt(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto e = arcface_loss(acts.latent.row(i).transpose(), fb.labels[static_cast<std::size_t>(i)],
                                state.params.centers, cfg.s, cfg.m);
    entropies[static_cast<std::size_t>(i)] =
        entropy(std::span<const double>(e.probs.data(), static_cast<std::size_t>(e.probs.size())));
    gt[static_cast<std::size_t>(i)] = e.probs(static_cast<Eigen::Index>(fb.labels[static_cast<std::size_t>(i)]));
  }
  metrics.gum = gum_fit(entropies);

  fb.weights.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < fb.weights.size(); ++i) {
    const auto score = structure_damage_score(gum_posterior(entropies[i], metrics.gum), gt[i], cfg.lambda);
    fb.weights[i] = (comp.w1 ? score.w1 : 1.0) * (comp.w2 ? score.w2 : 1.0);
  }
  metrics.omega_mean = std::accumulate(fb.weights.begin(), fb.weights.end(), 0.0) / static_cast<double>(n);
  metrics.omega_min = *std::min_element(fb.weights.begin(), fb.weights.end());
  metrics.omega_max = *std::max_element(fb.weights.begin(), fb.weights.end());

  fb.m_x = pairwise_distances(batch_x);
  metrics.degenerate_batch = fb.m_x.entries().maxCoeff() == 0.0;
  fb.gamma_x = h0_persistence(fb.m_x).pairing;
  fb.gamma_z = h0_persistence(pairwise_distances(PointCloud(acts.latent))).pairing;
  fb.alpha = comp.isa ? cfg.alpha : 0.0;
  return fb;
}

/// One optimisation step of the combined objective with SGD and momentum (in place).
inline StepMetrics train_step(const PointCloud& batch_x, std::span<const std::size_t> labels, TrainState& state,
                              const TrainConfig& cfg, const Components& comp) {
  StepMetrics metrics;
  const FrozenBatch fb = prepare_batch(batch_x, labels, state, cfg, comp, metrics);

  EncoderParams grad;
  const auto value = evaluate_objective(state.params, fb, cfg, &grad);
  metrics.l_cls = value.l_cls;
  metrics.l_sa = value.l_sa;
  metrics.total = value.total;

  auto& p = state.params;
  auto& v = state.velocity;
  v.w1 = cfg.momentum * v.w1 + grad.w1;
  v.b1 = cfg.momentum * v.b1 + grad.b1;
  v.w2 = cfg.momentum * v.w2 + grad.w2;
  v.b2 = cfg.momentum * v.b2 + grad.b2;
  v.centers = cfg.momentum * v.centers + grad.centers;
  p.w1 -= cfg.learning_rate * v.w1;
  p.b1 -= cfg.learning_rate * v.b1;
  p.w2 -= cfg.learning_rate * v.w2;
  p.b2 -= cfg.learning_rate * v.b2;
  p.centers -= cfg.learning_rate * v.centers;
  p.normalize_centers();
  if (!p.all_finite()) throw Error("training diverged: non-finite parameters");
  return metrics;
}

/// Latent features of clean (unperturbed) inputs.
inline PointCloud embed(const EncoderParams& params, const PointCloud& x) {
  return PointCloud(encode(params, x.points()).latent);
}

/// Fraction of samples whose nearest class center by cosine is the label.
inline double accuracy(const EncoderParams& params, const LabeledData& data) {
  const auto latent = encode(params, data.x.points()).latent;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < latent.rows(); ++i) {
    Eigen::Index best = 0;
    (params.centers * latent.row(i).transpose()).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

struct EpochRow {
  std::size_t epoch = 0;
  double l_cls = 0.0;
  double l_sa = 0.0;
  double discrepancy_heldout = 0.0;
  double accuracy = 0.0;
  double pi = 0.0;
  double sigma = 0.0;
  double omega = 0.0;
};

struct ExperimentReport {
  std::vector<EpochRow> rows;
  EncoderParams final_params;
};

/// Trains on `train` and records per-epoch held-out structure discrepancy and accuracy.
///
/// Each epoch shuffles the training set and visits it in batches of cfg.batch_size (a
/// trailing batch of fewer than two samples is skipped). Loss and mixture columns are
/// epoch means over steps. The discrepancy is measured on the first batch_size held-out
/// samples, encoded without perturbation.
inline ExperimentReport run_experiment(const LabeledData& train, const LabeledData& heldout, const TrainConfig& cfg,
                                       const Components& comp) {
  cfg.validate();
  if (train.x.dim() != heldout.x.dim()) throw InvalidArgument("train and held-out dimensions differ");
  if (train.size() < 2) throw InvalidArgument("training set needs at least two samples");
  const std::size_t classes = std::max(train.num_classes, heldout.num_classes);
  TrainState state = make_train_state(train.x.dim(), classes, cfg);

  const std::size_t probe_size = std::min(cfg.batch_size, heldout.size());
  const PointCloud probe = heldout.slice(0, probe_size).x;

  ExperimentReport report;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), state.rng);
    EpochRow row;
    row.epoch = epoch;
    std::size_t steps = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      RowMatrix xb(static_cast<Eigen::Index>(end - start), static_cast<Eigen::Index>(train.x.dim()));
      std::vector<std::size_t> yb(end - start);
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = train.x.points().row(static_cast<Eigen::Index>(order[k]));
        yb[k - start] = train.labels[order[k]];
      }
      const auto metrics = train_step(PointCloud(std::move(xb)), yb, state, cfg, comp);
      row.l_cls += metrics.l_cls;
      row.l_sa += metrics.l_sa;
      row.pi += metrics.gum.pi;
      row.sigma += metrics.gum.sigma;
      row.omega += metrics.gum.omega;
      ++steps;
    }
    const double inv = steps ? 1.0 / static_cast<double>(steps) : 0.0;
    row.l_cls *= inv;
    row.l_sa *= inv;
    row.pi *= inv;
    row.sigma *= inv;
    row.omega *= inv;
    row.discrepancy_heldout = structure_discrepancy(probe, embed(state.params, probe));
    row.accuracy = accuracy(state.params, heldout);
    report.rows.push_back(row);
  }
  report.final_params = state.params;
  return report;
}

inline void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "epoch,L_cls,L_sa,discrepancy_heldout,accuracy,pi,sigma,omega\n";
  for (const auto& r : report.rows)
    out << r.epoch << ',' << format_real(r.l_cls) << ',' << format_real(r.l_sa) << ','
        << format_real(r.discrepancy_heldout) << ',' << format_real(r.accuracy) << ',' << format_real(r.pi) << ','
        << format_real(r.sigma) << ',' << format_real(r.omega) << '\n';
}

}  // namespace topoalign::train
