#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <random>

#include "topoalign/error.hpp"
#include "topoalign/pointcloud.hpp"

namespace topoalign::train {

/// Parameters of the encoder d -> hidden (tanh) -> latent and the class-center matrix.
/// The same type holds gradients and momentum buffers.
struct EncoderParams {
  RowMatrix w1;         // hidden x d
  Eigen::VectorXd b1;   // hidden
  RowMatrix w2;         // latent x hidden
  Eigen::VectorXd b2;   // latent
  RowMatrix centers;    // K x latent, unit rows

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(w2.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(centers.rows()); }

  /// Zero-valued parameters with the same shapes.
  EncoderParams zeros_like() const {
    return {RowMatrix::Zero(w1.rows(), w1.cols()), Eigen::VectorXd::Zero(b1.size()),
            RowMatrix::Zero(w2.rows(), w2.cols()), Eigen::VectorXd::Zero(b2.size()),
            RowMatrix::Zero(centers.rows(), centers.cols())};
  }

  /// Calls fn(data, size) on each parameter block in a fixed order.
  template <typename Fn>
  void for_each_block(Fn&& fn) {
    fn(w1.data(), static_cast<std::size_t>(w1.size()));
    fn(b1.data(), static_cast<std::size_t>(b1.size()));
    fn(w2.data(), static_cast<std::size_t>(w2.size()));
    fn(b2.data(), static_cast<std::size_t>(b2.size()));
    fn(centers.data(), static_cast<std::size_t>(centers.size()));
  }

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + centers.size());
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && centers.allFinite();
  }

  void normalize_centers() {
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      const double norm = centers.row(k).norm();
      if (norm == 0.0) throw Error("class center collapsed to zero");
      centers.row(k) /= norm;
    }
  }
};

/// Gaussian fan-in initialisation with zero biases; class centers are random unit rows.
template <typename Rng>
EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
                           std::size_t num_classes, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1 || latent_dim < 1 || num_classes < 2)
    throw InvalidArgument("encoder needs positive widths and at least two classes");
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](RowMatrix& m, double sd) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = sd * normal(rng);
  };
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  const auto l = static_cast<Eigen::Index>(latent_dim);
  EncoderParams p;
  p.w1.resize(h, static_cast<Eigen::Index>(input_dim));
  p.w2.resize(l, h);
  p.centers.resize(static_cast<Eigen::Index>(num_classes), l);
  fill(p.w1, 1.0 / std::sqrt(static_cast<double>(input_dim)));
  fill(p.w2, 1.0 / std::sqrt(static_cast<double>(hidden_dim)));
  fill(p.centers, 1.0);
  p.b1 = Eigen::VectorXd::Zero(h);
  p.b2 = Eigen::VectorXd::Zero(l);
  p.normalize_centers();
  return p;
}

/// Activations kept for the backward pass.
struct EncoderActivations {
  RowMatrix hidden;  // B x hidden, after tanh
  RowMatrix latent;  // B x latent
};

inline EncoderActivations encode(const EncoderParams& p, const RowMatrix& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != p.input_dim())
    throw InvalidArgument("input dimension does not match the encoder");
  EncoderActivations a;
  a.hidden = ((inputs * p.w1.transpose()).rowwise() + p.b1.transpose()).array().tanh();
  a.latent = (a.hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
  return a;
}

/// Accumulates encoder-weight gradients given dLoss/dLatent; leaves grad.centers untouched.
inline void encode_backward(const EncoderParams& p, const RowMatrix& inputs, const EncoderActivations& a,
                            const RowMatrix& d_latent, EncoderParams& grad) {
  grad.w2 += d_latent.transpose() * a.hidden;
  grad.b2 += d_latent.colwise().sum().transpose();
  const RowMatrix d_pre = (d_latent * p.w2).array() * (1.0 - a.hidden.array().square());
  grad.w1 += d_pre.transpose() * inputs;
  grad.b1 += d_pre.colwise().sum().transpose();
}

}  // namespace topoalign::train
