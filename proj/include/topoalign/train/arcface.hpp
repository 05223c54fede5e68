#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "topoalign/error.hpp"
#include "topoalign/pointcloud.hpp"

namespace topoalign::train {

/// Forward quantities of the additive-angular-margin softmax for one sample.
struct ArcFaceEval {
  double loss = 0.0;
  Eigen::VectorXd probs;    // softmax of the margin logits
  Eigen::VectorXd cosines;  // <f / |f|, W_k>
  Eigen::VectorXd unit_feature;
  double feature_norm = 0.0;
};

/// Margin softmax loss: logits are s*cos(theta_y + m) for the label and s*cos(theta_k)
/// otherwise, where theta_k is the angle between the feature and class center k.
inline ArcFaceEval arcface_loss(const Eigen::VectorXd& feature, std::size_t label, const RowMatrix& centers, double s,
                                double m) {
  const auto k_count = centers.rows();
  if (label >= static_cast<std::size_t>(k_count)) throw InvalidArgument("label outside the class range");
  ArcFaceEval e;
  e.feature_norm = feature.norm();
  if (!(e.feature_norm > 0.0)) throw InvalidArgument("zero-norm feature");
  e.unit_feature = feature / e.feature_norm;
  e.cosines = (centers * e.unit_feature).cwiseMax(-1.0).cwiseMin(1.0);

  const auto y = static_cast<Eigen::Index>(label);
  Eigen::VectorXd logits = s * e.cosines;
  const double c = e.cosines(y);
  const double sine = std::sqrt(std::max(0.0, 1.0 - c * c));
  logits(y) = s * (c * std::cos(m) - sine * std::sin(m));

  const double top = logits.maxCoeff();
  const Eigen::VectorXd shifted = (logits.array() - top).exp();
  const double z = shifted.sum();
  e.probs = shifted / z;
  e.loss = std::log(z) - (logits(y) - top);
  return e;
}

/// Adds weight * dLoss/dFeature to `d_feature` and weight * dLoss/dCenters to `d_centers`.
///
/// At |cos| = 1 the margin term is not differentiable; the derivative of cos(theta+m)
/// with respect to cos(theta) is then taken as cos(m).
inline void arcface_backward(const ArcFaceEval& e, std::size_t label, const RowMatrix& centers, double s, double m,
                             double weight, Eigen::Ref<Eigen::VectorXd> d_feature, RowMatrix& d_centers) {
  const auto y = static_cast<Eigen::Index>(label);
  Eigen::VectorXd d_cos = s * e.probs;  // dLoss/dlogit_k = p_k - [k == y]
  d_cos(y) -= s;
  const double c = e.cosines(y);
  const double sine = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double margin_slope = sine > 1e-12 ? std::cos(m) + std::sin(m) * c / sine : std::cos(m);
  d_cos(y) *= margin_slope;
  d_cos *= weight;

  d_centers += d_cos * e.unit_feature.transpose();
  const Eigen::VectorXd d_unit = centers.transpose() * d_cos;
  d_feature += (d_unit - e.unit_feature * e.unit_feature.dot(d_unit)) / e.feature_norm;
}

}  // namespace topoalign::train
