#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/pointcloud.hpp"

namespace topoalign::train {

/// Points with integer class labels in [0, num_classes).
struct LabeledData {
  PointCloud x;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }

  /// Rows [begin, end) as a new data set; keeps num_classes.
  LabeledData slice(std::size_t begin, std::size_t end) const {
    if (!(begin < end && end <= size())) throw InvalidArgument("invalid data slice");
    LabeledData out;
    out.x = PointCloud(x.points().middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
    out.num_classes = num_classes;
    return out;
  }
};

/// Parses `label, x_1, ..., x_d` rows; labels must be non-negative integers.
inline LabeledData parse_labeled_data(std::istream& in) {
  std::vector<double> flat;
  std::vector<std::size_t> labels;
  std::size_t width = 0;
  topoalign::detail::for_each_csv_row(in, [&](std::size_t line_no, std::vector<double> values) {
    if (labels.empty()) {
      if (values.size() < 2) throw ParseError("row needs a label and at least one coordinate", line_no);
      width = values.size();
    } else if (values.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " fields, found " +
                           std::to_string(values.size()),
                       line_no);
    }
    const double label = values.front();
    if (label < 0 || label != std::floor(label) || label > 1e9)
      throw ParseError("label must be a non-negative integer", line_no, 1);
    labels.push_back(static_cast<std::size_t>(label));
    flat.insert(flat.end(), values.begin() + 1, values.end());
  });
  if (labels.empty()) throw ParseError("empty data set", 1);
  LabeledData data;
  data.x = PointCloud(Eigen::Map<RowMatrix>(flat.data(), static_cast<Eigen::Index>(labels.size()),
                                            static_cast<Eigen::Index>(width - 1)));
  data.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  data.labels = std::move(labels);
  return data;
}

inline LabeledData load_labeled_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_labeled_data(in);
}

inline void write_labeled_data(std::ostream& out, const LabeledData& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (std::size_t j = 0; j < data.x.dim(); ++j) out << ',' << format_real(data.x.points()(i, j));
    out << '\n';
  }
}

/// Gaussian blobs, one per class, with a fraction of high-variance "hard" samples.
struct BlobSpec {
  std::size_t classes = 8;
  std::size_t dim = 16;
  std::size_t samples = 5000;
  double center_scale = 1.0;   // std-dev of center coordinates
  double noise = 0.8;          // std-dev of easy samples around their center
  double hard_fraction = 0.2;
  double hard_noise = 2.0;     // std-dev of hard samples
};

/// Draws a blob data set. Labels cycle 0..K-1 and rows are shuffled, so any
/// contiguous split is class balanced in expectation.
inline LabeledData make_blobs(const BlobSpec& spec, std::uint64_t seed) {
  if (spec.classes < 1 || spec.dim < 1 || spec.samples < 1) throw InvalidArgument("empty blob specification");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RowMatrix centers(static_cast<Eigen::Index>(spec.classes), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index k = 0; k < centers.rows(); ++k)
    for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(k, j) = spec.center_scale * normal(rng);

  std::vector<std::size_t> order(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  RowMatrix points(static_cast<Eigen::Index>(spec.samples), static_cast<Eigen::Index>(spec.dim));
  std::vector<std::size_t> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t label = order[i] % spec.classes;
    const double sd = unit(rng) < spec.hard_fraction ? spec.hard_noise : spec.noise;
    labels[i] = label;
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      points(static_cast<Eigen::Index>(i), j) = centers(static_cast<Eigen::Index>(label), j) + sd * normal(rng);
  }
  LabeledData data;
  data.x = PointCloud(std::move(points));
  data.labels = std::move(labels);
  data.num_classes = spec.classes;
  return data;
}

}  // namespace topoalign::train
