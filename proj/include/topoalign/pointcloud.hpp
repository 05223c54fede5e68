#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "topoalign/error.hpp"

namespace topoalign {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// An ordered set of n points in R^d, one point per row.
class PointCloud {
 public:
  PointCloud() = default;

  explicit PointCloud(RowMatrix points) : points_(std::move(points)) {
    if (points_.rows() < 1 || points_.cols() < 1)
      throw InvalidArgument("point cloud needs at least one point of dimension >= 1");
    if (!points_.allFinite()) throw InvalidArgument("point cloud has non-finite coordinates");
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }

  const RowMatrix& points() const noexcept { return points_; }
  auto point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }

 private:
  RowMatrix points_;
};

/// Dense symmetric matrix of pairwise Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  /// Adopts `entries` once they pass the metric checks below.
  explicit DistanceMatrix(RowMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw InvalidArgument("distance matrix must be square");
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (entries_(i, i) != 0.0) throw InvalidArgument("distance matrix diagonal must be zero");
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = entries_(i, j);
        if (!std::isfinite(v) || v < 0.0 || v != entries_(j, i))
          throw InvalidArgument("distance matrix entries must be finite, non-negative and symmetric");
      }
    }
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  const RowMatrix& entries() const noexcept { return entries_; }

 private:
  RowMatrix entries_;
};

inline DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const auto& p = cloud.points();
  const Eigen::Index n = p.rows();
  RowMatrix m = RowMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (p.row(i) - p.row(j)).norm();
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return DistanceMatrix(std::move(m));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Strict decimal parse of one field; rejects trailing junk and non-finite values.
inline bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

/// Splits a comma-separated line and parses every field, reporting the failing column.
inline std::vector<double> parse_csv_numbers(std::string_view line, std::size_t line_no) {
  std::vector<double> values;
  std::size_t column = 1;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start);
    double v = 0.0;
    if (!parse_double(field, v))
      throw ParseError("non-numeric field '" + std::string(trim(field)) + "'", line_no, column);
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
    ++column;
  }
  return values;
}

/// Invokes `on_row(line_no, fields)` for every data row; skips blank and '#' lines.
template <typename OnRow>
void for_each_csv_row(std::istream& in, OnRow&& on_row) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    on_row(line_no, parse_csv_numbers(t, line_no));
  }
  if (in.bad()) throw Error("I/O failure while reading input");
}

}  // namespace detail

/// Parses the CSV point-cloud format: one point per row, comma separated.
inline PointCloud parse_point_cloud(std::istream& in) {
  std::vector<double> flat;
  std::size_t dim = 0;
  std::size_t rows = 0;
  detail::for_each_csv_row(in, [&](std::size_t line_no, std::vector<double> values) {
    if (rows == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw ParseError("ragged row: expected " + std::to_string(dim) + " fields, found " +
                           std::to_string(values.size()),
                       line_no);
    }
    flat.insert(flat.end(), values.begin(), values.end());
    ++rows;
  });
  if (rows == 0) throw ParseError("empty point cloud file", 1);
  RowMatrix m = Eigen::Map<RowMatrix>(flat.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(dim));
  return PointCloud(std::move(m));
}

inline PointCloud load_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_point_cloud(in);
}

/// Writes a cloud in the CSV format read by load_point_cloud (round-trip exact).
inline void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
  char buf[32];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = 0; j < cloud.dim(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, cloud.points()(i, j));
      if (j) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

/// A numeric record of arbitrary shape stored row-major; an empty shape is a scalar.
struct Record {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t element_count() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }
};

/// Flattens same-shaped records into the rows of a point cloud.
inline PointCloud flatten_inputs(std::span<const Record> records) {
  if (records.empty()) throw InvalidArgument("flatten_inputs needs at least one record");
  const auto& shape = records.front().shape;
  const std::size_t d = records.front().element_count();
  RowMatrix m(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.shape != shape) throw InvalidArgument("record " + std::to_string(i) + " shape mismatch");
    if (r.values.size() != d)
      throw InvalidArgument("record " + std::to_string(i) + " value count does not match its shape");
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.values[j];
  }
  return PointCloud(std::move(m));
}

}  // namespace topoalign
