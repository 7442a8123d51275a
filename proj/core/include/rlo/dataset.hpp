#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "rlo/geometry.hpp"

namespace rlo {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Labelled samples, one row per sample.
struct Dataset {
  RowMatrix features;
  std::vector<int> labels;

  Index n_rows() const { return features.rows(); }
  Index n_cols() const { return features.cols(); }
  /// 1 + max label; 0 for an empty dataset.
  int num_classes() const;
  /// Throws DatasetError on negative labels, NaN features or shape mismatch.
  void validate() const;
};

/// Headerless CSV: comma-separated decimal floats, label in the last column.
/// Malformed rows raise DatasetError carrying the 1-based line number.
Dataset parse_csv_dataset(std::istream& in);
Dataset load_csv_dataset(const std::filesystem::path& path);

/// Two isotropic Gaussian blobs centered at +/- (separation / 2) * e_0, unit
/// variance, `rows_per_class` samples each, rows interleaved by class.
Dataset make_two_gaussians(Index rows_per_class, Index dim, double separation,
                           std::uint64_t seed);

}  // namespace rlo
