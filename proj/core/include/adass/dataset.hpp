#pragma once

#include <filesystem>
#include <string>

#include "adass/types.hpp"

namespace adass {

/// Training samples stored row-wise: row i of `features` is x_i.
///
/// Regression datasets have num_classes() == 0 and real targets. For
/// classification the targets hold integral class indices in
/// [0, num_classes).
class Dataset {
 public:
  Dataset() = default;
  Dataset(RowMatrix features, Vec targets, std::size_t num_classes = 0);

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t num_classes() const { return num_classes_; }
  bool is_classification() const { return num_classes_ > 0; }

  const RowMatrix& features() const { return features_; }
  const Vec& targets() const { return targets_; }

  auto row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }
  double target(std::size_t i) const { return targets_[static_cast<Eigen::Index>(i)]; }
  std::size_t label(std::size_t i) const;

  /// Rows selected by `indices`, in that order.
  Dataset subset(const IndexList& indices) const;

 private:
  RowMatrix features_;
  Vec targets_;
  std::size_t num_classes_ = 0;
};

/// Reads a CSV with a header row; the last column is the target and the
/// remaining columns are features. `num_classes` > 0 marks the target as a
/// class index.
Dataset load_csv_dataset(const std::filesystem::path& path, std::size_t num_classes = 0);

void write_csv_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace adass
