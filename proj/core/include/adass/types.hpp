#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace adass {

using Vec = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexList = std::vector<std::size_t>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Ascending 0..n-1.
IndexList iota_indices(std::size_t n);

}  // namespace adass
