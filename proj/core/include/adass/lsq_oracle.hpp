#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "adass/dataset.hpp"
#include "adass/synthetic.hpp"

namespace adass::lsq {

/// Eigenvalue threshold for full rank, relative to the largest eigenvalue.
inline constexpr double kRankTolerance = 1e-10;

/// Thrown when a Gram matrix is numerically rank-deficient. `subset_size`
/// is the number of rows used; `min_full_rank` the smallest prefix length
/// known to be full rank (0 when unknown or never).
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, std::size_t subset_size, std::size_t min_full_rank)
      : std::runtime_error(what), subset_size_(subset_size), min_full_rank_(min_full_rank) {}
  std::size_t subset_size() const { return subset_size_; }
  std::size_t min_full_rank() const { return min_full_rank_; }

 private:
  std::size_t subset_size_;
  std::size_t min_full_rank_;
};

/// w* = (X X^T)^{-1} X y over all samples.
Vec solve_full(const Dataset& data);

struct SubsetSolution {
  IndexList indices;
  Vec w;
  double min_eigenvalue = 0.0;  ///< b_m of X_m X_m^T
  bool full_rank = false;
};

/// Least-squares fit on the rows in `indices`. The Gram matrix is accumulated
/// in ascending index order, so the full index set reproduces solve_full
/// bit-for-bit.
SubsetSolution solve_subset(const Dataset& data, const IndexList& indices);

/// Smallest m such that the first m entries of `order` give a full-rank Gram
/// matrix; 0 when even the full order is rank-deficient.
std::size_t min_full_rank_prefix(const Dataset& data, const IndexList& order);

/// ||LHS - RHS|| / (||LHS|| + ||RHS|| + eps) for
/// (X P P^T X^T)(w* - w_m) = X (I - P P^T)(y - X^T w*).
double lemma2_residual(const Dataset& data, const IndexList& indices);

/// Per-sample L_i = ||grad f_i(w)|| = |y_i - x_i^T w| * ||x_i||.
Vec lipschitz_at(const Dataset& data, const Vec& w);
/// f_i(w) = 1/2 (y_i - x_i^T w)^2.
Vec losses_at(const Dataset& data, const Vec& w);

struct Theorem1Report {
  std::size_t m = 0;
  double gap_sq = 0.0;      ///< ||w* - w_m||^2
  double loss_bound = 0.0;  ///< (n a^2 / b^2) sum_{k>m} f_{i_k}(w*)
  double lip_bound = 0.0;   ///< (1 / b^2) (sum_{k>m} L_{i_k})^2
  double a = 0.0;           ///< max_i ||x_i||
  double b = 0.0;           ///< smallest eigenvalue of the prefix Gram matrix
  /// Violations smaller than 1e-9 * bound are ignored.
  bool loss_bound_holds() const;
  bool lip_bound_holds() const;
};

/// Both subset-gap bounds for the first m entries of `order` (a permutation
/// of [n]). Throws RankDeficientError when the prefix is not full rank.
Theorem1Report theorem1_report(const Dataset& data, const IndexList& order, std::size_t m);

enum class Criterion { Lipschitz, Loss, Random };
std::string_view to_string(Criterion criterion);

/// Permutation of [n] for a criterion: descending L_i or f_i at w* with ties
/// by ascending index, or a uniform shuffle drawn from `seed`.
IndexList criterion_order(const Dataset& data, const Vec& w_star, Criterion criterion, std::uint64_t seed);

struct CriteriaRow {
  Criterion criterion = Criterion::Random;
  double ratio = 0.0;
  double mean_gap = 0.0;  ///< mean over seeds of ||w* - w_m||
  double std_gap = 0.0;   ///< sample standard deviation
  std::size_t n_seeds = 0;
  std::size_t skipped = 0;  ///< rank-deficient subsets
};

struct CriteriaConfig {
  FeatureDist dist = FeatureDist::Uniform;
  std::size_t n = 1000;
  std::size_t d = 10;
  double noise_sigma = 0.1;
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::uint64_t> seeds;  ///< defaults to 1..20 when empty
  std::size_t threads = 1;
};

/// Subset gap curves for the three selection criteria. Rows are ordered by
/// criterion (lipschitz, loss, random), then ratio. m = ceil(ratio * n).
std::vector<CriteriaRow> criteria_experiment(const CriteriaConfig& cfg);

}  // namespace adass::lsq
