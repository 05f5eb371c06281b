#pragma once

#include "adass/types.hpp"

namespace adass {

/// Delta_i = |current_i - cached_i|. Throws on length mismatch or a
/// non-finite difference.
Vec loss_deltas(const Vec& current, const Vec& cached);

/// Indices sorted by descending Delta_i, ties by ascending index.
IndexList rank_by_delta(const Vec& deltas);

/// Smallest rank-prefix S with sum_{i in S} Delta_i >= alpha * sum_i Delta_i.
/// alpha == 1 and a zero total both return [n]. Result is sorted ascending.
IndexList select_subset(const Vec& current, const Vec& cached, double alpha);

/// Same rule on precomputed deltas.
IndexList select_by_delta(const Vec& deltas, double alpha);

struct ApproxLipschitz {
  Vec values;
  bool zero_step = false;  ///< step norm below tolerance: values are raw deltas
};

/// |f_i(w_t) - f_i(w_prev)| / ||w_t - w_prev||, a per-sample local
/// Lipschitz estimate. Ordering always matches rank_by_delta.
ApproxLipschitz approx_lipschitz(const Vec& current, const Vec& cached, double step_norm,
                                 double tol = 1e-14);

}  // namespace adass
