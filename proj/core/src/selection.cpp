#include "adass/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adass {

Vec loss_deltas(const Vec& current, const Vec& cached) {
  if (current.size() != cached.size()) {
    throw std::invalid_argument("loss vectors differ in length (" + std::to_string(current.size()) + " vs " +
                                std::to_string(cached.size()) + ")");
  }
  Vec deltas = (current - cached).cwiseAbs();
  if (!deltas.allFinite()) throw std::invalid_argument("non-finite loss change in selection");
  return deltas;
}

IndexList rank_by_delta(const Vec& deltas) {
  IndexList order = iota_indices(static_cast<std::size_t>(deltas.size()));
  std::stable_sort(order.begin(), order.end(), [&deltas](std::size_t a, std::size_t b) {
    return deltas[static_cast<Eigen::Index>(a)] > deltas[static_cast<Eigen::Index>(b)];
  });
  return order;
}

IndexList select_by_delta(const Vec& deltas, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("selection fraction alpha must lie in (0, 1]");
  if (!deltas.allFinite()) throw std::invalid_argument("non-finite loss change in selection");
  const auto n = static_cast<std::size_t>(deltas.size());
  if (n == 0) throw std::invalid_argument("selection over an empty sample set");
  if (alpha == 1.0) return iota_indices(n);

  const IndexList order = rank_by_delta(deltas);
  // Total summed in rank order so the full prefix always meets the threshold.
  double total = 0.0;
  for (std::size_t i : order) total += deltas[static_cast<Eigen::Index>(i)];
  if (total == 0.0) return iota_indices(n);

  const double threshold = alpha * total;
  double covered = 0.0;
  std::size_t count = 0;
  while (count < n) {
    covered += deltas[static_cast<Eigen::Index>(order[count])];
    ++count;
    if (covered >= threshold) break;
  }
  IndexList selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(selected.begin(), selected.end());
  return selected;
}

IndexList select_subset(const Vec& current, const Vec& cached, double alpha) {
  return select_by_delta(loss_deltas(current, cached), alpha);
}

ApproxLipschitz approx_lipschitz(const Vec& current, const Vec& cached, double step_norm, double tol) {
  Vec deltas = loss_deltas(current, cached);
  if (!(step_norm > tol)) return {std::move(deltas), true};
  return {deltas / step_norm, false};
}

}  // namespace adass
