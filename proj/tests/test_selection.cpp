#include <doctest.h>

#include <cmath>
#include <random>

#include "adass/selection.hpp"

using namespace adass;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

// Brute force: shortest prefix of the descending order (ties by index) that
// reaches alpha of the total.
IndexList prefix_oracle(const Vec& deltas, double alpha) {
  const auto n = static_cast<std::size_t>(deltas.size());
  IndexList order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double da = deltas[static_cast<Eigen::Index>(order[a])];
      const double db = deltas[static_cast<Eigen::Index>(order[b])];
      if (db > da || (db == da && order[b] < order[a])) std::swap(order[a], order[b]);
    }
  }
  double total = 0.0;
  for (std::size_t i : order) total += deltas[static_cast<Eigen::Index>(i)];
  if (alpha == 1.0 || total == 0.0) return order;
  double covered = 0.0;
  IndexList out;
  for (std::size_t i : order) {
    covered += deltas[static_cast<Eigen::Index>(i)];
    out.push_back(i);
    if (covered >= alpha * total) break;
  }
  return out;
}

IndexList sorted(IndexList s) {
  std::sort(s.begin(), s.end());
  return s;
}

double mass(const Vec& deltas, const IndexList& s) {
  double m = 0.0;
  for (std::size_t i : s) m += deltas[static_cast<Eigen::Index>(i)];
  return m;
}

}  // namespace

TEST_CASE("selection examples") {
  CHECK(select_subset(vec({3, 2, 1}), vec({0, 0, 0}), 0.8) == IndexList{0, 1});
  CHECK(select_subset(vec({1, 2, 3}), vec({4, 4, 4}), 0.8) == IndexList{0, 1});
  CHECK(select_subset(vec({5, 1, 7}), vec({0, 0, 0}), 1.0) == IndexList{0, 1, 2});
  CHECK(select_subset(vec({1, 1, 1, 1}), vec({0, 0, 0, 0}), 0.5) == IndexList{0, 1});
  CHECK(select_subset(vec({2, 2, 2}), vec({2, 2, 2}), 0.3) == IndexList{0, 1, 2});
  CHECK(select_by_delta(vec({0, 0, 9, 0}), 0.5) == IndexList{2});
}

TEST_CASE("selection errors") {
  CHECK_THROWS_AS(select_subset(vec({1, 2}), vec({1, 2, 3}), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(select_subset(vec({1, NAN}), vec({1, 2}), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(select_subset(vec({1, INFINITY}), vec({1, 2}), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(select_by_delta(vec({1, 2}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(select_by_delta(vec({1, 2}), 1.5), std::invalid_argument);
  CHECK_THROWS_AS(select_by_delta(Vec(0), 0.5), std::invalid_argument);
}

TEST_CASE("selection matches the prefix oracle and is minimal") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size_dist(1, 40);
  std::uniform_real_distribution<double> alpha_dist(0.05, 1.0);
  // Small integer deltas force many ties.
  std::uniform_int_distribution<int> delta_dist(0, 6);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = size_dist(rng);
    Vec current(n), cached(n);
    for (int i = 0; i < n; ++i) {
      cached[i] = delta_dist(rng);
      current[i] = cached[i] + (trial % 2 ? 1.0 : -1.0) * delta_dist(rng);
    }
    const double alpha = trial % 10 == 0 ? 1.0 : alpha_dist(rng);
    const Vec deltas = (current - cached).cwiseAbs();
    const IndexList got = select_subset(current, cached, alpha);
    CHECK(got == sorted(prefix_oracle(deltas, alpha)));
    CHECK(std::is_sorted(got.begin(), got.end()));
    CHECK(std::adjacent_find(got.begin(), got.end()) == got.end());

    const double total = deltas.sum();
    CHECK(mass(deltas, got) >= alpha * total);
    if (alpha < 1.0 && total > 0.0) {
      // No smaller set reaches the threshold: dropping the smallest member falls short.
      double smallest = kInfinity;
      for (std::size_t i : got) smallest = std::min(smallest, deltas[static_cast<Eigen::Index>(i)]);
      CHECK(mass(deltas, got) - smallest < alpha * total);
    }
  }
}

TEST_CASE("ranking breaks ties by ascending index") {
  CHECK(rank_by_delta(vec({1, 3, 3, 0, 1})) == IndexList{1, 2, 0, 4, 3});
  CHECK(select_by_delta(vec({1, 1, 1, 1, 1}), 0.4) == IndexList{0, 1});
}

TEST_CASE("approximate Lipschitz values") {
  const Vec current = vec({1.0, 4.0, 2.5});
  const Vec cached = vec({2.0, 1.0, 2.5});

  SUBCASE("values are deltas over the step") {
    const auto lip = approx_lipschitz(current, cached, 0.5);
    CHECK_FALSE(lip.zero_step);
    CHECK(lip.values[0] == doctest::Approx(2.0));
    CHECK(lip.values[1] == doctest::Approx(6.0));
    CHECK(lip.values[2] == 0.0);
  }

  SUBCASE("ordering agrees with delta ranking") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 50; ++k) {
      Vec a(30), b(30);
      for (int i = 0; i < 30; ++i) {
        a[i] = normal(rng);
        b[i] = normal(rng);
      }
      const auto lip = approx_lipschitz(a, b, 0.1 + std::abs(normal(rng)));
      CHECK(rank_by_delta(lip.values) == rank_by_delta(loss_deltas(a, b)));
    }
  }

  SUBCASE("zero step returns raw deltas") {
    const auto lip = approx_lipschitz(current, cached, 0.0);
    CHECK(lip.zero_step);
    CHECK(lip.values == loss_deltas(current, cached));
  }

  SUBCASE("unchanged losses give zeros") {
    const auto lip = approx_lipschitz(current, current, 1.0);
    CHECK(lip.values.isZero(0.0));
  }

  SUBCASE("least squares: bounded by the residual Lipschitz constant") {
    // f_i(w) = (y_i - x_i w)^2 / 2 in one dimension between w and w'.
    const double x[] = {0.5, -1.0, 2.0};
    const double y[] = {1.0, 0.0, -3.0};
    const double w = 0.2, w_prev = -0.3;
    Vec now(3), before(3);
    for (int i = 0; i < 3; ++i) {
      now[i] = 0.5 * (y[i] - x[i] * w) * (y[i] - x[i] * w);
      before[i] = 0.5 * (y[i] - x[i] * w_prev) * (y[i] - x[i] * w_prev);
    }
    const auto lip = approx_lipschitz(now, before, std::abs(w - w_prev));
    for (int i = 0; i < 3; ++i) {
      const double bound = std::abs(x[i]) * std::max(std::abs(y[i] - x[i] * w), std::abs(y[i] - x[i] * w_prev));
      CHECK(lip.values[i] <= bound + 1e-12);
      // Exact for a quadratic: |x| * |mean residual|.
      const double mid = y[i] - x[i] * 0.5 * (w + w_prev);
      CHECK(lip.values[i] == doctest::Approx(std::abs(x[i] * mid)).epsilon(1e-12));
    }
  }
}
