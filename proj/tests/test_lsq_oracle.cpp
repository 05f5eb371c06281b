#include <doctest.h>

#include <cmath>
#include <random>

#include "adass/lsq_oracle.hpp"
#include "adass/synthetic.hpp"
#include "oracles.hpp"

using namespace adass;

namespace {

Dataset noisy(FeatureDist dist, std::size_t n, std::size_t d, std::uint64_t seed, double sigma = 0.1) {
  return generate_synthetic(dist, n, d, sigma, seed).data;
}

}  // namespace

TEST_CASE("solve_full") {
  SUBCASE("exact one-dimensional fit") {
    RowMatrix x(3, 1);
    x << 1.0, 2.0, 3.0;
    Vec y(3);
    y << 1.0, 2.0, 3.0;
    CHECK(lsq::solve_full(Dataset(x, y))[0] == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("noise-free data returns w_true") {
    const auto problem = generate_synthetic(FeatureDist::Gaussian, 100, 8, 0.0, 3);
    CHECK((lsq::solve_full(problem.data) - problem.w_true).norm() <= 1e-8 * problem.w_true.norm());
  }

  SUBCASE("agrees with long gradient descent") {
    const Dataset data = noisy(FeatureDist::Gaussian, 200, 5, 12, 0.5);
    Vec w = Vec::Zero(5);
    const RowMatrix& x = data.features();
    const double step = 1.0 / (x.transpose() * x).eval().norm();
    for (int k = 0; k < 20000; ++k) w -= step * (x.transpose() * (x * w - data.targets()));
    CHECK((lsq::solve_full(data) - w).norm() <= 1e-5);
  }

  SUBCASE("residual gradient vanishes") {
    const Dataset data = noisy(FeatureDist::Binomial, 300, 6, 5);
    const Vec w = lsq::solve_full(data);
    const Vec g = data.features().transpose() * (data.features() * w - data.targets());
    CHECK(g.norm() <= 1e-8 * data.features().norm() * data.targets().norm());
  }

  SUBCASE("rank deficiency is an error") {
    RowMatrix x(4, 2);
    x << 1, 2, 2, 4, 3, 6, 4, 8;
    CHECK_THROWS_AS(lsq::solve_full(Dataset(x, Vec::Ones(4))), lsq::RankDeficientError);
  }
}

TEST_CASE("solve_subset") {
  const Dataset data = noisy(FeatureDist::Uniform, 120, 6, 4);

  SUBCASE("the full index set reproduces solve_full bit for bit") {
    IndexList all = iota_indices(data.size());
    std::reverse(all.begin(), all.end());
    CHECK(lsq::solve_subset(data, all).w == lsq::solve_full(data));
  }

  SUBCASE("noise-free data interpolates on any full-rank d-subset") {
    const auto problem = generate_synthetic(FeatureDist::Gaussian, 60, 4, 0.0, 8);
    const auto sub = lsq::solve_subset(problem.data, {3, 17, 29, 44});
    CHECK((sub.w - problem.w_true).norm() <= 1e-8 * problem.w_true.norm());
  }

  SUBCASE("random subsets match an independent normal-equation solve") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
      IndexList s = iota_indices(data.size());
      std::shuffle(s.begin(), s.end(), rng);
      s.resize(10 + static_cast<std::size_t>(k) * 5);
      const auto sub = lsq::solve_subset(data, s);
      const Vec expected = oracle::normal_equations(data.features(), data.targets(), s);
      CHECK((sub.w - expected).norm() <= 1e-8 * std::max(1.0, expected.norm()));
      CHECK(sub.full_rank);
      CHECK(sub.min_eigenvalue > 0.0);
    }
  }

  SUBCASE("too small or degenerate subsets carry guidance") {
    try {
      lsq::solve_subset(data, {0, 1, 2});
      FAIL("expected a rank error");
    } catch (const lsq::RankDeficientError& e) {
      CHECK(e.subset_size() == 3);
      CHECK(e.min_full_rank() == 6);
    }
    CHECK_THROWS_AS(lsq::solve_subset(data, {0, 0, 1, 2, 3, 4, 5}), std::invalid_argument);
    CHECK_THROWS_AS(lsq::solve_subset(data, {0, 1, 2, 3, 4, 500}), std::out_of_range);
  }
}

TEST_CASE("smallest full-rank prefix matches a linear scan") {
  // Repeated rows delay full rank for some orders.
  RowMatrix x(8, 3);
  x << 1, 0, 0, 1, 0, 0, 2, 0, 0, 0, 1, 0, 0, 2, 0, 1, 1, 0, 0, 0, 1, 1, 1, 1;
  const Dataset data(x, Vec::LinSpaced(8, 0.0, 1.0));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 30; ++k) {
    IndexList order = iota_indices(8);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t scan = 0;
    for (std::size_t m = 3; m <= 8 && scan == 0; ++m) {
      const IndexList prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(data.subset(prefix).features()));
      if (lu.rank() == 3) scan = m;
    }
    CHECK(lsq::min_full_rank_prefix(data, order) == scan);
  }
}

TEST_CASE("the subset-gap identity holds numerically") {
  const Dataset data = noisy(FeatureDist::Gaussian, 80, 5, 1);

  SUBCASE("full set") { CHECK(lsq::lemma2_residual(data, iota_indices(80)) == 0.0); }

  SUBCASE("noise-free data") {
    const auto clean = generate_synthetic(FeatureDist::Uniform, 80, 5, 0.0, 2).data;
    CHECK(lsq::lemma2_residual(clean, {0, 5, 9, 11, 30, 31, 50, 70}) <= 1e-8);
  }

  SUBCASE("50 random noisy instances") {
    std::mt19937_64 rng(3);
    const FeatureDist dists[] = {FeatureDist::Uniform, FeatureDist::Gaussian, FeatureDist::Binomial};
    for (std::uint64_t k = 0; k < 50; ++k) {
      const Dataset inst = noisy(dists[k % 3], 150, 7, 100 + k, 0.3);
      IndexList s = iota_indices(inst.size());
      std::shuffle(s.begin(), s.end(), rng);
      s.resize(20 + k);
      CHECK(lsq::lemma2_residual(inst, s) <= 1e-8);
    }
  }
}

TEST_CASE("subset-gap bounds") {
  SUBCASE("noise-free data gives zero gap and zero bounds") {
    const auto clean = generate_synthetic(FeatureDist::Gaussian, 50, 3, 0.0, 4).data;
    const auto rep = lsq::theorem1_report(clean, iota_indices(50), 10);
    CHECK(rep.gap_sq <= 1e-24);
    CHECK(rep.loss_bound <= 1e-24);
    CHECK(rep.lip_bound <= 1e-24);
    CHECK(rep.loss_bound_holds());
    CHECK(rep.lip_bound_holds());
  }

  SUBCASE("m = n empties the discarded set") {
    const Dataset data = noisy(FeatureDist::Uniform, 60, 4, 2);
    const auto rep = lsq::theorem1_report(data, iota_indices(60), 60);
    CHECK(rep.gap_sq == 0.0);
    CHECK(rep.loss_bound == 0.0);
    CHECK(rep.lip_bound == 0.0);
  }

  SUBCASE("sweep over distributions, seeds and subset sizes") {
    std::size_t violations = 0;
    for (auto dist : {FeatureDist::Uniform, FeatureDist::Gaussian, FeatureDist::Binomial}) {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Dataset data = noisy(dist, 1000, 10, seed);
        const Vec w_star = lsq::solve_full(data);
        const IndexList order = lsq::criterion_order(data, w_star, lsq::Criterion::Random, seed);
        for (std::size_t m = 200; m <= 1000; m += 200) {
          const auto rep = lsq::theorem1_report(data, order, m);
          if (!rep.loss_bound_holds() || !rep.lip_bound_holds()) ++violations;
        }
      }
    }
    CHECK(violations == 0);
  }

  SUBCASE("bounds shrink as m grows along a fixed order") {
    const Dataset data = noisy(FeatureDist::Gaussian, 300, 5, 7);
    const Vec w_star = lsq::solve_full(data);
    const IndexList order = lsq::criterion_order(data, w_star, lsq::Criterion::Random, 7);
    // The tail sums shrink; b_m grows with the prefix, so both bounds do not increase.
    double prev_loss = kInfinity;
    double prev_lip = kInfinity;
    for (std::size_t m = 30; m <= 300; m += 30) {
      const auto rep = lsq::theorem1_report(data, order, m);
      CHECK(rep.loss_bound <= prev_loss * (1.0 + 1e-12));
      CHECK(rep.lip_bound <= prev_lip * (1.0 + 1e-12));
      prev_loss = rep.loss_bound;
      prev_lip = rep.lip_bound;
    }
  }

  SUBCASE("prefixes below m0 are rejected") {
    const Dataset data = noisy(FeatureDist::Uniform, 40, 4, 1);
    CHECK_THROWS_AS(lsq::theorem1_report(data, iota_indices(40), 2), lsq::RankDeficientError);
    CHECK_THROWS_AS(lsq::theorem1_report(data, {0, 1, 2}, 2), std::invalid_argument);
  }
}

TEST_CASE("criterion orders") {
  const Dataset data = noisy(FeatureDist::Gaussian, 50, 3, 9);
  const Vec w_star = lsq::solve_full(data);
  const Vec lips = lsq::lipschitz_at(data, w_star);
  const Vec losses = lsq::losses_at(data, w_star);
  const auto by_lip = lsq::criterion_order(data, w_star, lsq::Criterion::Lipschitz, 1);
  const auto by_loss = lsq::criterion_order(data, w_star, lsq::Criterion::Loss, 1);
  for (std::size_t k = 1; k < 50; ++k) {
    CHECK(lips[static_cast<Eigen::Index>(by_lip[k - 1])] >= lips[static_cast<Eigen::Index>(by_lip[k])]);
    CHECK(losses[static_cast<Eigen::Index>(by_loss[k - 1])] >= losses[static_cast<Eigen::Index>(by_loss[k])]);
  }
  for (std::size_t i = 0; i < 50; ++i) {
    const double r = data.target(i) - data.row(i).dot(w_star);
    CHECK(lips[static_cast<Eigen::Index>(i)] == doctest::Approx(std::abs(r) * data.row(i).norm()));
  }
  CHECK(lsq::criterion_order(data, w_star, lsq::Criterion::Random, 4) ==
        lsq::criterion_order(data, w_star, lsq::Criterion::Random, 4));
}

TEST_CASE("criteria experiment edge cases") {
  lsq::CriteriaConfig cfg;
  cfg.n = 200;
  cfg.d = 5;
  cfg.seeds = {1, 2, 3};

  SUBCASE("the full set closes every gap") {
    cfg.ratios = {1.0};
    for (const auto& row : lsq::criteria_experiment(cfg)) CHECK(row.mean_gap == 0.0);
  }

  SUBCASE("noise-free targets close every gap") {
    cfg.noise_sigma = 0.0;
    cfg.ratios = {0.1, 0.5};
    for (const auto& row : lsq::criteria_experiment(cfg)) CHECK(row.mean_gap <= 1e-8);
  }

  SUBCASE("rows come in criterion-major order") {
    cfg.ratios = {0.3, 0.6};
    const auto rows = lsq::criteria_experiment(cfg);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].criterion == lsq::Criterion::Lipschitz);
    CHECK(rows[2].criterion == lsq::Criterion::Loss);
    CHECK(rows[4].criterion == lsq::Criterion::Random);
    CHECK(rows[1].ratio == 0.6);
    for (const auto& row : rows) CHECK(row.n_seeds == 3);
  }

  SUBCASE("thread count does not change results") {
    cfg.ratios = {0.2, 0.7};
    const auto one = lsq::criteria_experiment(cfg);
    cfg.threads = 3;
    const auto three = lsq::criteria_experiment(cfg);
    for (std::size_t k = 0; k < one.size(); ++k) CHECK(one[k].mean_gap == three[k].mean_gap);
  }
}
