#include "adass/lsq_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "adass/parallel.hpp"

namespace adass::lsq {

namespace {

using Gram = Eigen::MatrixXd;

struct NormalEquations {
  Gram gram;
  Vec rhs;
};

// Rows accumulated in the order given.
NormalEquations accumulate(const Dataset& data, const IndexList& rows) {
  const auto d = static_cast<Eigen::Index>(data.dim());
  NormalEquations eq{Gram::Zero(d, d), Vec::Zero(d)};
  for (std::size_t i : rows) {
    const auto x = data.row(i).transpose();
    eq.gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
    eq.rhs += data.target(i) * x;
  }
  eq.gram.triangularView<Eigen::StrictlyUpper>() = eq.gram.transpose();
  return eq;
}

struct Spectrum {
  double min = 0.0;
  double max = 0.0;
  bool full_rank() const { return max > 0.0 && min > kRankTolerance * max; }
};

Spectrum spectrum(const Gram& gram) {
  Eigen::SelfAdjointEigenSolver<Gram> eig(gram, Eigen::EigenvaluesOnly);
  const Vec& values = eig.eigenvalues();
  return {values.minCoeff(), values.maxCoeff()};
}

IndexList sorted_unique(const Dataset& data, IndexList indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw std::invalid_argument("subset indices must be distinct");
  }
  if (!indices.empty() && indices.back() >= data.size()) throw std::out_of_range("subset index out of range");
  return indices;
}

void check_permutation(const Dataset& data, const IndexList& order) {
  if (order.size() != data.size()) throw std::invalid_argument("order must be a permutation of [n]");
  std::vector<char> seen(order.size(), 0);
  for (std::size_t i : order) {
    if (i >= order.size() || seen[i]) throw std::invalid_argument("order must be a permutation of [n]");
    seen[i] = 1;
  }
}

bool prefix_full_rank(const Dataset& data, const IndexList& order, std::size_t m) {
  if (m < data.dim()) return false;
  const IndexList prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  return spectrum(accumulate(data, sorted_unique(data, prefix)).gram).full_rank();
}

}  // namespace

Vec solve_full(const Dataset& data) {
  const NormalEquations eq = accumulate(data, iota_indices(data.size()));
  const Spectrum s = spectrum(eq.gram);
  if (!s.full_rank()) {
    throw RankDeficientError("X X^T is rank-deficient (smallest eigenvalue " + std::to_string(s.min) +
                                 ", largest " + std::to_string(s.max) + ")",
                             data.size(), 0);
  }
  return eq.gram.ldlt().solve(eq.rhs);
}

SubsetSolution solve_subset(const Dataset& data, const IndexList& indices) {
  const IndexList rows = sorted_unique(data, indices);
  if (rows.size() < data.dim()) {
    throw RankDeficientError("subset of size " + std::to_string(rows.size()) + " cannot reach rank d = " +
                                 std::to_string(data.dim()) + "; need m0 >= d",
                             rows.size(), data.dim());
  }
  const NormalEquations eq = accumulate(data, rows);
  const Spectrum s = spectrum(eq.gram);
  if (!s.full_rank()) {
    throw RankDeficientError("subset of size " + std::to_string(rows.size()) +
                                 " is rank-deficient; enlarge the subset beyond m0",
                             rows.size(), 0);
  }
  return {indices, eq.gram.ldlt().solve(eq.rhs), s.min, true};
}

std::size_t min_full_rank_prefix(const Dataset& data, const IndexList& order) {
  std::size_t lo = data.dim();
  std::size_t hi = order.size();
  if (hi < lo || !prefix_full_rank(data, order, hi)) return 0;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (prefix_full_rank(data, order, mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

double lemma2_residual(const Dataset& data, const IndexList& indices) {
  const Vec w_star = solve_full(data);
  const SubsetSolution sub = solve_subset(data, indices);
  const IndexList rows = sorted_unique(data, indices);
  const NormalEquations eq = accumulate(data, rows);

  const Vec lhs = eq.gram * (w_star - sub.w);
  Vec rhs = Vec::Zero(static_cast<Eigen::Index>(data.dim()));
  std::vector<char> selected(data.size(), 0);
  for (std::size_t i : rows) selected[i] = 1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (selected[i]) continue;
    rhs += (data.target(i) - data.row(i).dot(w_star)) * data.row(i).transpose();
  }
  // Scale-aware eps: an exactly consistent system leaves both sides at the
  // round-off level of G_m w, which must not read as a relative mismatch.
  const double eps = 1e-6 * eq.gram.norm() * std::max(1.0, w_star.norm());
  return (lhs - rhs).norm() / (lhs.norm() + rhs.norm() + eps);
}

Vec lipschitz_at(const Dataset& data, const Vec& w) {
  Vec out(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = std::abs(data.target(i) - data.row(i).dot(w)) * data.row(i).norm();
  }
  return out;
}

Vec losses_at(const Dataset& data, const Vec& w) {
  Vec out(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.target(i) - data.row(i).dot(w);
    out[static_cast<Eigen::Index>(i)] = 0.5 * r * r;
  }
  return out;
}

bool Theorem1Report::loss_bound_holds() const { return gap_sq <= loss_bound * (1.0 + 1e-9); }
bool Theorem1Report::lip_bound_holds() const { return gap_sq <= lip_bound * (1.0 + 1e-9); }

Theorem1Report theorem1_report(const Dataset& data, const IndexList& order, std::size_t m) {
  check_permutation(data, order);
  if (m < 1 || m > order.size()) throw std::invalid_argument("theorem1_report needs 1 <= m <= n");

  const IndexList prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  SubsetSolution sub;
  try {
    sub = solve_subset(data, prefix);
  } catch (const RankDeficientError& e) {
    const std::size_t m0 = min_full_rank_prefix(data, order);
    throw RankDeficientError(std::string(e.what()) + " (m = " + std::to_string(m) +
                                 ", smallest full-rank prefix m0 = " + std::to_string(m0) + ")",
                             m, m0);
  }
  const Vec w_star = solve_full(data);

  Theorem1Report rep;
  rep.m = m;
  rep.gap_sq = (w_star - sub.w).squaredNorm();
  for (std::size_t i = 0; i < data.size(); ++i) rep.a = std::max(rep.a, data.row(i).norm());
  rep.b = sub.min_eigenvalue;

  double tail_loss = 0.0;
  double tail_lip = 0.0;
  for (std::size_t k = m; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const double r = data.target(i) - data.row(i).dot(w_star);
    tail_loss += 0.5 * r * r;
    tail_lip += std::abs(r) * data.row(i).norm();
  }
  const double n = static_cast<double>(data.size());
  rep.loss_bound = n * rep.a * rep.a / (rep.b * rep.b) * tail_loss;
  rep.lip_bound = tail_lip * tail_lip / (rep.b * rep.b);
  return rep;
}

std::string_view to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::Lipschitz: return "lipschitz";
    case Criterion::Loss: return "loss";
    case Criterion::Random: return "random";
  }
  return "unknown";
}

IndexList criterion_order(const Dataset& data, const Vec& w_star, Criterion criterion, std::uint64_t seed) {
  IndexList order = iota_indices(data.size());
  if (criterion == Criterion::Random) {
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
  }
  const Vec key = criterion == Criterion::Lipschitz ? lipschitz_at(data, w_star) : losses_at(data, w_star);
  std::stable_sort(order.begin(), order.end(), [&key](std::size_t a, std::size_t b) {
    return key[static_cast<Eigen::Index>(a)] > key[static_cast<Eigen::Index>(b)];
  });
  return order;
}

std::vector<CriteriaRow> criteria_experiment(const CriteriaConfig& cfg) {
  for (double r : cfg.ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("selection ratios must lie in (0, 1]");
  }
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty()) {
    for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  }
  constexpr Criterion kCriteria[] = {Criterion::Lipschitz, Criterion::Loss, Criterion::Random};
  const std::size_t cells = std::size(kCriteria) * cfg.ratios.size();

  // gaps[seed][cell], NaN for a rank-deficient subset.
  std::vector<std::vector<double>> gaps(seeds.size(), std::vector<double>(cells, 0.0));
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t s) {
    const SyntheticRegression gen = generate_synthetic(cfg.dist, cfg.n, cfg.d, cfg.noise_sigma, seeds[s]);
    const Vec w_star = solve_full(gen.data);
    for (std::size_t c = 0; c < std::size(kCriteria); ++c) {
      const IndexList order = criterion_order(gen.data, w_star, kCriteria[c], seeds[s]);
      for (std::size_t r = 0; r < cfg.ratios.size(); ++r) {
        const auto m = static_cast<std::size_t>(
            std::ceil(cfg.ratios[r] * static_cast<double>(cfg.n) - 1e-9));
        const IndexList prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(m, 1, cfg.n)));
        double gap = std::nan("");
        try {
          gap = (w_star - solve_subset(gen.data, prefix).w).norm();
        } catch (const RankDeficientError&) {
        }
        gaps[s][c * cfg.ratios.size() + r] = gap;
      }
    }
  });

  std::vector<CriteriaRow> rows;
  rows.reserve(cells);
  for (std::size_t c = 0; c < std::size(kCriteria); ++c) {
    for (std::size_t r = 0; r < cfg.ratios.size(); ++r) {
      CriteriaRow row;
      row.criterion = kCriteria[c];
      row.ratio = cfg.ratios[r];
      std::vector<double> ok;
      for (const auto& per_seed : gaps) {
        const double g = per_seed[c * cfg.ratios.size() + r];
        if (std::isnan(g)) {
          ++row.skipped;
        } else {
          ok.push_back(g);
        }
      }
      row.n_seeds = ok.size();
      if (!ok.empty()) {
        row.mean_gap = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
        double ss = 0.0;
        for (double g : ok) ss += (g - row.mean_gap) * (g - row.mean_gap);
        row.std_gap = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace adass::lsq
