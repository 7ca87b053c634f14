#include "pdsr/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pdsr/errors.hpp"
#include "pdsr/rng.hpp"

namespace pdsr {

namespace {

size_t resolve_user(const PlatformDataset& data, uint32_t user_id) {
  const auto col = data.user_column(user_id);
  if (!col) {
    throw std::invalid_argument("user " + std::to_string(user_id) +
                                " is not on platform " +
                                std::to_string(data.platform_id));
  }
  return *col;
}

void check_shapes(const SimilarityGraph& graph, const PlatformDataset& data) {
  if (graph.vertex_count != data.service_count) {
    throw std::invalid_argument("graph and platform disagree on service count");
  }
}

// C(n, k) saturating at 2^63; enough to compare against any sane cap.
uint64_t binomial(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double c = 1.0L;
  for (uint64_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c > 9.2e18L) return UINT64_MAX;
  }
  return static_cast<uint64_t>(c + 0.5L);
}

}  // namespace

double predict_qos(const SimilarityGraph& graph, const PlatformDataset& data,
                   uint32_t user_id, uint32_t service) {
  check_shapes(graph, data);
  const size_t col = resolve_user(data, user_id);
  if (data.at(service, col) != 0.0) {
    throw std::invalid_argument("service " + std::to_string(service) +
                                " was already invoked by user " +
                                std::to_string(user_id));
  }
  double sum = 0.0;
  size_t rated = 0;
  for (uint32_t n : graph.neighbors(service)) {
    const double v = data.at(n, col);
    if (v != 0.0) {
      sum += v;
      ++rated;
    }
  }
  return rated == 0 ? 0.0 : sum / static_cast<double>(rated);
}

double jaccard_dissimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("jaccard_dissimilarity: dimension mismatch");
  }
  size_t both = 0, either = 0;
  for (size_t j = 0; j < a.size(); ++j) {
    const bool va = a[j] != 0.0, vb = b[j] != 0.0;
    both += va && vb;
    either += va || vb;
  }
  if (either == 0) return 0.0;
  return 1.0 - static_cast<double>(both) / static_cast<double>(either);
}

CandidatePool CandidatePool::build(const SimilarityGraph& graph,
                                   const PlatformDataset& data, uint32_t user_id) {
  check_shapes(graph, data);
  const size_t col = resolve_user(data, user_id);
  const size_t users = data.user_count();

  CandidatePool pool;
  pool.user_id_ = user_id;
  pool.total_services_ = graph.vertex_count;
  // One contiguous copy of the target user's column keeps the neighbor scans
  // below out of the strided full matrix.
  std::vector<double> user_column(graph.vertex_count);
  for (uint32_t s = 0; s < graph.vertex_count; ++s) user_column[s] = data.at(s, col);
  for (uint32_t s = 0; s < graph.vertex_count; ++s) {
    if (user_column[s] != 0.0) continue;  // already invoked: not a candidate

    Candidate cand;
    cand.service_id = s;
    double sum = 0.0;
    for (uint32_t n : graph.neighbors(s)) {
      const double v = user_column[n];
      if (v != 0.0) {
        cand.rated_neighbors.push_back(n);
        sum += v;
      }
    }
    cand.predicted = cand.rated_neighbors.empty()
                         ? 0.0
                         : sum / static_cast<double>(cand.rated_neighbors.size());

    Bitset support(users);
    const auto row = data.service_row(s);
    for (size_t j = 0; j < users; ++j) {
      if (row[j] != 0.0) support.set(j);
    }
    // The selection-time vector carries the predicted value at the target
    // user's column, so a nonzero estimate widens the support there.
    if (cand.predicted != 0.0) support.set(col);

    Bitset expansion(graph.vertex_count);
    expansion.set(s);
    for (uint32_t n : graph.neighbors(s)) expansion.set(n);

    pool.by_id_.emplace(s, pool.candidates_.size());
    pool.candidates_.push_back(std::move(cand));
    pool.supports_.push_back(std::move(support));
    pool.expansions_.push_back(std::move(expansion));
  }
  return pool;
}

std::optional<size_t> CandidatePool::index_of(uint32_t service_id) const {
  const auto it = by_id_.find(service_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<size_t> CandidatePool::resolve(std::span<const uint32_t> subset) const {
  std::vector<size_t> idx;
  idx.reserve(subset.size());
  for (uint32_t s : subset) {
    const auto i = index_of(s);
    if (!i) {
      throw std::invalid_argument("service " + std::to_string(s) +
                                  " is not a candidate for user " +
                                  std::to_string(user_id_));
    }
    idx.push_back(*i);
  }
  std::vector<size_t> sorted(idx);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("subset contains a duplicate service");
  }
  return idx;
}

CandidatePool CandidatePool::restricted(std::span<const size_t> keep) const {
  std::vector<size_t> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("restricted: duplicate candidate index");
  }
  CandidatePool pool;
  pool.user_id_ = user_id_;
  pool.total_services_ = total_services_;
  for (size_t i : sorted) {
    if (i >= candidates_.size()) {
      throw std::out_of_range("restricted: candidate index out of range");
    }
    pool.by_id_.emplace(candidates_[i].service_id, pool.candidates_.size());
    pool.candidates_.push_back(candidates_[i]);
    pool.supports_.push_back(supports_[i]);
    pool.expansions_.push_back(expansions_[i]);
  }
  return pool;
}

double CandidatePool::pair_dissimilarity(size_t a, size_t b) const {
  const size_t either = supports_[a].count_or(supports_[b]);
  if (either == 0) return 0.0;
  const size_t both = supports_[a].count_and(supports_[b]);
  return 1.0 - static_cast<double>(both) / static_cast<double>(either);
}

double accuracy_value(const CandidatePool& pool, std::span<const uint32_t> subset) {
  double acc = 0.0;
  for (size_t i : pool.resolve(subset)) acc += pool.predicted(i);
  return acc;
}

double direct_diversity(const CandidatePool& pool, std::span<const uint32_t> subset) {
  const auto idx = pool.resolve(subset);
  double beta = 0.0;
  for (size_t a = 0; a < idx.size(); ++a) {
    for (size_t b = a + 1; b < idx.size(); ++b) {
      beta += pool.pair_dissimilarity(idx[a], idx[b]);
    }
  }
  return beta;
}

double objective_value(const SimilarityGraph& graph, const CandidatePool& pool,
                       std::span<const uint32_t> subset, double lambda, double xi) {
  const double acc = accuracy_value(pool, subset);
  const double alpha = expansion_ratio(graph, subset);
  const double beta = direct_diversity(pool, subset);
  return acc + lambda * (alpha + xi * beta);
}

double surrogate_value(const SimilarityGraph& graph, const CandidatePool& pool,
                       std::span<const uint32_t> subset, double lambda, double xi) {
  const double acc = accuracy_value(pool, subset);
  const double alpha = expansion_ratio(graph, subset);
  const double beta = direct_diversity(pool, subset);
  return 0.5 * (acc + lambda * alpha) + lambda * xi * beta;
}

RecommendationList greedy_topk(const SimilarityGraph& graph,
                               const CandidatePool& pool, size_t k,
                               double lambda, double xi) {
  if (pool.total_services() != graph.vertex_count) {
    throw std::invalid_argument("greedy_topk: pool was built on a different graph");
  }
  if (pool.size() == 0) {
    throw EmptyCandidatesError("no candidate services for user " +
                               std::to_string(pool.user_id()));
  }
  if (k == 0) throw std::invalid_argument("greedy_topk: k must be positive");

  const size_t n = pool.size();
  const size_t picks = std::min(k, n);
  const double m = pool.total_services();

  RecommendationList result;
  result.truncated = k > n;
  std::vector<bool> chosen(n, false);
  std::vector<size_t> chosen_idx;
  Bitset expanded(pool.total_services());
  size_t expanded_count = 0;
  double acc = 0.0, beta = 0.0;

  for (size_t step = 0; step < picks; ++step) {
    double best_gain = -std::numeric_limits<double>::infinity();
    size_t best = n;
    for (size_t c = 0; c < n; ++c) {
      if (chosen[c]) continue;
      const size_t grown = expanded.count_or(pool.expansion(c));
      double pair_gain = 0.0;
      for (size_t s : chosen_idx) pair_gain += pool.pair_dissimilarity(c, s);
      const double gain =
          0.5 * (pool.predicted(c) +
                 lambda * static_cast<double>(grown - expanded_count) / m) +
          lambda * xi * pair_gain;
      // Strict > plus ascending-id scan order = ties go to the lowest id.
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }

    expanded |= pool.expansion(best);
    expanded_count = expanded.count();
    acc += pool.predicted(best);
    for (size_t s : chosen_idx) beta += pool.pair_dissimilarity(best, s);
    chosen[best] = true;
    chosen_idx.push_back(best);

    GreedyStep trace;
    trace.service_id = pool.candidates()[best].service_id;
    trace.predicted = pool.predicted(best);
    trace.acc = acc;
    trace.alpha = static_cast<double>(expanded_count) / m;
    trace.beta = beta;
    trace.f_prime = 0.5 * (acc + lambda * trace.alpha) + lambda * xi * beta;
    result.steps.push_back(trace);
    result.services.push_back(trace.service_id);
  }
  return result;
}

RecommendationList recommend_for_user(const SimilarityGraph& graph,
                                      const PlatformDataset& data,
                                      const RecommendationQuery& query) {
  const CandidatePool pool = CandidatePool::build(graph, data, query.user_id);
  return greedy_topk(graph, pool, query.k, query.lambda, query.xi);
}

OracleResult brute_force_topk(const SimilarityGraph& graph,
                              const CandidatePool& pool, size_t k,
                              double lambda, double xi, uint64_t cap) {
  if (pool.size() == 0) {
    throw EmptyCandidatesError("no candidate services for user " +
                               std::to_string(pool.user_id()));
  }
  if (k == 0) throw std::invalid_argument("brute_force_topk: k must be positive");

  const size_t n = pool.size();
  const size_t kk = std::min(k, n);
  const uint64_t combos = binomial(n, kk);
  if (combos > cap) {
    throw TooLargeError("exhaustive search over C(" + std::to_string(n) + "," +
                        std::to_string(kk) + ") = " + std::to_string(combos) +
                        " subsets exceeds cap " + std::to_string(cap));
  }

  // Enumerate index combinations in lexicographic order; strict improvement
  // keeps the first maximizer, i.e. the lexicographically smallest id tuple.
  std::vector<size_t> comb(kk);
  for (size_t i = 0; i < kk; ++i) comb[i] = i;
  std::vector<uint32_t> subset(kk);
  OracleResult best;
  best.f_value = -std::numeric_limits<double>::infinity();
  while (true) {
    for (size_t i = 0; i < kk; ++i) {
      subset[i] = pool.candidates()[comb[i]].service_id;
    }
    const double f = objective_value(graph, pool, subset, lambda, xi);
    if (f > best.f_value) {
      best.f_value = f;
      best.services = subset;
    }
    // Advance to the next combination.
    size_t i = kk;
    while (i > 0 && comb[i - 1] == n - kk + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (size_t j = i; j < kk; ++j) comb[j] = comb[j - 1] + 1;
  }
  return best;
}

SubmodularityCheck check_submodular_phi(const SimilarityGraph& graph,
                                        const CandidatePool& pool, size_t trials,
                                        uint64_t seed, double lambda,
                                        double tolerance) {
  if (pool.size() < 2) {
    throw std::invalid_argument("check_submodular_phi: need at least 2 candidates");
  }
  const auto phi = [&](std::span<const uint32_t> subset) {
    return accuracy_value(pool, subset) + lambda * expansion_ratio(graph, subset);
  };

  Rng rng(seed);
  const size_t n = pool.size();
  SubmodularityCheck check;
  check.trials = trials;
  for (size_t t = 0; t < trials; ++t) {
    // T is a random proper subset of the pool, S a random subset of T, and x
    // a candidate outside T.
    const size_t t_size = static_cast<size_t>(rng.below(n));  // in [0, n-1]
    std::vector<uint32_t> big;
    for (uint32_t idx : rng.sample_without_replacement(
             static_cast<uint32_t>(n), static_cast<uint32_t>(t_size))) {
      big.push_back(pool.candidates()[idx].service_id);
    }
    std::sort(big.begin(), big.end());
    std::vector<uint32_t> small;
    for (uint32_t s : big) {
      if (rng.uniform() < 0.5) small.push_back(s);
    }
    uint32_t x;
    do {
      x = pool.candidates()[rng.below(n)].service_id;
    } while (std::find(big.begin(), big.end(), x) != big.end());

    std::vector<uint32_t> small_x(small), big_x(big);
    small_x.push_back(x);
    big_x.push_back(x);

    const double phi_small = phi(small), phi_big = phi(big);
    const double gain_small = phi(small_x) - phi_small;
    const double gain_big = phi(big_x) - phi_big;

    const double diminishing_breach = gain_big - gain_small;  // > 0 is a breach
    const double monotone_breach = phi_small - phi_big;       // > 0 is a breach
    const double breach = std::max(diminishing_breach, monotone_breach);
    if (breach > tolerance) {
      ++check.violations;
      check.max_violation = std::max(check.max_violation, breach);
    }
  }
  check.passed = check.violations == 0;
  return check;
}

}  // namespace pdsr
