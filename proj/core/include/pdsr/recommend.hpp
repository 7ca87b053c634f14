#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pdsr/bitset.hpp"
#include "pdsr/federation.hpp"
#include "pdsr/graph.hpp"

namespace pdsr {

struct RecommendationQuery {
  uint32_t user_id = 0;
  size_t k = 5;
  double lambda = 0.0;
  double xi = 0.0;
};

// Graph-based QoS estimate for a service the user has not invoked: the mean
// observed value of its graph-neighbors that the user *has* invoked, or 0
// when no such neighbor exists. Asking about an already-invoked service is an
// error (its value is known, not predicted).
double predict_qos(const SimilarityGraph& graph, const PlatformDataset& data,
                   uint32_t user_id, uint32_t service);

// Jaccard dissimilarity of two QoS vectors on their nonzero supports:
//
//   J = 1 - |{j : a_j > 0 and b_j > 0}| / |{j : a_j > 0 or b_j > 0}|
//
// i.e. 1 - intersection/union of the invoked-by sets. Two all-zero vectors
// have dissimilarity 0. This is a metric on supports (triangle inequality
// holds), which the diversity term relies on.
double jaccard_dissimilarity(std::span<const double> a, std::span<const double> b);

// One selectable service for a given target user: a service that user has
// not invoked, with its predicted value and the graph-neighbors the
// prediction averaged over.
struct Candidate {
  uint32_t service_id = 0;
  double predicted = 0.0;
  std::vector<uint32_t> rated_neighbors;
};

// Candidate set for one (user, platform) pair plus the precomputed bit-level
// structures the selectors run on: per-candidate invocation supports (with
// the predicted value substituted at the target user's column) and one-hop
// expansion sets. Everything downstream (objectives, greedy, brute force)
// reads from here, so the two selection routes share inputs but not logic.
class CandidatePool {
 public:
  static CandidatePool build(const SimilarityGraph& graph,
                             const PlatformDataset& data, uint32_t user_id);

  const std::vector<Candidate>& candidates() const { return candidates_; }
  size_t size() const { return candidates_.size(); }
  uint32_t total_services() const { return total_services_; }
  uint32_t user_id() const { return user_id_; }

  std::optional<size_t> index_of(uint32_t service_id) const;
  // Resolves a subset of service ids to pool indices; throws on unknown ids
  // or duplicates.
  std::vector<size_t> resolve(std::span<const uint32_t> subset) const;

  // A copy holding only the candidates at the given pool indices (duplicates
  // rejected), in ascending service-id order: how instances get down-sampled
  // before an exhaustive comparison.
  CandidatePool restricted(std::span<const size_t> keep) const;

  double predicted(size_t idx) const { return candidates_[idx].predicted; }
  const Bitset& support(size_t idx) const { return supports_[idx]; }
  const Bitset& expansion(size_t idx) const { return expansions_[idx]; }

  // Jaccard dissimilarity between two candidates' recommendation-time
  // vectors, computed on the support bitsets.
  double pair_dissimilarity(size_t a, size_t b) const;

 private:
  uint32_t user_id_ = 0;
  uint32_t total_services_ = 0;
  std::vector<Candidate> candidates_;      // ascending service id
  std::vector<Bitset> supports_;           // over the platform's user columns
  std::vector<Bitset> expansions_;         // over all M services
  std::unordered_map<uint32_t, size_t> by_id_;
};

// Sum of predicted values over the subset (the accuracy term).
double accuracy_value(const CandidatePool& pool, std::span<const uint32_t> subset);

// Pairwise-dissimilarity half of the diversity term: sum of Jaccard
// dissimilarities over unordered candidate pairs in the subset.
double direct_diversity(const CandidatePool& pool, std::span<const uint32_t> subset);

// Full objective  F(S) = Acc(S) + lambda * (alpha(S) + xi * beta(S)).
double objective_value(const SimilarityGraph& graph, const CandidatePool& pool,
                       std::span<const uint32_t> subset, double lambda, double xi);

// Surrogate the greedy selector maximizes:
//
//   F'(S) = 1/2 (Acc(S) + lambda * alpha(S)) + lambda * xi * beta(S)
//
// F - F' = 1/2 (Acc + lambda*alpha) >= 0, which is what makes the greedy
// argmax on F' a 2-approximation of the optimum of F.
double surrogate_value(const SimilarityGraph& graph, const CandidatePool& pool,
                       std::span<const uint32_t> subset, double lambda, double xi);

struct GreedyStep {
  uint32_t service_id = 0;
  double predicted = 0.0;
  // Cumulative values after this pick.
  double f_prime = 0.0;
  double acc = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct RecommendationList {
  std::vector<uint32_t> services;  // in pick order
  std::vector<GreedyStep> steps;
  bool truncated = false;  // pool had fewer than k candidates
};

// Greedy maximization of F': k rounds of picking the candidate with the
// largest marginal gain (ties to the lowest service id). Incremental state
// (expansion bitmap union, pairwise dissimilarity sums) keeps one run at
// O(k * |pool| * M/64) instead of re-evaluating F' per probe.
RecommendationList greedy_topk(const SimilarityGraph& graph,
                               const CandidatePool& pool, size_t k,
                               double lambda, double xi);

RecommendationList recommend_for_user(const SimilarityGraph& graph,
                                      const PlatformDataset& data,
                                      const RecommendationQuery& query);

struct OracleResult {
  std::vector<uint32_t> services;  // ascending service id
  double f_value = 0.0;
};

// Exhaustive maximizer of the *full* objective F, used as the ground truth
// the greedy approximation is measured against. Refuses instances with more
// than `cap` subsets. Ties go to the lexicographically smallest id tuple.
OracleResult brute_force_topk(const SimilarityGraph& graph,
                              const CandidatePool& pool, size_t k,
                              double lambda, double xi,
                              uint64_t cap = 1'000'000);

struct SubmodularityCheck {
  size_t trials = 0;
  size_t violations = 0;
  double max_violation = 0.0;  // largest observed breach, 0 if none
  bool passed = false;
};

// Property check that Phi'(S) = Acc(S) + lambda * alpha(S) is monotone and
// has diminishing returns: for sampled S subset-of T and x outside T,
//   Phi'(S + x) - Phi'(S) >= Phi'(T + x) - Phi'(T)   and   Phi'(T) >= Phi'(S),
// both within `tolerance`.
SubmodularityCheck check_submodular_phi(const SimilarityGraph& graph,
                                        const CandidatePool& pool, size_t trials,
                                        uint64_t seed, double lambda,
                                        double tolerance = 1e-9);

}  // namespace pdsr
