#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pdsr/errors.hpp"
#include "pdsr/recommend.hpp"
#include "pdsr/rng.hpp"
#include "testutil.hpp"

using namespace pdsr;

namespace {

// Three services, five users, target user 104 has invoked nothing. The graph
// is edgeless, so every prediction is 0 and the selection-time vectors equal
// the raw rows: supports {0,1}, {0,1,2,3}, {2,3}.
struct DisjointFixture {
  PlatformDataset data;
  SimilarityGraph graph;
  CandidatePool pool;
  DisjointFixture()
      : data(test::make_platform(1, {100, 101, 102, 103, 104},
                                 {{2.0, 1.0, 0.0, 0.0, 0.0},
                                  {1.0, 1.0, 1.0, 1.0, 0.0},
                                  {0.0, 0.0, 3.0, 0.5, 0.0}})),
        graph(make_graph(3, {})),
        pool(CandidatePool::build(graph, data, 104)) {}
};

// Four services, one user (id 7) who invoked only service 3 (value 2.0).
// Edges {0,3} and {1,3} make services 0 and 1 tie at predicted 2.0 while
// service 2 has no rated neighbor.
struct TieFixture {
  PlatformDataset data;
  SimilarityGraph graph;
  CandidatePool pool;
  TieFixture()
      : data(test::make_platform(1, {7}, {{0.0}, {0.0}, {0.0}, {2.0}})),
        graph(make_graph(4, std::vector<std::pair<uint32_t, uint32_t>>{
                                {0, 3}, {1, 3}})),
        pool(CandidatePool::build(graph, data, 7)) {}
};

}  // namespace

TEST_CASE("jaccard dissimilarity on fixed vectors") {
  const std::vector<double> a = {1.0, 0.0, 2.0, 0.0};
  const std::vector<double> b = {0.0, 3.0, 2.0, 0.0};
  CHECK(jaccard_dissimilarity(a, b) == doctest::Approx(2.0 / 3.0));
  CHECK(jaccard_dissimilarity(a, a) == 0.0);

  const std::vector<double> zero = {0.0, 0.0, 0.0, 0.0};
  CHECK(jaccard_dissimilarity(zero, zero) == 0.0);
  CHECK(jaccard_dissimilarity(a, zero) == 1.0);

  const std::vector<double> c = {0.0, 5.0, 0.0, 0.0};
  const std::vector<double> d = {4.0, 0.0, 0.0, 1.0};
  CHECK(jaccard_dissimilarity(c, d) == 1.0);  // disjoint supports

  const std::vector<double> shorter = {1.0, 2.0};
  CHECK_THROWS_AS(jaccard_dissimilarity(a, shorter), std::invalid_argument);
}

TEST_CASE("jaccard dissimilarity satisfies the triangle inequality") {
  Rng rng(0xD15);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t dim = 1 + rng.below(12);
    std::vector<double> a(dim), b(dim), c(dim);
    for (size_t j = 0; j < dim; ++j) {
      a[j] = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.1, 3.0);
      b[j] = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.1, 3.0);
      c[j] = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.1, 3.0);
    }
    const double ab = jaccard_dissimilarity(a, b);
    const double bc = jaccard_dissimilarity(b, c);
    const double ac = jaccard_dissimilarity(a, c);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("predicted QoS averages the rated graph-neighbors") {
  const auto data = test::make_platform(1, {3}, {{0.0}, {1.0}, {0.5}, {0.0}});
  const auto graph = make_graph(4, std::vector<std::pair<uint32_t, uint32_t>>{
                                        {0, 1}, {0, 2}, {0, 3}});

  CHECK(predict_qos(graph, data, 3, 0) == doctest::Approx(0.75));
  CHECK(predict_qos(graph, data, 3, 3) == 0.0);  // only neighbor is unrated
  CHECK_THROWS_AS(predict_qos(graph, data, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(predict_qos(graph, data, 99, 0), std::invalid_argument);

  const auto small = make_graph(2, {});
  CHECK_THROWS_AS(predict_qos(small, data, 3, 0), std::invalid_argument);
}

TEST_CASE("candidate pool contents and resolution") {
  const TieFixture fx;
  REQUIRE(fx.pool.size() == 3);  // service 3 is invoked, so not a candidate
  CHECK(fx.pool.total_services() == 4);
  CHECK(fx.pool.user_id() == 7);
  CHECK(fx.pool.candidates()[0].service_id == 0);
  CHECK(fx.pool.candidates()[1].service_id == 1);
  CHECK(fx.pool.candidates()[2].service_id == 2);
  CHECK(fx.pool.predicted(0) == 2.0);
  CHECK(fx.pool.predicted(1) == 2.0);
  CHECK(fx.pool.predicted(2) == 0.0);
  CHECK(fx.pool.candidates()[0].rated_neighbors == std::vector<uint32_t>{3});

  CHECK(fx.pool.index_of(2) == size_t{2});
  CHECK_FALSE(fx.pool.index_of(3).has_value());
  const std::vector<uint32_t> ok = {2, 0};
  CHECK(fx.pool.resolve(ok) == std::vector<size_t>{2, 0});
  const std::vector<uint32_t> invoked = {3};
  CHECK_THROWS_AS(fx.pool.resolve(invoked), std::invalid_argument);
  const std::vector<uint32_t> dup = {0, 0};
  CHECK_THROWS_AS(fx.pool.resolve(dup), std::invalid_argument);

  // Nonzero predictions substitute into the target user's column, so the
  // support of a predicted-but-never-invoked service is {target column}.
  CHECK(fx.pool.support(0).test(0));
  CHECK(fx.pool.support(2).count() == 0);
  CHECK(fx.pool.pair_dissimilarity(0, 1) == 0.0);
  CHECK(fx.pool.pair_dissimilarity(0, 2) == 1.0);
  CHECK(fx.pool.pair_dissimilarity(2, 2) == 0.0);  // empty vs empty
}

TEST_CASE("a restricted pool keeps only the chosen candidates") {
  const TieFixture fx;
  const std::vector<size_t> keep = {2, 0};
  const CandidatePool sub = fx.pool.restricted(keep);
  REQUIRE(sub.size() == 2);
  CHECK(sub.total_services() == 4);
  CHECK(sub.user_id() == 7);
  CHECK(sub.candidates()[0].service_id == 0);
  CHECK(sub.candidates()[1].service_id == 2);
  CHECK(sub.predicted(0) == 2.0);
  CHECK(sub.predicted(1) == 0.0);
  CHECK_FALSE(sub.index_of(1).has_value());
  CHECK(sub.pair_dissimilarity(0, 1) == fx.pool.pair_dissimilarity(0, 2));

  const auto list = greedy_topk(fx.graph, sub, 2, 0.0, 0.0);
  CHECK(list.services == std::vector<uint32_t>{0, 2});

  const std::vector<size_t> dup = {0, 0};
  CHECK_THROWS_AS(fx.pool.restricted(dup), std::invalid_argument);
  const std::vector<size_t> oob = {5};
  CHECK_THROWS_AS(fx.pool.restricted(oob), std::out_of_range);
}

TEST_CASE("objective and surrogate on a hand-computed instance") {
  const DisjointFixture fx;
  REQUIRE(fx.pool.size() == 3);

  // Pairwise dissimilarities 0.5, 1.0, 0.5 across the three supports.
  CHECK(fx.pool.pair_dissimilarity(0, 1) == doctest::Approx(0.5));
  CHECK(fx.pool.pair_dissimilarity(0, 2) == doctest::Approx(1.0));
  CHECK(fx.pool.pair_dissimilarity(1, 2) == doctest::Approx(0.5));

  // The bitset route agrees with the public-vector route (no substitution
  // here: every prediction is 0).
  for (size_t a = 0; a < 3; ++a) {
    for (size_t b = 0; b < 3; ++b) {
      CHECK(fx.pool.pair_dissimilarity(a, b) ==
            doctest::Approx(jaccard_dissimilarity(fx.data.service_row(a),
                                                  fx.data.service_row(b))));
    }
  }

  const std::vector<uint32_t> all = {0, 1, 2};
  CHECK(accuracy_value(fx.pool, all) == 0.0);
  CHECK(direct_diversity(fx.pool, all) == doctest::Approx(2.0));
  CHECK(expansion_ratio(fx.graph, all) == doctest::Approx(1.0));

  const double lambda = 0.5, xi = 0.3;
  const double f = objective_value(fx.graph, fx.pool, all, lambda, xi);
  const double fp = surrogate_value(fx.graph, fx.pool, all, lambda, xi);
  CHECK(f == doctest::Approx(0.8));
  CHECK(fp == doctest::Approx(0.55));
  CHECK(f - fp == doctest::Approx(0.25));

  const std::vector<uint32_t> empty;
  CHECK(objective_value(fx.graph, fx.pool, empty, lambda, xi) == 0.0);
  CHECK(surrogate_value(fx.graph, fx.pool, empty, lambda, xi) == 0.0);
}

TEST_CASE("objective minus surrogate is half the monotone part") {
  Rng rng(0xF00D);
  size_t ran = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto data = test::random_platform(10, 6, rng, 0.5);
    const auto graph = test::random_graph(10, 0.3, rng);
    const auto pool = CandidatePool::build(graph, data, 0);
    if (pool.size() < 2) continue;
    ++ran;
    const double lambda = rng.uniform(0.0, 0.5);
    const double xi = rng.uniform(0.0, 0.5);
    std::vector<uint32_t> subset;
    for (const auto& c : pool.candidates()) {
      if (rng.uniform() < 0.5) subset.push_back(c.service_id);
    }
    const double f = objective_value(graph, pool, subset, lambda, xi);
    const double fp = surrogate_value(graph, pool, subset, lambda, xi);
    const double monotone =
        accuracy_value(pool, subset) + lambda * expansion_ratio(graph, subset);
    CHECK(std::abs((f - fp) - 0.5 * monotone) <= 1e-12);
    CHECK(f - fp >= -1e-12);  // surrogate never exceeds the objective
  }
  CHECK(ran >= 40);
}

TEST_CASE("greedy picks the highest prediction and breaks ties to lowest id") {
  const TieFixture fx;

  const auto one = greedy_topk(fx.graph, fx.pool, 1, 0.0, 0.0);
  CHECK(one.services == std::vector<uint32_t>{0});
  CHECK_FALSE(one.truncated);
  CHECK(one.steps[0].predicted == 2.0);

  const auto three = greedy_topk(fx.graph, fx.pool, 3, 0.0, 0.0);
  CHECK(three.services == std::vector<uint32_t>{0, 1, 2});

  const auto five = greedy_topk(fx.graph, fx.pool, 5, 0.0, 0.0);
  CHECK(five.services.size() == 3);
  CHECK(five.truncated);

  const auto via_query =
      recommend_for_user(fx.graph, fx.data, {.user_id = 7, .k = 2});
  CHECK(via_query.services == std::vector<uint32_t>{0, 1});
}

TEST_CASE("greedy chases diversity once accuracy is flat") {
  const DisjointFixture fx;
  // All predictions are 0; after picking 0, candidate 2 (dissimilarity 1.0
  // to 0) beats candidate 1 (0.5).
  const auto list = greedy_topk(fx.graph, fx.pool, 3, 0.5, 0.3);
  CHECK(list.services == std::vector<uint32_t>{0, 2, 1});
  CHECK(list.steps.back().f_prime == doctest::Approx(0.55));
  CHECK(list.steps.back().beta == doctest::Approx(2.0));
}

TEST_CASE("greedy argument errors") {
  const TieFixture fx;
  CHECK_THROWS_AS(greedy_topk(fx.graph, fx.pool, 0, 0.0, 0.0),
                  std::invalid_argument);

  const auto everything = test::make_platform(1, {5}, {{1.0}, {2.0}});
  const auto g2 = make_graph(2, {});
  const auto empty_pool = CandidatePool::build(g2, everything, 5);
  CHECK(empty_pool.size() == 0);
  CHECK_THROWS_AS(greedy_topk(g2, empty_pool, 1, 0.0, 0.0),
                  EmptyCandidatesError);
  CHECK_THROWS_AS(brute_force_topk(g2, empty_pool, 1, 0.0, 0.0),
                  EmptyCandidatesError);

  const auto g3 = make_graph(3, {});
  CHECK_THROWS_AS(greedy_topk(g3, fx.pool, 1, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("greedy trace matches the surrogate recomputed from scratch") {
  Rng rng(0xBEEF);
  size_t ran = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto data = test::random_platform(12, 5, rng, 0.5);
    const auto graph = test::random_graph(12, 0.3, rng);
    const auto pool = CandidatePool::build(graph, data, 0);
    if (pool.size() < 2) continue;
    ++ran;
    const double lambda = rng.uniform(0.0, 0.5);
    const double xi = rng.uniform(0.0, 0.5);
    const auto list = greedy_topk(graph, pool, 4, lambda, xi);

    std::vector<uint32_t> prefix;
    for (size_t t = 0; t < list.services.size(); ++t) {
      prefix.push_back(list.services[t]);
      const auto& step = list.steps[t];
      CHECK(std::abs(step.f_prime -
                     surrogate_value(graph, pool, prefix, lambda, xi)) <= 1e-12);
      CHECK(std::abs(step.acc - accuracy_value(pool, prefix)) <= 1e-12);
      CHECK(std::abs(step.alpha - expansion_ratio(graph, prefix)) <= 1e-12);
      CHECK(std::abs(step.beta - direct_diversity(pool, prefix)) <= 1e-12);
    }
  }
  CHECK(ran >= 25);
}

TEST_CASE("each greedy pick is a locally optimal surrogate step") {
  Rng rng(0xCAFE);
  size_t ran = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = test::random_platform(11, 5, rng, 0.5);
    const auto graph = test::random_graph(11, 0.35, rng);
    const auto pool = CandidatePool::build(graph, data, 0);
    if (pool.size() < 3) continue;
    ++ran;
    const double lambda = rng.uniform(0.0, 0.5);
    const double xi = rng.uniform(0.0, 0.5);
    const auto list = greedy_topk(graph, pool, 3, lambda, xi);

    std::vector<uint32_t> prefix;
    for (size_t t = 0; t < list.services.size(); ++t) {
      std::vector<uint32_t> with_pick(prefix);
      with_pick.push_back(list.services[t]);
      const double picked =
          surrogate_value(graph, pool, with_pick, lambda, xi);
      for (const auto& cand : pool.candidates()) {
        if (std::find(with_pick.begin(), with_pick.end(), cand.service_id) !=
            with_pick.end()) {
          continue;
        }
        std::vector<uint32_t> alt(prefix);
        alt.push_back(cand.service_id);
        CHECK(picked >= surrogate_value(graph, pool, alt, lambda, xi) - 1e-9);
      }
      prefix = with_pick;
    }
  }
  CHECK(ran >= 20);
}

TEST_CASE("exhaustive search fundamentals") {
  const DisjointFixture fx;

  // Under lambda = 0 every subset ties at F = 0, so the lexicographically
  // smallest pair wins.
  const auto tied = brute_force_topk(fx.graph, fx.pool, 2, 0.0, 0.0);
  CHECK(tied.services == std::vector<uint32_t>{0, 1});
  CHECK(tied.f_value == 0.0);

  // With the diversity term on, the maximally dissimilar pair {0, 2} wins.
  const auto best = brute_force_topk(fx.graph, fx.pool, 2, 0.5, 0.3);
  CHECK(best.services == std::vector<uint32_t>{0, 2});
  CHECK(best.f_value == doctest::Approx(0.5 * (2.0 / 3.0 + 0.3)));

  // k >= pool size selects everything.
  const auto full = brute_force_topk(fx.graph, fx.pool, 9, 0.5, 0.3);
  CHECK(full.services == std::vector<uint32_t>{0, 1, 2});
  CHECK(full.f_value == doctest::Approx(0.8));

  CHECK_THROWS_AS(brute_force_topk(fx.graph, fx.pool, 0, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("exhaustive search refuses oversized instances") {
  std::vector<std::vector<double>> rows(30, std::vector<double>{1.0, 0.0});
  const auto data = test::make_platform(1, {10, 11}, rows);
  const auto graph = make_graph(30, {});
  const auto pool = CandidatePool::build(graph, data, 11);
  REQUIRE(pool.size() == 30);

  // C(30, 15) = 155117520 blows the default budget.
  CHECK_THROWS_AS(brute_force_topk(graph, pool, 15, 0.1, 0.1), TooLargeError);
  CHECK_THROWS_AS(brute_force_topk(graph, pool, 3, 0.1, 0.1, 4059),
                  TooLargeError);  // C(30,3) = 4060
  CHECK_NOTHROW(brute_force_topk(graph, pool, 3, 0.1, 0.1, 4060));
}

TEST_CASE("greedy is within half of the exhaustive optimum") {
  Rng rng(0x5EED);
  size_t ran = 0;
  double worst_ratio = 1.0;
  for (int trial = 0; trial < 80 && ran < 50; ++trial) {
    const auto data = test::random_platform(10, 6, rng, 0.5);
    const auto graph = test::random_graph(10, 0.3, rng);
    const auto pool = CandidatePool::build(graph, data, 0);
    if (pool.size() < 3) continue;
    ++ran;
    const double lambda = rng.uniform(0.0, 0.5);
    const double xi = rng.uniform(0.0, 0.5);
    const size_t k = 1 + rng.below(3);

    const auto greedy = greedy_topk(graph, pool, k, lambda, xi);
    const auto oracle = brute_force_topk(graph, pool, k, lambda, xi);
    const double f_greedy =
        objective_value(graph, pool, greedy.services, lambda, xi);

    CHECK(oracle.f_value >= f_greedy - 1e-9);  // the oracle really is optimal
    CHECK(f_greedy >= 0.5 * oracle.f_value - 1e-9);
    if (oracle.f_value > 0) {
      worst_ratio = std::min(worst_ratio, f_greedy / oracle.f_value);
    }
  }
  CHECK(ran >= 50);
  CHECK(worst_ratio >= 0.5);
}

TEST_CASE("the monotone objective part has diminishing returns") {
  Rng rng(0xAB1E);
  size_t ran = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = test::random_platform(14, 5, rng, 0.5);
    const auto graph = test::random_graph(14, 0.3, rng);
    const auto pool = CandidatePool::build(graph, data, 0);
    if (pool.size() < 3) continue;
    ++ran;
    const auto check =
        check_submodular_phi(graph, pool, 400, rng.next_u64(), 0.35);
    CHECK(check.passed);
    CHECK(check.violations == 0);
    CHECK(check.max_violation == 0.0);
    CHECK(check.trials == 400);
  }
  CHECK(ran >= 6);

  const auto tiny = test::make_platform(1, {5}, {{0.0}, {3.0}});
  const auto g2 = make_graph(2, {});
  const auto one = CandidatePool::build(g2, tiny, 5);
  REQUIRE(one.size() == 1);
  CHECK_THROWS_AS(check_submodular_phi(g2, one, 10, 1, 0.1),
                  std::invalid_argument);
}
