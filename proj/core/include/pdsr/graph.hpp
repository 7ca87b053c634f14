#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "pdsr/bitset.hpp"
#include "pdsr/federation.hpp"

namespace pdsr {

// Undirected service-similarity graph over the M federated services. Two
// services are adjacent iff their cross-platform indices were identical in at
// least one exchange round; each edge records the earliest such round as its
// witness. No self-loops, no parallel edges. Edges live in a flat array with
// a bitmap for duplicate suppression: dense rounds insert millions of edges,
// and a node-based map would dominate the whole build.
struct SimilarityGraph {
  uint32_t vertex_count = 0;
  uint32_t t_rounds = 0;
  uint64_t seed = 0;
  std::vector<std::vector<uint32_t>> adj;            // sorted neighbor lists

  static uint64_t edge_key(uint32_t a, uint32_t b) {
    if (a > b) std::swap(a, b);
    return (uint64_t{a} << 32) | b;
  }

  size_t edge_count() const { return edges_.size(); }

  bool has_edge(uint32_t a, uint32_t b) const;

  // Earliest round that matched an existing edge; throws std::out_of_range
  // for a non-edge.
  uint32_t witness_round(uint32_t a, uint32_t b) const;

  // All edges as (edge_key, witness round), sorted by key.
  const std::vector<std::pair<uint64_t, uint32_t>>& edges_by_key() const;

  const std::vector<uint32_t>& neighbors(uint32_t v) const;

  // Inserts an undirected edge if absent; keeps the first witness round.
  // Returns whether the edge was new. Self-loops are invalid.
  bool add_edge(uint32_t a, uint32_t b, uint32_t round);

  // Sorts adjacency lists; call once after the last add_edge.
  void finalize();

 private:
  void ensure_sorted() const;

  mutable std::vector<std::pair<uint64_t, uint32_t>> edges_;
  mutable bool sorted_ = true;
  Bitset seen_;  // vertex_count^2 bits; lazily sized on first insert
};

struct GraphBuild {
  SimilarityGraph graph;
  // Wire messages that crossed the platform boundary: [round][platform].
  std::vector<std::vector<std::vector<uint8_t>>> transcript;
};

// Runs T independent exchange rounds and connects services whose assembled
// indices collide in at least one round. Matching is done by bucketing on the
// whole index (equal indices <=> same bucket), which yields exactly the same
// edge set as the all-pairs comparison without the O(M^2) scan.
GraphBuild build_graph_traced(std::span<const PlatformDataset> platforms,
                              std::span<const size_t> hash_counts,
                              uint32_t t_rounds, uint64_t seed);

SimilarityGraph build_graph(std::span<const PlatformDataset> platforms,
                            std::span<const size_t> hash_counts,
                            uint32_t t_rounds, uint64_t seed);

// Fixed-topology constructor for tests and oracle instances.
SimilarityGraph make_graph(uint32_t vertex_count,
                           std::span<const std::pair<uint32_t, uint32_t>> edges);

// The subset plus every graph-neighbor of its members, sorted ascending.
std::vector<uint32_t> expanded_set(const SimilarityGraph& graph,
                                   std::span<const uint32_t> subset);

// |expanded_set| / vertex_count, the fraction of the service universe a
// recommendation can reach through one hop.
double expansion_ratio(const SimilarityGraph& graph,
                       std::span<const uint32_t> subset);

// Deterministic edge list dump:
//   # PDSR-graph v1 M=<M> T=<T> seed=<seed>
//   i <tab> j <tab> witness        (0-based, i < j, sorted by (i, j))
void write_edge_tsv(std::ostream& out, const SimilarityGraph& graph);

}  // namespace pdsr
