#include "pdsr/graph.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pdsr {

namespace {

void check_vertex(const SimilarityGraph& g, uint32_t v) {
  if (v >= g.vertex_count) {
    throw std::invalid_argument("graph: vertex " + std::to_string(v) +
                                " out of range (M=" + std::to_string(g.vertex_count) +
                                ")");
  }
}

}  // namespace

const std::vector<uint32_t>& SimilarityGraph::neighbors(uint32_t v) const {
  check_vertex(*this, v);
  return adj[v];
}

bool SimilarityGraph::add_edge(uint32_t a, uint32_t b, uint32_t round) {
  check_vertex(*this, a);
  check_vertex(*this, b);
  if (a == b) throw std::invalid_argument("graph: self-loops are not allowed");
  const size_t square = static_cast<size_t>(vertex_count) * vertex_count;
  if (seen_.size() != square) seen_ = Bitset(square);
  const uint64_t key = edge_key(a, b);
  const size_t slot = static_cast<size_t>(key >> 32) * vertex_count +
                      static_cast<uint32_t>(key);
  if (seen_.test(slot)) return false;
  seen_.set(slot);
  edges_.emplace_back(key, round);
  sorted_ = edges_.size() == 1 || (sorted_ && edges_[edges_.size() - 2].first < key);
  adj[a].push_back(b);
  adj[b].push_back(a);
  return true;
}

void SimilarityGraph::ensure_sorted() const {
  if (sorted_) return;
  std::sort(edges_.begin(), edges_.end());
  sorted_ = true;
}

bool SimilarityGraph::has_edge(uint32_t a, uint32_t b) const {
  if (a == b || a >= vertex_count || b >= vertex_count) return false;
  ensure_sorted();
  const uint64_t key = edge_key(a, b);
  const auto it = std::lower_bound(
      edges_.begin(), edges_.end(), key,
      [](const auto& edge, uint64_t k) { return edge.first < k; });
  return it != edges_.end() && it->first == key;
}

uint32_t SimilarityGraph::witness_round(uint32_t a, uint32_t b) const {
  check_vertex(*this, a);
  check_vertex(*this, b);
  ensure_sorted();
  const uint64_t key = edge_key(a, b);
  const auto it = std::lower_bound(
      edges_.begin(), edges_.end(), key,
      [](const auto& edge, uint64_t k) { return edge.first < k; });
  if (it == edges_.end() || it->first != key) {
    throw std::out_of_range("graph: no edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ")");
  }
  return it->second;
}

const std::vector<std::pair<uint64_t, uint32_t>>& SimilarityGraph::edges_by_key()
    const {
  ensure_sorted();
  return edges_;
}

void SimilarityGraph::finalize() {
  for (auto& list : adj) std::sort(list.begin(), list.end());
}

GraphBuild build_graph_traced(std::span<const PlatformDataset> platforms,
                              std::span<const size_t> hash_counts,
                              uint32_t t_rounds, uint64_t seed) {
  if (platforms.empty()) {
    throw std::invalid_argument("build_graph: at least one platform required");
  }
  GraphBuild build;
  SimilarityGraph& g = build.graph;
  g.vertex_count = platforms.front().service_count;
  g.t_rounds = t_rounds;
  g.seed = seed;
  g.adj.resize(g.vertex_count);
  build.transcript.reserve(t_rounds);

  for (uint32_t round = 1; round <= t_rounds; ++round) {
    IndexingResult exchange = build_indices(platforms, hash_counts, seed, round);
    build.transcript.push_back(std::move(exchange.transcript));

    // Bucket services on the whole concatenated index; a bucket holds
    // exactly the services whose indices are identical this round.
    std::unordered_map<std::string, std::vector<uint32_t>> buckets;
    buckets.reserve(g.vertex_count);
    for (const ServiceIndex& index : exchange.indices) {
      std::string key(reinterpret_cast<const char*>(index.bits.data()),
                      index.bits.size());
      buckets[std::move(key)].push_back(index.service_id);
    }
    for (const auto& [key, members] : buckets) {
      for (size_t i = 0; i < members.size(); ++i) {
        for (size_t j = i + 1; j < members.size(); ++j) {
          g.add_edge(members[i], members[j], round);
        }
      }
    }
  }
  g.finalize();
  return build;
}

SimilarityGraph build_graph(std::span<const PlatformDataset> platforms,
                            std::span<const size_t> hash_counts,
                            uint32_t t_rounds, uint64_t seed) {
  return build_graph_traced(platforms, hash_counts, t_rounds, seed).graph;
}

SimilarityGraph make_graph(uint32_t vertex_count,
                           std::span<const std::pair<uint32_t, uint32_t>> edges) {
  SimilarityGraph g;
  g.vertex_count = vertex_count;
  g.t_rounds = 1;
  g.adj.resize(vertex_count);
  for (const auto& [a, b] : edges) g.add_edge(a, b, 1);
  g.finalize();
  return g;
}

std::vector<uint32_t> expanded_set(const SimilarityGraph& graph,
                                   std::span<const uint32_t> subset) {
  std::vector<bool> in(graph.vertex_count, false);
  for (uint32_t v : subset) {
    check_vertex(graph, v);
    in[v] = true;
    for (uint32_t n : graph.adj[v]) in[n] = true;
  }
  std::vector<uint32_t> out;
  for (uint32_t v = 0; v < graph.vertex_count; ++v) {
    if (in[v]) out.push_back(v);
  }
  return out;
}

double expansion_ratio(const SimilarityGraph& graph,
                       std::span<const uint32_t> subset) {
  if (graph.vertex_count == 0) {
    throw std::invalid_argument("expansion_ratio: empty graph");
  }
  return static_cast<double>(expanded_set(graph, subset).size()) /
         static_cast<double>(graph.vertex_count);
}

void write_edge_tsv(std::ostream& out, const SimilarityGraph& graph) {
  out << "# PDSR-graph v1 M=" << graph.vertex_count << " T=" << graph.t_rounds
      << " seed=" << graph.seed << "\n";
  for (const auto& [key, round] : graph.edges_by_key()) {
    out << static_cast<uint32_t>(key >> 32) << '\t'
        << static_cast<uint32_t>(key & 0xffffffffu) << '\t' << round << "\n";
  }
}

}  // namespace pdsr
