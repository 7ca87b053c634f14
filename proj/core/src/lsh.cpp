#include "pdsr/lsh.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pdsr/rng.hpp"

namespace pdsr {

LshFamily sample_family(size_t dim, size_t hash_count, uint64_t seed,
                        uint32_t platform_id) {
  if (dim == 0) throw std::invalid_argument("sample_family: dim must be positive");
  if (hash_count == 0) {
    throw std::invalid_argument("sample_family: hash_count must be positive");
  }
  LshFamily family;
  family.platform_id = platform_id;
  family.seed = seed;
  Rng rng(derive_seed(seed, platform_id));
  family.normals.resize(hash_count);
  for (auto& normal : family.normals) {
    normal.resize(dim);
    for (double& component : normal) component = rng.gaussian();
  }
  return family;
}

int hash_bit(std::span<const double> normal, std::span<const double> qos) {
  if (normal.size() != qos.size()) {
    throw std::invalid_argument("hash_bit: dimension mismatch");
  }
  if (normal.empty()) throw std::invalid_argument("hash_bit: empty vectors");
  double dot = 0.0;
  for (size_t i = 0; i < normal.size(); ++i) dot += normal[i] * qos[i];
  return dot >= 0.0 ? 1 : 0;
}

ServiceSignature hash_vector(const LshFamily& family, uint32_t service_id,
                             std::span<const double> qos) {
  if (qos.size() != family.dim()) {
    throw std::invalid_argument("hash_vector: vector dimension does not match family");
  }
  ServiceSignature sig;
  sig.service_id = service_id;
  sig.bits.reserve(family.hash_count());
  for (const auto& normal : family.normals) {
    sig.bits.push_back(static_cast<uint8_t>(hash_bit(normal, qos)));
  }
  return sig;
}

double angle_between(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("angle_between: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("angle_between: zero vector has no direction");
  }
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

double collision_probability(double theta) {
  if (theta < 0.0 || theta > std::numbers::pi) {
    throw std::invalid_argument("collision_probability: theta outside [0, pi]");
  }
  return 1.0 - theta / std::numbers::pi;
}

double edge_probability(std::span<const double> angles,
                        std::span<const size_t> hash_counts, size_t tables) {
  if (angles.size() != hash_counts.size()) {
    throw std::invalid_argument("edge_probability: one angle per platform required");
  }
  if (angles.empty()) {
    throw std::invalid_argument("edge_probability: at least one platform required");
  }
  if (tables == 0) return 0.0;
  double per_round = 1.0;  // prod_r (1 - theta_r/pi)^{H_r}
  for (size_t r = 0; r < angles.size(); ++r) {
    if (hash_counts[r] == 0) {
      throw std::invalid_argument("edge_probability: hash count must be positive");
    }
    per_round *= std::pow(collision_probability(angles[r]),
                          static_cast<double>(hash_counts[r]));
  }
  return 1.0 - std::pow(1.0 - per_round, static_cast<double>(tables));
}

}  // namespace pdsr
