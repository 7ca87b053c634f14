#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pdsr {

// A family of random hyperplanes for one platform: `hash_count` Gaussian
// normal vectors of dimension `dim` (one hash bit per normal). Sampling is
// fully determined by (seed, platform_id, round) so that every platform can
// re-derive its family per exchange round without coordination.
struct LshFamily {
  uint32_t platform_id = 0;
  uint64_t seed = 0;
  std::vector<std::vector<double>> normals;  // hash_count x dim

  size_t hash_count() const { return normals.size(); }
  size_t dim() const { return normals.empty() ? 0 : normals.front().size(); }
};

// One service's packed hash bits under a single platform's family.
struct ServiceSignature {
  uint32_t service_id = 0;
  std::vector<uint8_t> bits;  // one byte per hash bit, value 0 or 1
};

// Draw `hash_count` iid standard-normal hyperplane normals of dimension `dim`.
// The stream is seeded from (seed, platform_id) only; callers fold the round
// number into `seed` beforehand.
LshFamily sample_family(size_t dim, size_t hash_count, uint64_t seed,
                        uint32_t platform_id = 0);

// Which side of the hyperplane the vector falls on: 1 iff normal . qos >= 0.
// The boundary itself counts as 1, so the all-zero vector hashes to 1 under
// every normal (it collides with everything rather than nothing).
int hash_bit(std::span<const double> normal, std::span<const double> qos);

// All hash bits of one service vector under one family.
ServiceSignature hash_vector(const LshFamily& family, uint32_t service_id,
                             std::span<const double> qos);

// Angle in [0, pi] between two vectors; invalid for zero vectors.
double angle_between(std::span<const double> a, std::span<const double> b);

// Probability that one random hyperplane assigns both vectors the same bit:
//
//   P[h(a) = h(b)] = 1 - theta / pi
//
// where theta is the angle between them. Monotone decreasing on [0, pi].
double collision_probability(double theta);

// Probability that two services end up adjacent in the similarity graph:
// their indices must agree in at least one of `tables` independent rounds,
// and within a round they must collide on every one of platform r's
// hash_counts[r] hyperplanes, across all platforms:
//
//   P[edge] = 1 - (1 - prod_r (1 - theta_r/pi)^{H_r})^T
//
// `angles` holds the per-platform angle between the pair's QoS vectors.
// tables == 0 yields 0 (no rounds, no edges).
double edge_probability(std::span<const double> angles,
                        std::span<const size_t> hash_counts, size_t tables);

}  // namespace pdsr
