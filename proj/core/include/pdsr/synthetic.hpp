#pragma once

#include <cstdint>

#include "pdsr/eval.hpp"

namespace pdsr {

// Seeded stand-in generators for the two evaluation corpora, used when the
// real files are not on disk. Both produce cluster-structured matrices: the
// graph stage can only work if services fall into groups with small pairwise
// angles inside a group and large angles across groups, which is exactly the
// structure invocation data exhibits in the wild.

// Response-time-style matrix, 339 users x 5825 services, ~28.6% missing.
// Services form latency clusters (log-uniform base latency, shared by the
// cluster); users form groups whose cluster affinity drives missingness, with
// per-entry lognormal jitter on top. Values in seconds, capped.
RawDataset generate_wsdream_like(uint64_t seed);

// Rating-style matrix, 6040 users x 3952 movies, integer values 1..5, dense
// rating supports (popularity is Zipf-like with a soft exponent, activity
// lognormal). 416 casual accounts fall below a 25-rating activity filter, so
// the filtered population is exactly 5624 = 2249 + 3375; group x cluster
// preference centers the rating scale per pair.
RawDataset generate_movielens_like(uint64_t seed);

// Small, fully controlled matrix for unit and property tests.
struct ToyProfile {
  size_t users = 20;
  size_t services = 40;
  size_t service_clusters = 5;
  size_t user_groups = 4;
  double observe_prob = 0.7;
  double noise_sigma = 0.25;
};

RawDataset generate_toy(const ToyProfile& profile, uint64_t seed);

// R=2-platform fixture with exactly known per-platform angles for designated
// service pairs. Services 2p and 2p+1 form pair p: on platform r their
// vectors live in the pair's private 2-D block of user columns, at angle
// angles[r][p] — (1, 0) versus (cos t, sin t) — so the angle is exact.
// Cross-pair vectors occupy disjoint blocks (orthogonal), which keeps
// designated pairs independent of each other.
std::vector<PlatformDataset> make_angle_pair_platforms(
    const std::vector<std::vector<double>>& angles);

}  // namespace pdsr
