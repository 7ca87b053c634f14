#include "pdsr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdsr/rng.hpp"

namespace pdsr {

namespace {

// Stream tags so structure and entries draw from independent generators.
constexpr uint64_t kStructureTag = 0x5752;
constexpr uint64_t kEntriesTag = 0xE7;

}  // namespace

RawDataset generate_wsdream_like(uint64_t seed) {
  // Shape and sparsity of the response-time corpus: 339 users x 5825
  // services, ~70% of entries observed. Services fall into a handful of
  // functional clusters; a user either adopts a cluster (invoking all of
  // its services at a speed specific to that user-cluster pair) or only
  // strays into it occasionally, slowly — invocation is driven by
  // usefulness, which is what couples missingness to QoS in the real
  // data. Entry noise is kept small: replicas of one backend look alike.
  constexpr size_t kUsers = 339;
  constexpr size_t kServices = 5825;
  constexpr size_t kClusters = 7;
  constexpr double kAffinity = 0.68;     // P(user adopts a cluster)
  constexpr double kStrayRate = 0.05;    // P(invoking a non-adopted service)
  constexpr double kNoiseSigma = 0.05;   // per-entry lognormal jitter
  constexpr double kPaceSigma = 0.40;    // user x cluster speed factor
  constexpr double kValueCap = 4.0;      // response-time ceiling, seconds

  Rng structure(derive_seed(seed, kStructureTag));
  std::vector<size_t> cluster(kServices);
  for (auto& c : cluster) c = structure.below(kClusters);

  std::vector<double> base(kClusters);  // fast-path base latency per cluster
  for (auto& b : base) {
    b = std::exp(structure.uniform(std::log(0.32), std::log(0.95)));
  }
  std::vector<uint8_t> affinity(kUsers * kClusters);
  std::vector<double> pace(kUsers * kClusters);
  for (size_t j = 0; j < kUsers; ++j) {
    for (size_t c = 0; c < kClusters; ++c) {
      affinity[j * kClusters + c] = structure.uniform() < kAffinity;
      pace[j * kClusters + c] = std::exp(kPaceSigma * structure.gaussian());
    }
  }

  RawDataset data;
  data.user_count = kUsers;
  data.service_count = kServices;
  data.values.assign(kUsers * kServices, 0.0);

  Rng entries(derive_seed(seed, kEntriesTag));
  for (size_t j = 0; j < kUsers; ++j) {
    for (size_t i = 0; i < kServices; ++i) {
      const size_t c = cluster[i];
      double value;
      if (affinity[j * kClusters + c]) {
        value = base[c] * pace[j * kClusters + c] *
                std::exp(kNoiseSigma * entries.gaussian());
      } else if (entries.uniform() < kStrayRate) {
        // Stray invocation of a service that is a poor fit for this user.
        value = entries.uniform(1.6, 3.4) * std::exp(0.2 * entries.gaussian());
      } else {
        continue;  // never invoked
      }
      data.at(j, i) = std::clamp(value, 0.01, kValueCap);
    }
  }
  return data;
}

RawDataset generate_movielens_like(uint64_t seed) {
  constexpr size_t kUsers = 6040;
  constexpr size_t kMovies = 3952;
  constexpr size_t kClusters = 18;  // genre-ish movie clusters
  constexpr size_t kGroups = 10;    // taste groups
  constexpr double kAffinity = 0.55;
  constexpr double kStrayFactor = 0.60;  // rating rate outside one's taste
  constexpr double kDensityBase = 1.6;
  constexpr double kActivitySigma = 0.9;
  constexpr double kActivityFloor = 0.45;
  constexpr double kRatingNoise = 0.75;
  // 416 casual accounts rate almost nothing, so a 25-rating activity filter
  // retains exactly 5624 users (the 2249 + 3375 platform split).
  constexpr size_t kCasualUsers = 416;
  constexpr size_t kMinRatings = 25;
  constexpr double kCasualActivity = 0.002;

  Rng structure(derive_seed(seed, kStructureTag));
  std::vector<size_t> cluster(kMovies), group(kUsers);
  for (auto& c : cluster) c = structure.below(kClusters);
  for (auto& g : group) g = structure.below(kGroups);

  // Zipf-ish popularity over a random movie permutation, normalized to mean
  // 1; the head of the distribution is what produces strongly-overlapping
  // rating supports between well-known movies.
  std::vector<uint32_t> rank(kMovies);
  for (uint32_t i = 0; i < kMovies; ++i) rank[i] = i;
  structure.shuffle(rank);
  std::vector<double> popularity(kMovies);
  double pop_sum = 0.0;
  for (size_t i = 0; i < kMovies; ++i) {
    popularity[i] = std::pow(static_cast<double>(rank[i]) + 1.0, -0.25);
    pop_sum += popularity[i];
  }
  const double pop_mean = pop_sum / static_cast<double>(kMovies);
  double log_pop_mean = 0.0;
  for (auto& p : popularity) {
    p /= pop_mean;
    log_pop_mean += std::log(p);
  }
  log_pop_mean /= static_cast<double>(kMovies);

  // Lognormal regular-user activity with a floor high enough that regulars
  // clear the rating filter; casual accounts sit far below it.
  std::vector<double> activity(kUsers);
  for (size_t j = 0; j < kUsers; ++j) {
    activity[j] = j < kCasualUsers
                      ? kCasualActivity
                      : std::max(std::exp(kActivitySigma * structure.gaussian() -
                                          0.5 * kActivitySigma * kActivitySigma),
                                 kActivityFloor);
  }

  std::vector<double> preference(kGroups * kClusters);
  std::vector<uint8_t> affinity(kGroups * kClusters);
  for (size_t g = 0; g < kGroups; ++g) {
    for (size_t c = 0; c < kClusters; ++c) {
      preference[g * kClusters + c] = structure.uniform(2.3, 4.3);
      affinity[g * kClusters + c] = structure.uniform() < kAffinity;
    }
  }
  // Popular movies skew slightly better-rated.
  std::vector<double> quality(kMovies);
  for (size_t i = 0; i < kMovies; ++i) {
    quality[i] = 0.30 * (std::log(popularity[i]) - log_pop_mean);
  }

  RawDataset data;
  data.user_count = kUsers;
  data.service_count = kMovies;
  data.values.assign(kUsers * kMovies, 0.0);

  Rng entries(derive_seed(seed, kEntriesTag));
  for (size_t j = 0; j < kUsers; ++j) {
    const size_t g = group[j];
    for (size_t i = 0; i < kMovies; ++i) {
      const size_t c = cluster[i];
      const double fit = affinity[g * kClusters + c] ? 1.0 : kStrayFactor;
      const double p =
          std::min(kDensityBase * activity[j] * popularity[i] * fit, 0.90);
      if (entries.uniform() >= p) continue;
      const double mu =
          preference[g * kClusters + c] + quality[i] + kRatingNoise * entries.gaussian();
      data.at(j, i) = std::clamp(std::round(mu), 1.0, 5.0);
    }
  }

  // Binomial noise can leave a rare regular user a few ratings short of the
  // filter, or push a casual account over it; top regulars up with their
  // most popular unrated movies and trim casual accounts from their least
  // popular ones, so the filter retains exactly kUsers - kCasualUsers.
  std::vector<uint32_t> by_popularity(kMovies);
  for (uint32_t i = 0; i < kMovies; ++i) by_popularity[i] = i;
  std::sort(by_popularity.begin(), by_popularity.end(),
            [&](uint32_t a, uint32_t b) { return popularity[a] > popularity[b]; });
  for (size_t j = 0; j < kUsers; ++j) {
    size_t count = 0;
    for (size_t i = 0; i < kMovies; ++i) count += data.at(j, i) != 0.0;
    if (j < kCasualUsers) {
      for (size_t r = kMovies; count >= kMinRatings && r-- > 0;) {
        const uint32_t i = by_popularity[r];
        if (data.at(j, i) == 0.0) continue;
        data.at(j, i) = 0.0;
        --count;
      }
      continue;
    }
    for (size_t r = 0; count < kMinRatings && r < kMovies; ++r) {
      const uint32_t i = by_popularity[r];
      if (data.at(j, i) != 0.0) continue;
      const double mu = preference[group[j] * kClusters + cluster[i]] +
                        quality[i] + kRatingNoise * entries.gaussian();
      data.at(j, i) = std::clamp(std::round(mu), 1.0, 5.0);
      ++count;
    }
  }
  return data;
}

RawDataset generate_toy(const ToyProfile& profile, uint64_t seed) {
  if (profile.users == 0 || profile.services == 0 ||
      profile.service_clusters == 0 || profile.user_groups == 0) {
    throw std::invalid_argument("generate_toy: all profile counts must be positive");
  }
  Rng structure(derive_seed(seed, kStructureTag));
  std::vector<size_t> cluster(profile.services), group(profile.users);
  for (auto& c : cluster) c = structure.below(profile.service_clusters);
  for (auto& g : group) g = structure.below(profile.user_groups);
  std::vector<double> base(profile.service_clusters);
  for (auto& b : base) b = std::exp(structure.uniform(std::log(0.2), std::log(2.0)));
  std::vector<double> pace(profile.user_groups * profile.service_clusters);
  for (auto& p : pace) p = std::exp(0.4 * structure.gaussian());

  RawDataset data;
  data.user_count = profile.users;
  data.service_count = profile.services;
  data.values.assign(profile.users * profile.services, 0.0);
  Rng entries(derive_seed(seed, kEntriesTag));
  for (size_t j = 0; j < profile.users; ++j) {
    for (size_t i = 0; i < profile.services; ++i) {
      if (entries.uniform() >= profile.observe_prob) continue;
      const double v = base[cluster[i]] *
                       pace[group[j] * profile.service_clusters + cluster[i]] *
                       std::exp(profile.noise_sigma * entries.gaussian());
      data.at(j, i) = std::clamp(v, 0.01, 50.0);
    }
  }
  return data;
}

std::vector<PlatformDataset> make_angle_pair_platforms(
    const std::vector<std::vector<double>>& angles) {
  if (angles.empty()) {
    throw std::invalid_argument("make_angle_pair_platforms: no platforms");
  }
  const size_t pairs = angles.front().size();
  if (pairs == 0) {
    throw std::invalid_argument("make_angle_pair_platforms: no pairs");
  }
  for (const auto& platform_angles : angles) {
    if (platform_angles.size() != pairs) {
      throw std::invalid_argument(
          "make_angle_pair_platforms: ragged angle table");
    }
    for (double t : platform_angles) {
      // QoS vectors are non-negative, so realizable angles live in [0, pi/2].
      if (t < 0.0 || t > std::acos(-1.0) / 2.0) {
        throw std::invalid_argument(
            "make_angle_pair_platforms: angle outside [0, pi/2]");
      }
    }
  }

  std::vector<PlatformDataset> platforms;
  platforms.reserve(angles.size());
  const uint32_t services = static_cast<uint32_t>(2 * pairs);
  const size_t dims = 2 * pairs;
  for (size_t r = 0; r < angles.size(); ++r) {
    PlatformDataset platform;
    platform.platform_id = static_cast<uint32_t>(r + 1);
    platform.service_count = services;
    platform.user_ids.resize(dims);
    for (size_t j = 0; j < dims; ++j) {
      platform.user_ids[j] = static_cast<uint32_t>(10000 * (r + 1) + j);
    }
    platform.qos.assign(static_cast<size_t>(services) * dims, 0.0);
    for (size_t p = 0; p < pairs; ++p) {
      const double t = angles[r][p];
      platform.at(static_cast<uint32_t>(2 * p), 2 * p) = 1.0;
      platform.at(static_cast<uint32_t>(2 * p + 1), 2 * p) = std::cos(t);
      platform.at(static_cast<uint32_t>(2 * p + 1), 2 * p + 1) = std::sin(t);
    }
    platforms.push_back(std::move(platform));
  }
  return platforms;
}

}  // namespace pdsr
