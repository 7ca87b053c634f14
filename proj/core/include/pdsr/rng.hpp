#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace pdsr {

// splitmix64 finalizer. Used for deriving independent child seeds from a
// master seed plus integer tags (platform id, round, repetition, ...).
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
  return splitmix64(master ^ splitmix64(tag ^ 0x517cc1b727220a95ull));
}

inline uint64_t derive_seed(uint64_t master, uint64_t tag_a, uint64_t tag_b) {
  return derive_seed(derive_seed(master, tag_a), tag_b);
}

// Deterministic random source. std::mt19937_64's raw output is pinned by the
// standard, but the distributions on top of it are not; everything downstream
// of the engine here is hand-rolled so that a given seed yields the same
// stream on every toolchain (reruns must be byte-identical).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0,n). Rejection sampling, so no modulo bias.
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via the polar Box-Muller transform (pairs are cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  // Fisher-Yates; std::shuffle is implementation-defined, this is not.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct values from [0,n), in random order.
  std::vector<uint32_t> sample_without_replacement(uint32_t n, uint32_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<uint32_t> pool(n);
    for (uint32_t i = 0; i < n; ++i) pool[i] = i;
    for (uint32_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + below(n - i)]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pdsr
