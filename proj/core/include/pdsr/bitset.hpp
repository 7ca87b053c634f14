#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pdsr {

// Fixed-width bitset sized at runtime. Backs the expanded-set bookkeeping in
// the greedy selector and the support-overlap route for Jaccard dissimilarity,
// where popcount over words beats per-element loops by ~64x.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  size_t size() const { return bits_; }

  void set(size_t i) {
    check(i);
    words_[i >> 6] |= uint64_t{1} << (i & 63);
  }

  bool test(size_t i) const {
    check(i);
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  size_t count() const {
    size_t c = 0;
    for (uint64_t w : words_) c += static_cast<size_t>(std::popcount(w));
    return c;
  }

  Bitset& operator|=(const Bitset& o) {
    check_same(o);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  size_t count_and(const Bitset& o) const {
    check_same(o);
    size_t c = 0;
    for (size_t i = 0; i < words_.size(); ++i) {
      c += static_cast<size_t>(std::popcount(words_[i] & o.words_[i]));
    }
    return c;
  }

  size_t count_or(const Bitset& o) const {
    check_same(o);
    size_t c = 0;
    for (size_t i = 0; i < words_.size(); ++i) {
      c += static_cast<size_t>(std::popcount(words_[i] | o.words_[i]));
    }
    return c;
  }

  bool operator==(const Bitset& o) const { return bits_ == o.bits_ && words_ == o.words_; }

 private:
  void check(size_t i) const {
    if (i >= bits_) throw std::out_of_range("Bitset: index out of range");
  }
  void check_same(const Bitset& o) const {
    if (bits_ != o.bits_) throw std::invalid_argument("Bitset: size mismatch");
  }

  size_t bits_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace pdsr
