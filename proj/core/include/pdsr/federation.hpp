#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdsr/lsh.hpp"

namespace pdsr {

// One platform's private slice of the QoS matrix: the same M services, rows,
// observed by that platform's own users, columns. A zero entry means the user
// never invoked the service. This data never leaves the platform; only hash
// signatures derived from it do.
struct PlatformDataset {
  uint32_t platform_id = 0;
  std::vector<uint32_t> user_ids;  // global user ids, one per column
  uint32_t service_count = 0;
  std::vector<double> qos;  // row-major service_count x user_ids.size()

  size_t user_count() const { return user_ids.size(); }

  double at(uint32_t service, size_t user_col) const {
    return qos[static_cast<size_t>(service) * user_ids.size() + user_col];
  }
  double& at(uint32_t service, size_t user_col) {
    return qos[static_cast<size_t>(service) * user_ids.size() + user_col];
  }

  std::span<const double> service_row(uint32_t service) const {
    return {qos.data() + static_cast<size_t>(service) * user_ids.size(),
            user_ids.size()};
  }

  std::optional<size_t> user_column(uint32_t user_id) const {
    for (size_t c = 0; c < user_ids.size(); ++c) {
      if (user_ids[c] == user_id) return c;
    }
    return std::nullopt;
  }

  // Shape and value sanity; throws std::invalid_argument on violation.
  void validate() const;
};

// The only artifact a platform publishes in one exchange round: per-service
// hash signatures under that platform's current hyperplane family. Contains
// no QoS values, user ids, or vector norms.
struct SignatureMessage {
  uint32_t platform_id = 0;
  uint32_t round = 0;
  uint16_t hash_count = 0;
  std::vector<ServiceSignature> payload;  // one entry per service
};

// A service's index for one round: every platform's signature bits for that
// service, concatenated in ascending platform-id order.
struct ServiceIndex {
  uint32_t service_id = 0;
  std::vector<uint8_t> bits;  // sum_r H_r entries, each 0 or 1
};

// Wire format (all integers little-endian):
//
//   magic "PDSR" | version u8 = 1 | platform_id u32 | round u32
//   | hash_count u16 | count u32
//   | count x ( service_id u64, ceil(hash_count/8) bytes of packed bits )
//
// Bits are packed LSB-first within each byte; pad bits in the final byte of
// each record are zero. The 19-byte header is followed only by these records:
// any trailing bytes make the message undecodable.
std::vector<uint8_t> serialize_message(const SignatureMessage& msg);

// Strict inverse of serialize_message. Throws DecodeError on bad magic or
// version, truncation, trailing bytes, zero hash_count, nonzero pad bits, or
// duplicate service ids.
SignatureMessage deserialize_message(std::span<const uint8_t> bytes);

struct AuditReport {
  bool passed = false;
  std::vector<std::string> violations;  // empty iff passed
};

// Checks that a byte stream is exactly a well-formed signature message and
// nothing more. The useful property is the "nothing more": a payload record
// is 8 + ceil(H/8) bytes no matter what the underlying QoS values are, so a
// message carrying anything beyond packed hash bits (e.g. an appended raw
// QoS value) no longer matches its own declared layout and fails here.
AuditReport audit_privacy(std::span<const uint8_t> bytes);

struct IndexingResult {
  std::vector<ServiceIndex> indices;            // indexed by service id
  std::vector<std::vector<uint8_t>> transcript;  // one wire message per platform
};

// One full exchange round: every platform samples its hyperplane family from
// (seed, round, platform_id), hashes its own rows, and publishes a signature
// message. Indices are then assembled from the serialized transcript alone,
// never from the platform matrices, so the transcript *is* the trust
// boundary. The result is invariant to the order platforms appear in.
IndexingResult build_indices(std::span<const PlatformDataset> platforms,
                             std::span<const size_t> hash_counts, uint64_t seed,
                             uint32_t round);

}  // namespace pdsr
