#include "pdsr/federation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "pdsr/errors.hpp"
#include "pdsr/rng.hpp"

namespace pdsr {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'S', 'R'};
constexpr uint8_t kVersion = 1;
constexpr size_t kHeaderSize = 19;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (uint16_t{p[1]} << 8));
}

uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t{p[i]} << (8 * i);
  return v;
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t{p[i]} << (8 * i);
  return v;
}

size_t packed_bytes(size_t hash_count) { return (hash_count + 7) / 8; }

// Shared layout walk for the strict decoder and the lenient auditor. Fills
// `msg` as far as the bytes allow and reports every structural problem found;
// the decoder throws on the first one, the auditor collects them all.
std::vector<std::string> scan_message(std::span<const uint8_t> bytes,
                                      SignatureMessage* msg) {
  std::vector<std::string> problems;
  if (bytes.size() < kHeaderSize) {
    problems.push_back("message shorter than the 19-byte header");
    return problems;
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    problems.push_back("bad magic (expected \"PDSR\")");
    return problems;
  }
  if (bytes[4] != kVersion) {
    problems.push_back("unsupported version " + std::to_string(bytes[4]));
    return problems;
  }
  const uint32_t platform_id = get_u32(bytes.data() + 5);
  const uint32_t round = get_u32(bytes.data() + 9);
  const uint16_t hash_count = get_u16(bytes.data() + 13);
  const uint32_t count = get_u32(bytes.data() + 15);
  if (msg) {
    msg->platform_id = platform_id;
    msg->round = round;
    msg->hash_count = hash_count;
  }
  if (hash_count == 0) {
    problems.push_back("declared hash_count is zero");
    return problems;
  }
  const size_t record = 8 + packed_bytes(hash_count);
  const size_t expected = kHeaderSize + static_cast<size_t>(count) * record;
  if (bytes.size() < expected) {
    problems.push_back("payload truncated: " + std::to_string(bytes.size()) +
                       " bytes, layout requires " + std::to_string(expected));
    return problems;
  }
  if (bytes.size() > expected) {
    problems.push_back(std::to_string(bytes.size() - expected) +
                       " trailing byte(s) beyond the declared payload");
  }
  std::unordered_set<uint64_t> seen;
  const uint8_t pad_mask =
      hash_count % 8 == 0 ? 0 : static_cast<uint8_t>(0xff << (hash_count % 8));
  for (uint32_t i = 0; i < count; ++i) {
    const uint8_t* rec = bytes.data() + kHeaderSize + static_cast<size_t>(i) * record;
    const uint64_t service_id = get_u64(rec);
    if (!seen.insert(service_id).second) {
      problems.push_back("duplicate record for service " + std::to_string(service_id));
    }
    if (pad_mask && (rec[record - 1] & pad_mask) != 0) {
      problems.push_back("nonzero pad bits in record for service " +
                         std::to_string(service_id));
    }
    if (msg) {
      ServiceSignature sig;
      sig.service_id = static_cast<uint32_t>(service_id);
      sig.bits.resize(hash_count);
      for (size_t b = 0; b < hash_count; ++b) {
        sig.bits[b] = (rec[8 + b / 8] >> (b % 8)) & 1;
      }
      msg->payload.push_back(std::move(sig));
    }
  }
  return problems;
}

}  // namespace

void PlatformDataset::validate() const {
  if (user_ids.empty()) {
    throw std::invalid_argument("platform " + std::to_string(platform_id) +
                                " has no users");
  }
  if (qos.size() != static_cast<size_t>(service_count) * user_ids.size()) {
    throw std::invalid_argument("platform " + std::to_string(platform_id) +
                                ": qos size does not match services x users");
  }
  for (double v : qos) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("platform " + std::to_string(platform_id) +
                                  ": qos entries must be finite and non-negative");
    }
  }
  std::unordered_set<uint32_t> ids(user_ids.begin(), user_ids.end());
  if (ids.size() != user_ids.size()) {
    throw std::invalid_argument("platform " + std::to_string(platform_id) +
                                ": duplicate user ids");
  }
}

std::vector<uint8_t> serialize_message(const SignatureMessage& msg) {
  if (msg.hash_count == 0) {
    throw std::invalid_argument("serialize_message: hash_count must be positive");
  }
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize +
              msg.payload.size() * (8 + packed_bytes(msg.hash_count)));
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  put_u32(out, msg.platform_id);
  put_u32(out, msg.round);
  put_u16(out, msg.hash_count);
  put_u32(out, static_cast<uint32_t>(msg.payload.size()));
  for (const ServiceSignature& sig : msg.payload) {
    if (sig.bits.size() != msg.hash_count) {
      throw std::invalid_argument("serialize_message: signature length mismatch");
    }
    put_u64(out, sig.service_id);
    std::vector<uint8_t> packed(packed_bytes(msg.hash_count), 0);
    for (size_t b = 0; b < sig.bits.size(); ++b) {
      if (sig.bits[b] > 1) {
        throw std::invalid_argument("serialize_message: bits must be 0 or 1");
      }
      packed[b / 8] |= static_cast<uint8_t>(sig.bits[b] << (b % 8));
    }
    out.insert(out.end(), packed.begin(), packed.end());
  }
  return out;
}

SignatureMessage deserialize_message(std::span<const uint8_t> bytes) {
  SignatureMessage msg;
  const auto problems = scan_message(bytes, &msg);
  if (!problems.empty()) throw DecodeError(problems.front());
  return msg;
}

AuditReport audit_privacy(std::span<const uint8_t> bytes) {
  AuditReport report;
  report.violations = scan_message(bytes, nullptr);
  report.passed = report.violations.empty();
  return report;
}

IndexingResult build_indices(std::span<const PlatformDataset> platforms,
                             std::span<const size_t> hash_counts, uint64_t seed,
                             uint32_t round) {
  if (platforms.empty()) {
    throw std::invalid_argument("build_indices: at least one platform required");
  }
  if (hash_counts.size() != platforms.size()) {
    throw std::invalid_argument("build_indices: one hash count per platform required");
  }

  // Order of the `platforms` argument must not matter: process by ascending
  // platform id and seed each family from the id, not the position.
  std::vector<size_t> order(platforms.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return platforms[a].platform_id < platforms[b].platform_id;
  });

  const uint32_t services = platforms.front().service_count;
  for (size_t i = 0; i < platforms.size(); ++i) {
    platforms[i].validate();
    if (platforms[i].service_count != services) {
      throw std::invalid_argument("build_indices: platforms disagree on service count");
    }
    if (hash_counts[i] == 0) {
      throw std::invalid_argument("build_indices: hash counts must be positive");
    }
    if (i + 1 < order.size() &&
        platforms[order[i]].platform_id == platforms[order[i + 1]].platform_id) {
      throw std::invalid_argument("build_indices: duplicate platform id " +
                                  std::to_string(platforms[order[i]].platform_id));
    }
  }

  // Local phase: every platform hashes its own rows and publishes a message.
  const uint64_t round_seed = derive_seed(seed, round);
  IndexingResult result;
  result.transcript.resize(platforms.size());
  for (size_t rank = 0; rank < order.size(); ++rank) {
    const PlatformDataset& platform = platforms[order[rank]];
    const LshFamily family =
        sample_family(platform.user_count(), hash_counts[order[rank]], round_seed,
                      platform.platform_id);
    SignatureMessage msg;
    msg.platform_id = platform.platform_id;
    msg.round = round;
    msg.hash_count = static_cast<uint16_t>(hash_counts[order[rank]]);
    msg.payload.reserve(services);
    for (uint32_t s = 0; s < services; ++s) {
      msg.payload.push_back(hash_vector(family, s, platform.service_row(s)));
    }
    result.transcript[rank] = serialize_message(msg);
  }

  // Assembly phase: concatenate signatures in platform order, reading only
  // the wire transcript.
  result.indices.resize(services);
  for (uint32_t s = 0; s < services; ++s) result.indices[s].service_id = s;
  for (const auto& bytes : result.transcript) {
    const SignatureMessage msg = deserialize_message(bytes);
    if (msg.payload.size() != services) {
      throw DecodeError("message does not cover every service");
    }
    for (const ServiceSignature& sig : msg.payload) {
      if (sig.service_id >= services) {
        throw DecodeError("message names unknown service " +
                          std::to_string(sig.service_id));
      }
      auto& bits = result.indices[sig.service_id].bits;
      bits.insert(bits.end(), sig.bits.begin(), sig.bits.end());
    }
  }
  return result;
}

}  // namespace pdsr
