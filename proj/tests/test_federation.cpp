#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pdsr/errors.hpp"
#include "pdsr/federation.hpp"
#include "pdsr/rng.hpp"
#include "testutil.hpp"

using namespace pdsr;

namespace {

SignatureMessage sample_message() {
  SignatureMessage msg;
  msg.platform_id = 7;
  msg.round = 3;
  msg.hash_count = 3;
  for (uint32_t s = 0; s < 5; ++s) {
    ServiceSignature sig;
    sig.service_id = s;
    sig.bits = {static_cast<uint8_t>(s & 1), static_cast<uint8_t>((s >> 1) & 1), 1};
    msg.payload.push_back(sig);
  }
  return msg;
}

}  // namespace

TEST_CASE("wire layout: header fields, record size, LSB-first packing") {
  const auto bytes = serialize_message(sample_message());
  // 19-byte header + 5 records of (8 id + 1 packed byte for H=3).
  REQUIRE(bytes.size() == 64);
  CHECK(std::memcmp(bytes.data(), "PDSR", 4) == 0);
  CHECK(bytes[4] == 1);                    // version
  CHECK(bytes[5] == 7);                    // platform_id LE
  CHECK(bytes[9] == 3);                    // round LE
  CHECK(bytes[13] == 3);                   // hash_count LE
  CHECK(bytes[15] == 5);                   // count LE
  // Service 3 has bits {1,1,1} -> packed 0b111; its record starts at
  // 19 + 3*9, the packed byte is the record's last.
  CHECK(bytes[19 + 3 * 9 + 8] == 0b111);
  // Service 2: bits {0,1,1} -> LSB-first 0b110.
  CHECK(bytes[19 + 2 * 9 + 8] == 0b110);
}

TEST_CASE("serialize/deserialize round-trips random messages") {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    SignatureMessage msg;
    msg.platform_id = static_cast<uint32_t>(rng.next_u64());
    msg.round = static_cast<uint32_t>(rng.below(1000));
    msg.hash_count = static_cast<uint16_t>(1 + rng.below(19));
    const size_t services = rng.below(40);
    for (size_t s = 0; s < services; ++s) {
      ServiceSignature sig;
      sig.service_id = static_cast<uint32_t>(s);
      sig.bits.resize(msg.hash_count);
      for (auto& b : sig.bits) b = static_cast<uint8_t>(rng.below(2));
      msg.payload.push_back(std::move(sig));
    }
    const SignatureMessage back = deserialize_message(serialize_message(msg));
    CHECK(back.platform_id == msg.platform_id);
    CHECK(back.round == msg.round);
    CHECK(back.hash_count == msg.hash_count);
    REQUIRE(back.payload.size() == msg.payload.size());
    for (size_t s = 0; s < services; ++s) {
      CHECK(back.payload[s].service_id == msg.payload[s].service_id);
      CHECK(back.payload[s].bits == msg.payload[s].bits);
    }
  }
}

TEST_CASE("decoder rejects malformed streams") {
  const auto good = serialize_message(sample_message());

  auto truncated = good;
  truncated.resize(10);
  CHECK_THROWS_AS(deserialize_message(truncated), DecodeError);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_message(bad_magic), DecodeError);

  auto bad_version = good;
  bad_version[4] = 9;
  CHECK_THROWS_AS(deserialize_message(bad_version), DecodeError);

  auto trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserialize_message(trailing), DecodeError);

  auto drained = good;
  drained.pop_back();
  CHECK_THROWS_AS(deserialize_message(drained), DecodeError);

  // Pad bits above H=3 in a packed byte must stay zero.
  auto dirty_pad = good;
  dirty_pad[19 + 8] |= 0x80;
  CHECK_THROWS_AS(deserialize_message(dirty_pad), DecodeError);

  // Duplicate service id: copy record 0's id over record 1's.
  auto duplicated = good;
  std::memcpy(duplicated.data() + 19 + 9, duplicated.data() + 19, 8);
  CHECK_THROWS_AS(deserialize_message(duplicated), DecodeError);

  CHECK_THROWS_AS(deserialize_message(std::vector<uint8_t>{}), DecodeError);
}

TEST_CASE("audit_privacy accepts exactly the wire layout and nothing more") {
  const auto good = serialize_message(sample_message());
  CHECK(audit_privacy(good).passed);

  // A smuggled raw QoS value rides after the declared payload.
  auto smuggled = good;
  const double qos = 0.734;
  const auto* p = reinterpret_cast<const uint8_t*>(&qos);
  smuggled.insert(smuggled.end(), p, p + sizeof(qos));
  const AuditReport report = audit_privacy(smuggled);
  CHECK_FALSE(report.passed);
  REQUIRE_FALSE(report.violations.empty());
  CHECK(report.violations.front().find("trailing") != std::string::npos);

  auto dirty_pad = good;
  dirty_pad[19 + 8] |= 0x40;
  CHECK_FALSE(audit_privacy(dirty_pad).passed);

  CHECK_FALSE(audit_privacy(std::vector<uint8_t>{1, 2, 3}).passed);
}

TEST_CASE("audit and decoder survive random mutations without crashing") {
  const auto good = serialize_message(sample_message());
  Rng rng(1234);
  for (int trial = 0; trial < 2000; ++trial) {
    auto bytes = good;
    const int op = static_cast<int>(rng.below(3));
    if (op == 0 && !bytes.empty()) {
      bytes.resize(rng.below(bytes.size() + 1));
    } else if (op == 1) {
      bytes[rng.below(bytes.size())] = static_cast<uint8_t>(rng.next_u64());
    } else {
      const size_t extra = 1 + rng.below(16);
      for (size_t i = 0; i < extra; ++i) {
        bytes.push_back(static_cast<uint8_t>(rng.next_u64()));
      }
    }
    const AuditReport report = audit_privacy(bytes);
    if (report.passed) {
      CHECK_NOTHROW(deserialize_message(bytes));
    } else {
      CHECK_THROWS_AS(deserialize_message(bytes), DecodeError);
    }
  }
}

TEST_CASE("platform dataset validation") {
  auto p = test::make_platform(1, {10, 11}, {{0.5, 0.0}, {1.0, 2.0}});
  CHECK_NOTHROW(p.validate());

  auto negative = p;
  negative.qos[1] = -0.25;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

  auto nan = p;
  nan.qos[2] = std::nan("");
  CHECK_THROWS_AS(nan.validate(), std::invalid_argument);

  auto dup_users = p;
  dup_users.user_ids = {10, 10};
  CHECK_THROWS_AS(dup_users.validate(), std::invalid_argument);

  auto short_matrix = p;
  short_matrix.qos.pop_back();
  CHECK_THROWS_AS(short_matrix.validate(), std::invalid_argument);

  PlatformDataset no_users;
  no_users.platform_id = 5;
  no_users.service_count = 1;
  CHECK_THROWS_AS(no_users.validate(), std::invalid_argument);
}

TEST_CASE("build_indices concatenates platform signatures by ascending id") {
  // Platform 3 hashes with H=4, platform 5 with H=2; indices must be 6 bits,
  // platform 3's first, regardless of argument order.
  const auto p3 = test::make_platform(3, {30, 31, 32},
                                      {{0.2, 0.9, 0.1}, {0.8, 0.0, 0.4}});
  const auto p5 = test::make_platform(5, {50, 51}, {{1.5, 0.2}, {0.0, 0.7}});
  const std::vector<PlatformDataset> order_a = {p3, p5};
  const std::vector<PlatformDataset> order_b = {p5, p3};
  const std::vector<size_t> h_a = {4, 2}, h_b = {2, 4};

  const IndexingResult res = build_indices(order_a, h_a, 777, 1);
  REQUIRE(res.indices.size() == 2);
  CHECK(res.transcript.size() == 2);
  for (const auto& index : res.indices) CHECK(index.bits.size() == 6);

  // The assembled prefix equals platform 3's own signature bits.
  const LshFamily f3 = sample_family(3, 4, derive_seed(777, 1), 3);
  for (uint32_t s = 0; s < 2; ++s) {
    const auto sig = hash_vector(f3, s, p3.service_row(s));
    const std::vector<uint8_t> prefix(res.indices[s].bits.begin(),
                                      res.indices[s].bits.begin() + 4);
    CHECK(prefix == sig.bits);
  }

  const IndexingResult swapped = build_indices(order_b, h_b, 777, 1);
  for (uint32_t s = 0; s < 2; ++s) {
    CHECK(swapped.indices[s].bits == res.indices[s].bits);
  }

  // Different rounds draw different hyperplane families.
  const IndexingResult round2 = build_indices(order_a, h_a, 777, 2);
  bool any_difference = false;
  for (uint32_t s = 0; s < 2; ++s) {
    any_difference |= round2.indices[s].bits != res.indices[s].bits;
  }
  CHECK(any_difference);
}

TEST_CASE("build_indices rejects inconsistent inputs") {
  const auto p1 = test::make_platform(1, {10}, {{0.5}, {0.2}});
  const auto p2 = test::make_platform(2, {20}, {{0.5}});  // one service only
  CHECK_THROWS_AS(
      build_indices(std::vector<PlatformDataset>{p1, p2}, std::vector<size_t>{1, 1},
                    1, 1),
      std::invalid_argument);

  const auto p1_dup = test::make_platform(1, {30}, {{0.1}, {0.2}});
  CHECK_THROWS_AS(build_indices(std::vector<PlatformDataset>{p1, p1_dup},
                                std::vector<size_t>{1, 1}, 1, 1),
                  std::invalid_argument);

  CHECK_THROWS_AS(
      build_indices(std::vector<PlatformDataset>{p1}, std::vector<size_t>{1, 1}, 1, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      build_indices(std::vector<PlatformDataset>{p1}, std::vector<size_t>{0}, 1, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(build_indices({}, {}, 1, 1), std::invalid_argument);
}

TEST_CASE("every message in a build transcript passes the audit") {
  Rng rng(88);
  const auto p1 = test::random_platform(12, 6, rng);
  auto p2 = test::random_platform(12, 4, rng);
  p2.platform_id = 2;
  for (auto& id : p2.user_ids) id += 100;
  const std::vector<PlatformDataset> platforms = {p1, p2};
  const IndexingResult res =
      build_indices(platforms, std::vector<size_t>{3, 2}, 42, 1);
  for (const auto& message : res.transcript) {
    CHECK(audit_privacy(message).passed);
  }
}
