#include <algorithm>
#include <set>

#include "doctest.h"
#include "evaba/codec.hpp"
#include "evaba/crypto.hpp"
#include "evaba/rng.hpp"
#include "evaba/sha256.hpp"

using namespace evaba;

namespace {

CryptoParams params4() { return {4, 3, 1, 7}; }

// Enumeration oracle: all k-subsets of {0..n-1}.
std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace

TEST_CASE("sha256 matches known vectors") {
  CHECK(hex(sha256(Bytes{})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(hex(sha256(to_bytes("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("deal is deterministic and rejects bad params") {
  KeyMaterial a = deal(params4());
  KeyMaterial b = deal(params4());
  CHECK(a.serialize() == b.serialize());

  CHECK_THROWS_AS(deal(CryptoParams{5, 3, 1, 7}), ConfigError);   // n != 3f+1
  CHECK_THROWS_AS(deal(CryptoParams{4, 1, 1, 7}), ConfigError);   // t <= f
  CHECK_THROWS_AS(deal(CryptoParams{4, 5, 1, 7}), ConfigError);   // t > n
  KeyMaterial c = deal(CryptoParams{4, 3, 1, 8});
  CHECK(c.serialize() != a.serialize());
}

TEST_CASE("every t-subset of shares combines to the same validating signature") {
  KeyMaterial km = deal(params4());
  Bytes msg = to_bytes("payload");
  std::vector<SignShare> shares;
  for (PartyId id = 1; id <= 4; ++id) shares.push_back(sign_share(km.keys_for(id), msg));

  std::vector<Bytes> sigs;
  for (const auto& idx : subsets(4, 3)) {
    std::vector<SignShare> sub;
    for (std::size_t i : idx) sub.push_back(shares[i]);
    ThresholdSignature sig = combine(km.public_set, sub, msg);
    CHECK(threshold_validate(km.public_set, sig, msg));
    sigs.push_back(sig.sig_bytes);
  }
  for (const auto& s : sigs) CHECK(s == sigs.front());
}

TEST_CASE("combine error paths") {
  KeyMaterial km = deal(params4());
  Bytes msg = to_bytes("payload");
  std::vector<SignShare> shares;
  for (PartyId id = 1; id <= 4; ++id) shares.push_back(sign_share(km.keys_for(id), msg));

  SUBCASE("insufficient shares") {
    std::vector<SignShare> two{shares[0], shares[1]};
    CHECK_THROWS_AS(combine(km.public_set, two, msg), InsufficientShares);
  }
  SUBCASE("duplicate signers do not count twice") {
    std::vector<SignShare> dup{shares[0], shares[0], shares[1]};
    CHECK_THROWS_AS(combine(km.public_set, dup, msg), InsufficientShares);
  }
  SUBCASE("mixed messages") {
    SignShare other = sign_share(km.keys_for(3), to_bytes("other"));
    std::vector<SignShare> mixed{shares[0], shares[1], other};
    CHECK_THROWS_AS(combine(km.public_set, mixed, msg), MixedMessages);
  }
  SUBCASE("invalid share identifies the culprit") {
    SignShare bad = shares[2];
    bad.share_bytes[5] ^= 0xff;
    std::vector<SignShare> with_bad{shares[0], shares[1], bad};
    try {
      combine(km.public_set, with_bad, msg);
      FAIL("expected InvalidShare");
    } catch (const InvalidShare& e) {
      CHECK(e.signer == 3);
    }
  }
}

TEST_CASE("share validation, determinism and domain separation") {
  KeyMaterial km = deal(params4());
  Bytes msg = to_bytes("message bytes");

  SignShare s2 = sign_share(km.keys_for(2), msg);
  CHECK(s2.signer == 2);
  CHECK(share_validate(km.public_set, s2, msg));
  CHECK(sign_share(km.keys_for(2), msg).share_bytes == s2.share_bytes);

  // all n shares pairwise distinct
  std::set<Bytes> distinct;
  for (PartyId id = 1; id <= 4; ++id) {
    distinct.insert(sign_share(km.keys_for(id), msg).share_bytes);
  }
  CHECK(distinct.size() == 4);

  // flipping any byte of the share invalidates it
  for (std::size_t pos = 0; pos < s2.share_bytes.size(); ++pos) {
    SignShare bad = s2;
    bad.share_bytes[pos] ^= 0x01;
    CHECK_FALSE(share_validate(km.public_set, bad, msg));
  }

  CHECK_FALSE(share_validate(km.public_set, s2, to_bytes("different message")));
}

TEST_CASE("threshold_validate rejects wrong message and fuzzed signatures") {
  KeyMaterial km = deal(params4());
  Bytes msg = to_bytes("m");
  std::vector<SignShare> shares;
  for (PartyId id = 1; id <= 3; ++id) shares.push_back(sign_share(km.keys_for(id), msg));
  ThresholdSignature sig = combine(km.public_set, shares, msg);

  CHECK(threshold_validate(km.public_set, sig, msg));
  CHECK_FALSE(threshold_validate(km.public_set, sig, to_bytes("m'")));

  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    ThresholdSignature fake;
    fake.message_digest = sha256(msg);
    fake.sig_bytes.resize(32);
    for (auto& b : fake.sig_bytes) b = std::uint8_t(rng.next());
    CHECK_FALSE(threshold_validate(km.public_set, fake, msg));
  }
}

TEST_CASE("coin shares verify and never cross domains") {
  KeyMaterial km = deal(params4());
  Bytes tag = to_bytes("tag-1");

  CoinShare c1 = coin_share(km.keys_for(1), tag);
  CHECK(coin_share_verify(km.public_set, c1, tag));
  CHECK_FALSE(coin_share_verify(km.public_set, c1, to_bytes("tag-2")));

  // a signature share presented as a coin share fails
  SignShare s1 = sign_share(km.keys_for(1), tag);
  CoinShare forged;
  forged.signer = 1;
  forged.tag_digest = s1.message_digest;
  forged.share_bytes = s1.share_bytes;
  CHECK_FALSE(coin_share_verify(km.public_set, forged, tag));

  // and vice versa
  SignShare forged_sig;
  forged_sig.signer = 1;
  forged_sig.message_digest = c1.tag_digest;
  forged_sig.share_bytes = c1.share_bytes;
  CHECK_FALSE(share_validate(km.public_set, forged_sig, tag));
}

TEST_CASE("coin_toss is independent of the share subset") {
  KeyMaterial km = deal(params4());
  Bytes tag = to_bytes("v1/elect");
  std::vector<CoinShare> shares;
  for (PartyId id = 1; id <= 4; ++id) shares.push_back(coin_share(km.keys_for(id), tag));

  std::vector<std::vector<PartyId>> outputs;
  for (const auto& idx : subsets(4, 2)) {  // any f+1 = 2 of 4
    std::vector<CoinShare> sub;
    for (std::size_t i : idx) sub.push_back(shares[i]);
    outputs.push_back(coin_toss(km.public_set, tag, sub, 4, 1));
  }
  for (const auto& o : outputs) CHECK(o == outputs.front());

  SUBCASE("s = n exhausts the range, ascending") {
    auto all = coin_toss(km.public_set, tag, shares, 4, 4);
    CHECK(all == std::vector<PartyId>{1, 2, 3, 4});
  }
  SUBCASE("insufficient or invalid shares rejected") {
    std::vector<CoinShare> one{shares[0]};
    CHECK_THROWS_AS(coin_toss(km.public_set, tag, one, 4, 1), InsufficientShares);
    CoinShare bad = shares[1];
    bad.share_bytes[0] ^= 0xff;
    std::vector<CoinShare> with_bad{shares[0], bad};
    CHECK_THROWS_AS(coin_toss(km.public_set, tag, with_bad, 4, 1), InvalidShare);
  }
}

TEST_CASE("coin_toss output is uniform (chi-square over 1e5 tags)") {
  KeyMaterial km = deal(params4());
  const std::uint64_t trials = 100000;
  const std::uint32_t s = 2;
  std::array<std::uint64_t, 5> inclusion{};  // index by party id
  for (std::uint64_t i = 0; i < trials; ++i) {
    ByteWriter w;
    w.u8(0x7a);
    w.u64(i);
    Bytes tag = w.take();
    std::vector<CoinShare> shares;
    for (PartyId id = 1; id <= 2; ++id) shares.push_back(coin_share(km.keys_for(id), tag));
    for (PartyId m : coin_toss(km.public_set, tag, shares, 4, s)) ++inclusion[m];
  }
  double expected = double(trials) * s / 4.0;
  double chi2 = 0;
  for (PartyId id = 1; id <= 4; ++id) {
    double d = double(inclusion[id]) - expected;
    chi2 += d * d / expected;
  }
  // 99th percentile of chi-square with df = 3
  CHECK(chi2 < 11.345);
}

TEST_CASE("unforgeability proxy: fuzzed shares and signatures all rejected") {
  KeyMaterial km = deal(params4());
  Bytes msg = to_bytes("fuzz-target");
  Rng rng(1234);
  int share_hits = 0, sig_hits = 0;
  for (int i = 0; i < 10000; ++i) {
    SignShare s;
    s.signer = PartyId(rng.below(4) + 1);
    s.message_digest = sha256(msg);
    s.share_bytes.resize(32);
    for (auto& b : s.share_bytes) b = std::uint8_t(rng.next());
    if (share_validate(km.public_set, s, msg)) ++share_hits;

    ThresholdSignature t;
    t.message_digest = sha256(msg);
    t.sig_bytes.resize(32);
    for (auto& b : t.sig_bytes) b = std::uint8_t(rng.next());
    if (threshold_validate(km.public_set, t, msg)) ++sig_hits;
  }
  CHECK(share_hits == 0);
  CHECK(sig_hits == 0);
}

TEST_CASE("key material EVTC round-trip") {
  KeyMaterial km = deal(CryptoParams{7, 5, 2, 99});
  Bytes blob = km.serialize();
  CHECK(blob.size() >= 4);
  CHECK(blob[0] == 'E');
  CHECK(blob[1] == 'V');
  CHECK(blob[2] == 'T');
  CHECK(blob[3] == 'C');
  KeyMaterial back = KeyMaterial::deserialize(blob);
  CHECK(back.serialize() == blob);
  CHECK(back.params.n == 7);

  Bytes corrupt = blob;
  corrupt[20] ^= 0x01;
  CHECK_THROWS_AS(KeyMaterial::deserialize(corrupt), CodecError);
}

TEST_CASE("canonical codec round-trips") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t a = rng.next();
    std::uint32_t b = std::uint32_t(rng.next());
    Bytes blob(rng.below(40));
    for (auto& x : blob) x = std::uint8_t(rng.next());

    ByteWriter w;
    w.u8(0x42);
    w.u64(a);
    w.u32(b);
    w.bytes(blob);
    Bytes enc = w.take();

    ByteReader r(enc);
    CHECK(r.u8() == 0x42);
    CHECK(r.u64() == a);
    CHECK(r.u32() == b);
    CHECK(r.bytes() == blob);
    CHECK(r.done());
  }
  ByteReader r(Bytes{0x01});
  r.u8();
  CHECK_THROWS_AS(r.u32(), CodecError);
}
