#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evaba/types.hpp"

namespace evaba {

struct CryptoError : std::runtime_error {
  explicit CryptoError(const std::string& what) : std::runtime_error(what) {}
};
struct InsufficientShares : CryptoError {
  InsufficientShares(std::size_t have, std::size_t need)
      : CryptoError("insufficient shares: have " + std::to_string(have) + ", need " +
                    std::to_string(need)) {}
};
struct MixedMessages : CryptoError {
  MixedMessages() : CryptoError("shares reference different messages") {}
};
struct InvalidShare : CryptoError {
  explicit InvalidShare(PartyId signer)
      : CryptoError("invalid share from signer " + std::to_string(signer)), signer(signer) {}
  PartyId signer;
};
struct ConfigError : CryptoError {
  explicit ConfigError(const std::string& what) : CryptoError(what) {}
};

struct CryptoParams {
  std::uint32_t n = 0;  // party count
  std::uint32_t t = 0;  // signing threshold (shares needed); n - f for this protocol
  std::uint32_t f = 0;  // fault bound
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError unless n = 3f+1 and f < t <= n
  std::uint32_t quorum() const { return n - f; }
  std::uint32_t coin_threshold() const { return f + 1; }
};

struct SignShare {
  PartyId signer = 0;
  Digest message_digest{};
  Bytes share_bytes;
};

struct ThresholdSignature {
  Digest message_digest{};
  Bytes sig_bytes;

  bool operator==(const ThresholdSignature& o) const = default;
};

struct CoinShare {
  PartyId signer = 0;
  Digest tag_digest{};
  Bytes share_bytes;
};

/// One party's slice of the dealt key material. Signature and coin shares
/// live in independent key domains so one can never stand in for the other.
struct PartyKeys {
  PartyId id = 0;
  Digest sig_key{};
  Digest coin_key{};
};

/// Verification side of the test scheme. In the stand-in MAC construction
/// the verification keys coincide with the signing keys; a pairing-based
/// scheme would carry group elements here instead. Protocol modules only see
/// this interface.
struct PublicKeySet {
  CryptoParams params;
  std::vector<Digest> sig_keys;   // index signer-1
  std::vector<Digest> coin_keys;  // index signer-1
  Digest sig_group_key{};
  Digest coin_group_key{};
};

struct KeyMaterial {
  CryptoParams params;
  PublicKeySet public_set;
  std::vector<PartyKeys> secrets;  // index id-1

  const PartyKeys& keys_for(PartyId id) const { return secrets.at(id - 1); }

  /// Self-describing binary file: magic "EVTC", version byte, params, share table.
  void save(const std::string& path) const;
  static KeyMaterial load(const std::string& path);
  Bytes serialize() const;
  static KeyMaterial deserialize(const Bytes& b);
};

/// Dealer setup. Deterministic function of (params, params.seed); every id
/// in 1..n receives exactly one share per domain.
KeyMaterial deal(const CryptoParams& params);

SignShare sign_share(const PartyKeys& secret, const Bytes& message);
bool share_validate(const PublicKeySet& pub, const SignShare& share, const Bytes& message);

/// Combines >= t distinct-signer valid shares on one message. The result is a
/// pure function of (keys, message): any qualifying subset yields identical
/// bytes. Throws MixedMessages / InvalidShare / InsufficientShares.
ThresholdSignature combine(const PublicKeySet& pub, const std::vector<SignShare>& shares,
                           const Bytes& message);
bool threshold_validate(const PublicKeySet& pub, const ThresholdSignature& sig,
                        const Bytes& message);

CoinShare coin_share(const PartyKeys& secret, const Bytes& tag);
bool coin_share_verify(const PublicKeySet& pub, const CoinShare& share, const Bytes& tag);

/// Threshold coin toss: >= f+1 distinct-signer valid shares over tag open a
/// pseudo-random ascending s-subset of {1..range_n}. Output depends only on
/// (tag, dealer seed), never on which share subset was supplied.
std::vector<PartyId> coin_toss(const PublicKeySet& pub, const Bytes& tag,
                               const std::vector<CoinShare>& shares, std::uint32_t range_n,
                               std::uint32_t s);

}  // namespace evaba
