#include "evaba/crypto.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "evaba/codec.hpp"
#include "evaba/rng.hpp"
#include "evaba/sha256.hpp"

namespace evaba {

namespace {

// Domain bytes keep signature shares, combined signatures, coin shares and
// coin openings mutually unverifiable.
constexpr std::uint8_t kDomSigShare = 'S';
constexpr std::uint8_t kDomSigGroup = 'G';
constexpr std::uint8_t kDomCoinShare = 'C';
constexpr std::uint8_t kDomCoinGroup = 'R';

Digest master_key(const CryptoParams& p) {
  ByteWriter w;
  w.u8(0x4b);  // key-derivation tag
  w.u32(p.n);
  w.u32(p.t);
  w.u32(p.f);
  w.u64(p.seed);
  return sha256(w.data());
}

Digest derive(const Digest& master, std::string_view label, std::uint32_t index) {
  ByteWriter w;
  w.u8(0x4c);
  w.raw(reinterpret_cast<const std::uint8_t*>(label.data()), label.size());
  w.u32(index);
  return hmac_sha256(master, w.data());
}

Digest mac(const Digest& key, std::uint8_t domain, const Digest& digest) {
  std::uint8_t buf[33];
  buf[0] = domain;
  std::copy(digest.begin(), digest.end(), buf + 1);
  return hmac_sha256(key, buf, sizeof(buf));
}

bool equal_const(const Bytes& a, const Digest& b) {
  if (a.size() != b.size()) return false;
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc |= a[i] ^ b[i];
  return acc == 0;
}

}  // namespace

void CryptoParams::validate() const {
  if (n != 3 * f + 1) {
    throw ConfigError("n must equal 3f+1 (n=" + std::to_string(n) +
                      ", f=" + std::to_string(f) + ")");
  }
  if (t <= f || t > n) {
    throw ConfigError("threshold t must satisfy f < t <= n (t=" + std::to_string(t) + ")");
  }
}

KeyMaterial deal(const CryptoParams& params) {
  params.validate();
  Digest master = master_key(params);

  KeyMaterial km;
  km.params = params;
  km.public_set.params = params;
  km.public_set.sig_group_key = derive(master, "sig-group", 0);
  km.public_set.coin_group_key = derive(master, "coin-group", 0);
  km.public_set.sig_keys.reserve(params.n);
  km.public_set.coin_keys.reserve(params.n);
  km.secrets.reserve(params.n);
  for (PartyId id = 1; id <= params.n; ++id) {
    PartyKeys pk;
    pk.id = id;
    pk.sig_key = derive(master, "sig-share", id);
    pk.coin_key = derive(master, "coin-share", id);
    km.public_set.sig_keys.push_back(pk.sig_key);
    km.public_set.coin_keys.push_back(pk.coin_key);
    km.secrets.push_back(pk);
  }
  return km;
}

SignShare sign_share(const PartyKeys& secret, const Bytes& message) {
  SignShare s;
  s.signer = secret.id;
  s.message_digest = sha256(message);
  Digest tag = mac(secret.sig_key, kDomSigShare, s.message_digest);
  s.share_bytes.assign(tag.begin(), tag.end());
  return s;
}

bool share_validate(const PublicKeySet& pub, const SignShare& share, const Bytes& message) {
  if (share.signer < 1 || share.signer > pub.params.n) return false;
  Digest md = sha256(message);
  if (md != share.message_digest) return false;
  Digest want = mac(pub.sig_keys[share.signer - 1], kDomSigShare, md);
  return equal_const(share.share_bytes, want);
}

ThresholdSignature combine(const PublicKeySet& pub, const std::vector<SignShare>& shares,
                           const Bytes& message) {
  Digest md = sha256(message);
  for (const auto& s : shares) {
    if (s.message_digest != md) throw MixedMessages();
  }
  std::map<PartyId, const SignShare*> distinct;
  for (const auto& s : shares) {
    if (!share_validate(pub, s, message)) throw InvalidShare(s.signer);
    distinct.emplace(s.signer, &s);
  }
  if (distinct.size() < pub.params.t) throw InsufficientShares(distinct.size(), pub.params.t);

  ThresholdSignature sig;
  sig.message_digest = md;
  Digest tag = mac(pub.sig_group_key, kDomSigGroup, md);
  sig.sig_bytes.assign(tag.begin(), tag.end());
  return sig;
}

bool threshold_validate(const PublicKeySet& pub, const ThresholdSignature& sig,
                        const Bytes& message) {
  Digest md = sha256(message);
  if (md != sig.message_digest) return false;
  Digest want = mac(pub.sig_group_key, kDomSigGroup, md);
  return equal_const(sig.sig_bytes, want);
}

CoinShare coin_share(const PartyKeys& secret, const Bytes& tag) {
  CoinShare s;
  s.signer = secret.id;
  s.tag_digest = sha256(tag);
  Digest t = mac(secret.coin_key, kDomCoinShare, s.tag_digest);
  s.share_bytes.assign(t.begin(), t.end());
  return s;
}

bool coin_share_verify(const PublicKeySet& pub, const CoinShare& share, const Bytes& tag) {
  if (share.signer < 1 || share.signer > pub.params.n) return false;
  Digest td = sha256(tag);
  if (td != share.tag_digest) return false;
  Digest want = mac(pub.coin_keys[share.signer - 1], kDomCoinShare, td);
  return equal_const(share.share_bytes, want);
}

std::vector<PartyId> coin_toss(const PublicKeySet& pub, const Bytes& tag,
                               const std::vector<CoinShare>& shares, std::uint32_t range_n,
                               std::uint32_t s) {
  if (range_n == 0 || s == 0 || s > range_n) throw ConfigError("coin_toss: bad range");
  std::map<PartyId, const CoinShare*> distinct;
  for (const auto& sh : shares) {
    if (!coin_share_verify(pub, sh, tag)) throw InvalidShare(sh.signer);
    distinct.emplace(sh.signer, &sh);
  }
  std::uint32_t need = pub.params.coin_threshold();
  if (distinct.size() < need) throw InsufficientShares(distinct.size(), need);

  // The opening is a PRG keyed by (dealer seed, tag) alone: any valid f+1
  // shares reveal the same subset.
  Digest seed = mac(pub.coin_group_key, kDomCoinGroup, sha256(tag));
  Rng rng = Rng::from_digest(seed);
  return sample_distinct(rng, range_n, s);
}

Bytes KeyMaterial::serialize() const {
  ByteWriter w;
  w.u8('E');
  w.u8('V');
  w.u8('T');
  w.u8('C');
  w.u8(1);  // version
  w.u32(params.n);
  w.u32(params.t);
  w.u32(params.f);
  w.u64(params.seed);
  for (const auto& pk : secrets) {
    w.u32(pk.id);
    w.digest(pk.sig_key);
    w.digest(pk.coin_key);
  }
  return w.take();
}

KeyMaterial KeyMaterial::deserialize(const Bytes& b) {
  ByteReader r(b);
  if (r.u8() != 'E' || r.u8() != 'V' || r.u8() != 'T' || r.u8() != 'C') {
    throw CodecError("not an EVTC key file");
  }
  if (r.u8() != 1) throw CodecError("unsupported EVTC version");
  CryptoParams p;
  p.n = r.u32();
  p.t = r.u32();
  p.f = r.u32();
  p.seed = r.u64();
  // The share table is authoritative for the dealt keys; re-dealing from the
  // embedded seed must reproduce it.
  KeyMaterial km = deal(p);
  for (std::uint32_t i = 0; i < p.n; ++i) {
    PartyId id = r.u32();
    Digest sk = r.digest();
    Digest ck = r.digest();
    if (id != i + 1 || sk != km.secrets[i].sig_key || ck != km.secrets[i].coin_key) {
      throw CodecError("EVTC share table does not match embedded params");
    }
  }
  r.expect_done();
  return km;
}

void KeyMaterial::save(const std::string& path) const {
  Bytes b = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
}

KeyMaterial KeyMaterial::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(b);
}

}  // namespace evaba
