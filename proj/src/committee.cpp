#include "evaba/committee.hpp"

#include <algorithm>
#include <numeric>

#include "evaba/codec.hpp"

namespace evaba {

namespace {

constexpr std::uint8_t kTagCommittee = 0x12;
constexpr std::uint8_t kTagElect = 0x13;

Bytes coin_tag(std::uint8_t tag, std::uint64_t instance, ViewId view) {
  ByteWriter w;
  w.u8(tag);
  w.u64(instance);
  w.u64(view);
  return w.take();
}

unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
  while (b != 0) {
    unsigned __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// C(n, k) with interleaved division; exact for the sizes this harness uses.
unsigned __int128 binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 result = 1;
  for (std::uint32_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

std::string u128_str(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(char('0' + int(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace

bool Committee::contains(PartyId id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

Bytes committee_tag(std::uint64_t instance, ViewId view) {
  return coin_tag(kTagCommittee, instance, view);
}

Bytes elect_tag(std::uint64_t instance, ViewId view) {
  return coin_tag(kTagElect, instance, view);
}

double Rational::value() const {
  if (num == 0) return 0.0;
  return double(static_cast<long double>(num) / static_cast<long double>(den));
}

std::string Rational::str() const { return u128_str(num) + "/" + u128_str(den); }

Rational committee_probability(std::uint32_t n, std::uint32_t f, std::uint32_t kappa) {
  if (kappa > n) throw ConfigError("kappa > n");
  Rational r;
  r.num = binomial(f, kappa);
  r.den = binomial(n, kappa);
  if (r.num == 0) {
    r.den = 1;
    return r;
  }
  unsigned __int128 g = gcd128(r.num, r.den);
  r.num /= g;
  r.den /= g;
  return r;
}

CommitteeSelector::CommitteeSelector(const PublicKeySet& pub, std::uint64_t instance,
                                     ViewId view, std::uint32_t kappa)
    : pub_(&pub),
      instance_(instance),
      view_(view),
      kappa_(kappa),
      tag_(committee_tag(instance, view)) {
  if (kappa_ < 1 || kappa_ > pub.params.n) throw ConfigError("kappa out of range");
}

CommitteeShareMsg CommitteeSelector::start(const PartyKeys& mine) const {
  CommitteeShareMsg msg;
  msg.view = view_;
  msg.sender = mine.id;
  msg.share = coin_share(mine, tag_);
  return msg;
}

std::optional<Committee> CommitteeSelector::on_share(const CommitteeShareMsg& msg) {
  if (committee_.has_value()) return std::nullopt;
  if (msg.view != view_ || msg.sender != msg.share.signer ||
      !coin_share_verify(*pub_, msg.share, tag_)) {
    ++invalid_;
    return std::nullopt;
  }
  if (!shares_.emplace(msg.sender, msg.share).second) return std::nullopt;  // dedup
  if (shares_.size() < pub_->params.coin_threshold()) return std::nullopt;

  std::vector<CoinShare> collected;
  collected.reserve(shares_.size());
  for (const auto& [_, s] : shares_) collected.push_back(s);
  Committee c;
  c.view = view_;
  c.members = coin_toss(*pub_, tag_, collected, pub_->params.n, kappa_);
  committee_ = c;
  return committee_;
}

}  // namespace evaba
