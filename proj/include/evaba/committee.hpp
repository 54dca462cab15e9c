#pragma once

#include <map>
#include <optional>

#include "evaba/crypto.hpp"
#include "evaba/types.hpp"

namespace evaba {

/// The kappa parties permitted to broadcast in one view. Identical across all
/// honest parties for the same view (coin toss is subset-independent).
struct Committee {
  ViewId view = 0;
  std::vector<PartyId> members;  // ascending, |members| = kappa

  bool contains(PartyId id) const;
};

struct CommitteeShareMsg {
  ViewId view = 0;
  PartyId sender = 0;
  CoinShare share;
};

Bytes committee_tag(std::uint64_t instance, ViewId view);
Bytes elect_tag(std::uint64_t instance, ViewId view);

/// Exact rational, reduced. Numerators stay within __int128 for n <= ~100.
struct Rational {
  unsigned __int128 num = 0;
  unsigned __int128 den = 1;

  double value() const;
  std::string str() const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

/// Probability that a uniform kappa-subset of n parties contains no honest
/// party: C(f, kappa) / C(n, kappa). Zero whenever kappa > f.
Rational committee_probability(std::uint32_t n, std::uint32_t f, std::uint32_t kappa);

/// Per-view collector: first valid coin share per sender; at f+1 distinct
/// senders the committee is opened with coin_toss. Duplicates and invalid
/// shares are dropped (counted, never fatal).
class CommitteeSelector {
 public:
  CommitteeSelector(const PublicKeySet& pub, std::uint64_t instance, ViewId view,
                    std::uint32_t kappa);

  CommitteeShareMsg start(const PartyKeys& mine) const;
  std::optional<Committee> on_share(const CommitteeShareMsg& msg);

  bool complete() const { return committee_.has_value(); }
  const std::optional<Committee>& committee() const { return committee_; }
  const std::map<PartyId, CoinShare>& shares() const { return shares_; }
  std::uint64_t invalid_count() const { return invalid_; }
  ViewId view() const { return view_; }

 private:
  const PublicKeySet* pub_;
  std::uint64_t instance_;
  ViewId view_;
  std::uint32_t kappa_;
  Bytes tag_;
  std::map<PartyId, CoinShare> shares_;
  std::optional<Committee> committee_;
  std::uint64_t invalid_ = 0;
};

}  // namespace evaba
