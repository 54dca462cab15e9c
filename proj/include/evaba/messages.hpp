#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "evaba/committee.hpp"
#include "evaba/promotion.hpp"

namespace evaba {

enum class MsgKind : std::uint8_t {
  CommitteeShare = 1,
  Send = 2,
  Ack = 3,
  Propose = 4,
  Suggest = 5,
  ElectShare = 6,
  ViewChange = 7,
  Decide = 8,
};
const char* msg_kind_name(MsgKind k);

struct ProposeMsg {
  ViewId view = 0;
  PartyId proposer = 0;
  Bytes value;
  ThresholdSignature commit_proof;  // step-4 certificate
};

struct SuggestMsg {
  ViewId view = 0;
  PartyId sender = 0;
  PartyId proposer = 0;
  Bytes value;
  ThresholdSignature commit_proof;
};

struct ElectShareMsg {
  ViewId view = 0;
  PartyId sender = 0;
  CoinShare share;
};

/// This party's stored deliverables for the elected leader; all fields may be
/// absent, and an empty message is still sent (it counts toward n-f).
struct ViewChangeMsg {
  ViewId view = 0;
  PartyId sender = 0;
  PartyId leader = 0;
  std::optional<Deliverable> commit;  // (value, step-3 cert)
  std::optional<Deliverable> lock;    // (value, step-2 cert)
  std::optional<Deliverable> key;     // (value, step-1 cert)
};

/// Self-certifying decision notice: carries enough coin shares to re-derive
/// committee and leader for the view, so a laggard at any view can verify and
/// terminate immediately.
struct DecideMsg {
  ViewId view = 0;
  PartyId sender = 0;
  PartyId proposer = 0;  // the elected (mapped) leader of `view`
  Bytes value;
  ThresholdSignature commit_cert;  // step-3 certificate
  std::vector<CoinShare> committee_shares;
  std::vector<CoinShare> elect_shares;
};

using Message = std::variant<CommitteeShareMsg, SendMsg, AckMsg, ProposeMsg, SuggestMsg,
                             ElectShareMsg, ViewChangeMsg, DecideMsg>;

Bytes encode(const Message& msg);
Message decode(const Bytes& payload);  // throws CodecError on malformed input

MsgKind kind_of(const Message& msg);
ViewId view_of(const Message& msg);

/// Cheap header peek for scheduling/trace purposes; returns nullopt on junk.
std::optional<MsgKind> peek_kind(const Bytes& payload);

/// Byte accounting per the n^2(L+K) cost model: L counts application value
/// bytes, K counts share and signature bytes.
struct WireCost {
  std::size_t l_bytes = 0;
  std::size_t k_bytes = 0;
};
WireCost measure(const Message& msg);

}  // namespace evaba
