#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "evaba/committee.hpp"
#include "evaba/messages.hpp"
#include "evaba/promotion.hpp"

namespace evaba {

using ValidityPredicate = std::function<bool(const Bytes&)>;

struct EngineConfig {
  CryptoParams params;
  std::uint32_t kappa = 0;  // 0 -> f+1
  std::uint64_t instance = 1;
  Bytes initial_value;
  ValidityPredicate valid;
  ViewId max_views = 20;  // the party freezes instead of starting view max_views+1

  std::uint32_t resolved_kappa() const { return kappa == 0 ? params.f + 1 : kappa; }
};

/// White-box events consumed by the trace / safety checker.
struct EngineEvent {
  enum class Kind {
    Dropped,
    CommitteeKnown,
    LeaderKnown,
    StepCert,             // sender combined a step certificate
    CertSeen,             // any threshold signature this party validated
    DeliverableRecorded,  // prepare/lock/commit stored (pb.step = 2/3/4)
    AckEmitted,
    LockUpdated,
    PrepareAdopted,
    ViewAdvanced,
    Decided,
    ViewCapReached,
  };
  Kind kind;
  PartyId party = 0;
  ViewId view = 0;
  std::optional<MsgKind> msg;
  std::optional<PartyId> from;
  std::optional<DropReason> reason;
  std::optional<PbId> pb;
  std::optional<Digest> digest;
  std::vector<PartyId> members;
  std::optional<PartyId> leader;
};
using EventSink = std::function<void(const EngineEvent&)>;

struct Outbound {
  PartyId to = 0;
  Bytes payload;
};

struct PrepareSlot {
  ViewId view = 0;  // 0 = genesis (no certificate)
  Bytes value;
  std::optional<ThresholdSignature> cert;  // step-1 certificate of leader(view)
};

struct PartyState {
  PartyId me = 0;
  ViewId view = 1;
  ViewId lock = 0;  // highest locked view, monotone
  PrepareSlot prepare;
  std::optional<Bytes> decided;  // write-once
  ViewId decided_view = 0;
  std::map<ViewId, Committee> committees;
  std::map<ViewId, PartyId> leaders;
};

/// Maps an elected party id onto the committee: the member with the smallest
/// absolute id distance, ties to the smaller id.
PartyId map_to_committee(PartyId raw, const Committee& committee);

/// Leader election for one view from >= f+1 valid election coin shares.
PartyId elect_and_map(const PublicKeySet& pub, std::uint64_t instance, ViewId view,
                      const std::vector<CoinShare>& shares, const Committee& committee);

/// One replica's eVABA state machine. Single logical thread: each call to
/// handle() applies one inbound message and returns the messages to send.
/// All multicasts fan out to every party including the sender itself; the
/// simulator delivers self-envelopes like any other.
class Party {
 public:
  Party(PartyId me, const EngineConfig& cfg, const KeyMaterial& km, EventSink sink);

  /// Begin view 1 (emits this party's committee share).
  std::vector<Outbound> start();

  /// Apply one inbound message from an authenticated channel.
  std::vector<Outbound> handle(PartyId from, const Bytes& payload);

  const PartyState& state() const { return state_; }
  bool halted() const { return halted_; }
  bool decided() const { return state_.decided.has_value(); }

  /// White-box access for tests.
  const PromotionStore* deliverables(ViewId view) const;
  std::optional<PartyId> leader(ViewId view) const;

 private:
  struct ViewState {
    std::unique_ptr<CommitteeSelector> selector;
    PromotionStore deliverables;
    PbReceiver receiver;
    std::optional<Promoter> promoter;
    bool promotion_started = false;
    bool suggested = false;
    std::set<PartyId> suggest_senders;
    bool elect_sent = false;
    std::map<PartyId, CoinShare> elect_shares;
    std::optional<PartyId> leader;
    std::set<PartyId> vc_senders;
    bool abandoned = false;
    std::vector<std::pair<PartyId, Message>> awaiting_committee;
    std::vector<std::pair<PartyId, Message>> awaiting_leader;
  };

  void emit(EngineEvent ev);
  void drop(std::optional<MsgKind> kind, PartyId from, ViewId view, DropReason reason,
            std::optional<PbId> pb = std::nullopt);
  void multicast(const Message& msg, std::vector<Outbound>& out);
  void send_to(PartyId to, const Message& msg, std::vector<Outbound>& out);

  ViewState& current_view_state();
  void start_view(ViewId v, std::vector<Outbound>& out);
  void process_message(PartyId from, Message msg, std::vector<Outbound>& out);
  void dispatch(PartyId from, Message msg, std::vector<Outbound>& out);
  void handle_stale(PartyId from, const Message& msg, std::vector<Outbound>& out);

  void on_committee_share(PartyId from, const CommitteeShareMsg& msg, std::vector<Outbound>& out);
  void on_send(PartyId from, const SendMsg& msg, std::vector<Outbound>& out);
  void accept_send(ViewState& vs, const SendMsg& msg, std::vector<Outbound>& out);
  void on_ack(PartyId from, const AckMsg& msg, std::vector<Outbound>& out);
  void on_propose(PartyId from, const ProposeMsg& msg, std::vector<Outbound>& out);
  void on_suggest(PartyId from, const SuggestMsg& msg, std::vector<Outbound>& out);
  void on_elect_share(PartyId from, const ElectShareMsg& msg, std::vector<Outbound>& out);
  void on_viewchange(PartyId from, const ViewChangeMsg& msg, std::vector<Outbound>& out);
  void on_decide(PartyId from, const DecideMsg& msg, std::vector<Outbound>& out);

  void maybe_start_promotion(ViewState& vs, std::vector<Outbound>& out);
  void check_suggest_threshold(ViewState& vs, std::vector<Outbound>& out);
  void try_complete_election(ViewState& vs, std::vector<Outbound>& out);
  void abandon_promotions(ViewState& vs);
  void decide_local(ViewId view, const Bytes& value, const ThresholdSignature& cert3,
                    std::vector<Outbound>& out);
  bool validate_suggested_proof(ViewId view, PartyId proposer, const Bytes& value,
                                const ThresholdSignature& cert);
  PbContext make_pb_context();

  PartyId me_;
  EngineConfig cfg_;
  PublicKeySet pub_;
  PartyKeys keys_;
  std::uint32_t kappa_;
  EventSink sink_;
  PartyState state_;
  bool halted_ = false;
  std::map<ViewId, ViewState> views_;
  std::map<ViewId, std::vector<std::pair<PartyId, Message>>> future_;
};

}  // namespace evaba
