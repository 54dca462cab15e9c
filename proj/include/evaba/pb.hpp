#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>

#include "evaba/committee.hpp"
#include "evaba/crypto.hpp"

namespace evaba {

/// One P-PB instance: one step of one proposer's promotion in one view.
struct PbId {
  std::uint64_t instance = 0;
  ViewId view = 0;
  PartyId proposer = 0;
  std::uint32_t step = 0;  // 1..4

  auto operator<=>(const PbId&) const = default;
  PbId with_step(std::uint32_t s) const { return {instance, view, proposer, s}; }
};

/// Step-dependent justification carried inside a SEND. Step 1 carries the
/// adopted key (view 0 = none); steps 2-4 carry the previous step's
/// threshold signature.
struct SendProof {
  ViewId key_view = 0;
  std::optional<ThresholdSignature> cert;
};

struct SendMsg {
  PbId pb_id;
  Bytes value;
  SendProof proof;
};

struct AckMsg {
  PbId pb_id;
  PartyId signer = 0;
  SignShare share;
};

enum class DropReason {
  NotSelected,
  Duplicate,
  InvalidProof,
  Abandoned,
  Stale,
  Malformed,
  MismatchedLeader,
  Halted,
};
const char* drop_reason_name(DropReason r);

/// Canonical signable bytes for one step: (pb_id, digest(value)). Certificates
/// stay K-sized no matter how long the value is.
Bytes ack_payload(const PbId& id, const Digest& value_digest);

/// Receiver-side context for external validity.
struct PbContext {
  std::function<bool(const Bytes&)> valid;                       // application predicate
  std::function<ViewId()> lock;                                  // current LOCK
  std::function<std::optional<PartyId>(ViewId)> leader_of;       // past views only
  std::function<void(const PbId&, const Digest&)> cert_observed; // optional white-box hook
};

/// EX-PB-VAL. Step 1: the application predicate holds and the attached key is
/// fresh enough for this receiver (key_view >= LOCK); a nonzero key must be a
/// valid step-1 certificate of the leader of its view for the same value.
/// Steps 2-4: the carried proof is a valid threshold signature for the
/// previous step of the same pb_id and value.
bool ex_pb_val(const SendMsg& msg, const PublicKeySet& pub, const PbContext& ctx);

/// Per-view receiver state for all promotions: dedup, step ordering, abandon.
/// Out-of-order steps are deferred (never dropped) so that per-promotion
/// deliverables always record in step order even under adversarial delivery.
class PbReceiver {
 public:
  enum class Outcome { Accept, Defer, Drop };
  struct Result {
    Outcome outcome;
    DropReason reason = DropReason::Duplicate;
  };

  Result on_send(const SendMsg& msg, const PublicKeySet& pub, const PbContext& ctx);

  /// PB-Abandon: stop ACKing every step of the proposer's current promotion.
  void abandon(PartyId proposer);
  void abandon_all();
  bool abandoned(PartyId proposer) const;

  std::uint32_t accepted_step(PartyId proposer) const;
  /// Deferred SEND that became processable after the last accept, if any.
  std::optional<SendMsg> take_ready(PartyId proposer);

 private:
  struct Promo {
    std::uint32_t accepted = 0;
    bool abandoned = false;
    std::map<std::uint32_t, SendMsg> deferred;
  };
  std::map<PartyId, Promo> promos_;
  bool all_abandoned_ = false;
};

/// Sender-side collector for one promotion step: validates ACK shares until
/// the n-f quorum is reached, then combines them into the step certificate.
class PbSender {
 public:
  PbSender(const PublicKeySet& pub, const PbId& id, Digest value_digest);

  const PbId& id() const { return id_; }
  std::size_t share_count() const { return shares_.size(); }

  /// Returns the threshold signature once n-f distinct valid shares arrived.
  std::optional<ThresholdSignature> on_ack(const AckMsg& ack);

 private:
  const PublicKeySet* pub_;
  PbId id_;
  Digest value_digest_;
  Bytes payload_;
  std::map<PartyId, SignShare> shares_;
  bool done_ = false;
};

}  // namespace evaba
