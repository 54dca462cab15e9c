#pragma once

#include <map>
#include <optional>

#include "evaba/pb.hpp"

namespace evaba {

struct Deliverable {
  Bytes value;
  ThresholdSignature cert;
};

/// What a receiver keeps from one proposer's 4-step promotion. Step 2 stores
/// the key, step 3 the lock, step 4 the commit; each carries the previous
/// step's certificate.
struct PromotionState {
  std::optional<Deliverable> prepare;  // (value, step-1 cert)
  std::optional<Deliverable> lock;     // (value, step-2 cert)
  std::optional<Deliverable> commit;   // (value, step-3 cert)
};

/// Receiver-side deliverable table for one view, keyed by proposer.
class PromotionStore {
 public:
  /// Record the deliverable for an accepted SEND. Step 1 stores nothing;
  /// steps 2-4 store the carried certificate, at most once per promotion.
  /// Returns the artifact step recorded (2/3/4) or 0.
  std::uint32_t on_delivery(const PbId& id, const Bytes& value,
                            const ThresholdSignature& carried);

  std::optional<Deliverable> get_prepare(PartyId proposer) const;
  std::optional<Deliverable> get_lock(PartyId proposer) const;
  std::optional<Deliverable> get_commit(PartyId proposer) const;
  const PromotionState* get(PartyId proposer) const;

 private:
  std::map<PartyId, PromotionState> slots_;
};

struct PromotionResult {
  Bytes value;
  ThresholdSignature final_cert;  // step-4 certificate, the commit proof
};

/// Sender side of the 4-step promotion. The engine feeds ACKs in; each
/// completed step's certificate becomes the next step's SEND proof.
class Promoter {
 public:
  Promoter(const PublicKeySet& pub, std::uint64_t instance, ViewId view, PartyId me,
           Bytes value, SendProof key_justification);

  std::uint32_t step() const { return step_; }
  bool complete() const { return result_.has_value(); }
  bool abandoned() const { return abandoned_; }
  const std::optional<PromotionResult>& result() const { return result_; }
  const Digest& value_digest() const { return value_digest_; }

  /// SEND for the current step.
  SendMsg current_send() const;

  /// Feed one ACK. Returns the step certificate when this step just
  /// completed; the promoter is then already on the next step (or done).
  std::optional<ThresholdSignature> on_ack(const AckMsg& ack);

  void abandon() { abandoned_ = true; }

 private:
  const PublicKeySet* pub_;
  PbId base_;
  Bytes value_;
  Digest value_digest_;
  SendProof key_justification_;
  std::uint32_t step_ = 1;
  std::optional<ThresholdSignature> prev_cert_;
  std::optional<PbSender> collector_;
  std::optional<PromotionResult> result_;
  bool abandoned_ = false;
};

}  // namespace evaba
