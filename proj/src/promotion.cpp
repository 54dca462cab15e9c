#include "evaba/promotion.hpp"

#include "evaba/sha256.hpp"

namespace evaba {

std::uint32_t PromotionStore::on_delivery(const PbId& id, const Bytes& value,
                                          const ThresholdSignature& carried) {
  PromotionState& st = slots_[id.proposer];
  auto record = [&](std::optional<Deliverable>& slot) -> std::uint32_t {
    if (slot.has_value()) return 0;
    slot = Deliverable{value, carried};
    return id.step;
  };
  switch (id.step) {
    case 2: return record(st.prepare);
    case 3: return record(st.lock);
    case 4: return record(st.commit);
    default: return 0;  // step 1 has no stored artifact
  }
}

const PromotionState* PromotionStore::get(PartyId proposer) const {
  auto it = slots_.find(proposer);
  return it == slots_.end() ? nullptr : &it->second;
}

std::optional<Deliverable> PromotionStore::get_prepare(PartyId proposer) const {
  const PromotionState* st = get(proposer);
  return st ? st->prepare : std::nullopt;
}

std::optional<Deliverable> PromotionStore::get_lock(PartyId proposer) const {
  const PromotionState* st = get(proposer);
  return st ? st->lock : std::nullopt;
}

std::optional<Deliverable> PromotionStore::get_commit(PartyId proposer) const {
  const PromotionState* st = get(proposer);
  return st ? st->commit : std::nullopt;
}

Promoter::Promoter(const PublicKeySet& pub, std::uint64_t instance, ViewId view, PartyId me,
                   Bytes value, SendProof key_justification)
    : pub_(&pub),
      base_{instance, view, me, 1},
      value_(std::move(value)),
      value_digest_(sha256(value_)),
      key_justification_(std::move(key_justification)) {
  collector_.emplace(pub, base_, value_digest_);
}

SendMsg Promoter::current_send() const {
  SendMsg msg;
  msg.pb_id = base_.with_step(step_);
  msg.value = value_;
  if (step_ == 1) {
    msg.proof = key_justification_;
  } else {
    msg.proof = SendProof{0, prev_cert_};
  }
  return msg;
}

std::optional<ThresholdSignature> Promoter::on_ack(const AckMsg& ack) {
  if (abandoned_ || result_.has_value() || !collector_.has_value()) return std::nullopt;
  auto cert = collector_->on_ack(ack);
  if (!cert.has_value()) return std::nullopt;

  prev_cert_ = cert;
  if (step_ == 4) {
    result_ = PromotionResult{value_, *cert};
    collector_.reset();
  } else {
    ++step_;
    collector_.emplace(*pub_, base_.with_step(step_), value_digest_);
  }
  return cert;
}

}  // namespace evaba
