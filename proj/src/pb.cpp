#include "evaba/pb.hpp"

#include "evaba/codec.hpp"
#include "evaba/sha256.hpp"

namespace evaba {

namespace {
constexpr std::uint8_t kTagAckPayload = 0x11;
}

const char* drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::NotSelected: return "NotSelected";
    case DropReason::Duplicate: return "Duplicate";
    case DropReason::InvalidProof: return "InvalidProof";
    case DropReason::Abandoned: return "Abandoned";
    case DropReason::Stale: return "Stale";
    case DropReason::Malformed: return "Malformed";
    case DropReason::MismatchedLeader: return "MismatchedLeader";
    case DropReason::Halted: return "Halted";
  }
  return "?";
}

Bytes ack_payload(const PbId& id, const Digest& value_digest) {
  ByteWriter w;
  w.u8(kTagAckPayload);
  w.u64(id.instance);
  w.u64(id.view);
  w.u32(id.proposer);
  w.u8(std::uint8_t(id.step));
  w.digest(value_digest);
  return w.take();
}

bool ex_pb_val(const SendMsg& msg, const PublicKeySet& pub, const PbContext& ctx) {
  Digest vd = sha256(msg.value);
  if (msg.pb_id.step == 1) {
    if (!ctx.valid(msg.value)) return false;
    ViewId kv = msg.proof.key_view;
    if (kv < ctx.lock()) return false;
    if (kv == 0) return true;  // genesis key
    // A nonzero key must come from a strictly earlier view and be the step-1
    // certificate of that view's elected leader, for this same value.
    if (kv >= msg.pb_id.view || !msg.proof.cert.has_value()) return false;
    auto leader = ctx.leader_of(kv);
    if (!leader.has_value()) return false;
    PbId key_id{msg.pb_id.instance, kv, *leader, 1};
    if (!threshold_validate(pub, *msg.proof.cert, ack_payload(key_id, vd))) return false;
    if (ctx.cert_observed) ctx.cert_observed(key_id, vd);
    return true;
  }
  if (!msg.proof.cert.has_value()) return false;
  PbId prev = msg.pb_id.with_step(msg.pb_id.step - 1);
  if (!threshold_validate(pub, *msg.proof.cert, ack_payload(prev, vd))) return false;
  if (ctx.cert_observed) ctx.cert_observed(prev, vd);
  return true;
}

PbReceiver::Result PbReceiver::on_send(const SendMsg& msg, const PublicKeySet& pub,
                                       const PbContext& ctx) {
  if (msg.pb_id.step < 1 || msg.pb_id.step > 4) return {Outcome::Drop, DropReason::Malformed};
  Promo& promo = promos_[msg.pb_id.proposer];
  if (all_abandoned_ || promo.abandoned) return {Outcome::Drop, DropReason::Abandoned};
  if (msg.pb_id.step <= promo.accepted) return {Outcome::Drop, DropReason::Duplicate};
  if (msg.pb_id.step > promo.accepted + 1) {
    promo.deferred.emplace(msg.pb_id.step, msg);  // first one wins
    return {Outcome::Defer, DropReason::Duplicate};
  }
  if (!ex_pb_val(msg, pub, ctx)) return {Outcome::Drop, DropReason::InvalidProof};
  promo.accepted = msg.pb_id.step;
  return {Outcome::Accept, DropReason::Duplicate};
}

void PbReceiver::abandon(PartyId proposer) {
  Promo& promo = promos_[proposer];
  promo.abandoned = true;
  promo.deferred.clear();
}

void PbReceiver::abandon_all() {
  all_abandoned_ = true;
  for (auto& [_, promo] : promos_) promo.deferred.clear();
}

bool PbReceiver::abandoned(PartyId proposer) const {
  if (all_abandoned_) return true;
  auto it = promos_.find(proposer);
  return it != promos_.end() && it->second.abandoned;
}

std::uint32_t PbReceiver::accepted_step(PartyId proposer) const {
  auto it = promos_.find(proposer);
  return it == promos_.end() ? 0 : it->second.accepted;
}

std::optional<SendMsg> PbReceiver::take_ready(PartyId proposer) {
  auto it = promos_.find(proposer);
  if (it == promos_.end() || it->second.abandoned || all_abandoned_) return std::nullopt;
  auto d = it->second.deferred.find(it->second.accepted + 1);
  if (d == it->second.deferred.end()) return std::nullopt;
  SendMsg msg = d->second;
  it->second.deferred.erase(d);
  return msg;
}

PbSender::PbSender(const PublicKeySet& pub, const PbId& id, Digest value_digest)
    : pub_(&pub), id_(id), value_digest_(value_digest),
      payload_(ack_payload(id, value_digest)) {}

std::optional<ThresholdSignature> PbSender::on_ack(const AckMsg& ack) {
  if (done_ || ack.pb_id != id_) return std::nullopt;
  if (ack.signer != ack.share.signer) return std::nullopt;
  if (shares_.count(ack.signer)) return std::nullopt;  // one share per signer
  if (!share_validate(*pub_, ack.share, payload_)) return std::nullopt;
  shares_.emplace(ack.signer, ack.share);
  if (shares_.size() < pub_->params.quorum()) return std::nullopt;

  std::vector<SignShare> collected;
  collected.reserve(shares_.size());
  for (const auto& [_, s] : shares_) collected.push_back(s);
  done_ = true;
  return combine(*pub_, collected, payload_);
}

}  // namespace evaba
