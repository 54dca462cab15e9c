#include "evaba/engine.hpp"

#include <algorithm>

#include "evaba/codec.hpp"
#include "evaba/sha256.hpp"

namespace evaba {

PartyId map_to_committee(PartyId raw, const Committee& committee) {
  PartyId best = 0;
  std::uint64_t best_dist = ~0ull;
  for (PartyId m : committee.members) {
    std::uint64_t dist = raw > m ? raw - m : m - raw;
    if (dist < best_dist || (dist == best_dist && m < best)) {
      best = m;
      best_dist = dist;
    }
  }
  return best;
}

PartyId elect_and_map(const PublicKeySet& pub, std::uint64_t instance, ViewId view,
                      const std::vector<CoinShare>& shares, const Committee& committee) {
  auto raw = coin_toss(pub, elect_tag(instance, view), shares, pub.params.n, 1);
  PartyId elected = raw.front();
  if (committee.contains(elected)) return elected;
  return map_to_committee(elected, committee);
}

Party::Party(PartyId me, const EngineConfig& cfg, const KeyMaterial& km, EventSink sink)
    : me_(me),
      cfg_(cfg),
      pub_(km.public_set),
      keys_(km.keys_for(me)),
      kappa_(cfg.resolved_kappa()),
      sink_(std::move(sink)) {
  cfg_.params.validate();
  if (kappa_ < 1 || kappa_ > cfg_.params.n) throw ConfigError("kappa out of range");
  state_.me = me;
  state_.prepare = PrepareSlot{0, cfg_.initial_value, std::nullopt};
}

void Party::emit(EngineEvent ev) {
  ev.party = me_;
  if (sink_) sink_(ev);
}

void Party::drop(std::optional<MsgKind> kind, PartyId from, ViewId view, DropReason reason,
                 std::optional<PbId> pb) {
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::Dropped;
  ev.view = view;
  ev.msg = kind;
  ev.from = from;
  ev.reason = reason;
  ev.pb = pb;
  emit(std::move(ev));
}

void Party::multicast(const Message& msg, std::vector<Outbound>& out) {
  Bytes payload = encode(msg);
  for (PartyId to = 1; to <= cfg_.params.n; ++to) out.push_back({to, payload});
}

void Party::send_to(PartyId to, const Message& msg, std::vector<Outbound>& out) {
  out.push_back({to, encode(msg)});
}

Party::ViewState& Party::current_view_state() { return views_[state_.view]; }

PbContext Party::make_pb_context() {
  PbContext ctx;
  ctx.valid = cfg_.valid;
  ctx.lock = [this] { return state_.lock; };
  ctx.leader_of = [this](ViewId v) -> std::optional<PartyId> {
    auto it = state_.leaders.find(v);
    if (it == state_.leaders.end()) return std::nullopt;
    return it->second;
  };
  ctx.cert_observed = [this](const PbId& pb, const Digest& d) {
    EngineEvent ev;
    ev.kind = EngineEvent::Kind::CertSeen;
    ev.view = pb.view;
    ev.pb = pb;
    ev.digest = d;
    emit(std::move(ev));
  };
  return ctx;
}

std::vector<Outbound> Party::start() {
  std::vector<Outbound> out;
  start_view(1, out);
  return out;
}

void Party::start_view(ViewId v, std::vector<Outbound>& out) {
  if (v > cfg_.max_views) {
    halted_ = true;
    EngineEvent ev;
    ev.kind = EngineEvent::Kind::ViewCapReached;
    ev.view = v;
    emit(std::move(ev));
    return;
  }
  state_.view = v;
  ViewState& vs = views_[v];
  vs.selector = std::make_unique<CommitteeSelector>(pub_, cfg_.instance, v, kappa_);
  multicast(vs.selector->start(keys_), out);
}

std::vector<Outbound> Party::handle(PartyId from, const Bytes& payload) {
  std::vector<Outbound> out;
  if (halted_) {
    drop(peek_kind(payload), from, 0, DropReason::Halted);
    return out;
  }
  Message msg;
  try {
    msg = decode(payload);
  } catch (const CodecError&) {
    drop(peek_kind(payload), from, 0, DropReason::Malformed);
    return out;
  }
  process_message(from, std::move(msg), out);
  return out;
}

void Party::process_message(PartyId from, Message msg, std::vector<Outbound>& out) {
  if (halted_) return;
  if (std::holds_alternative<DecideMsg>(msg)) {
    on_decide(from, std::get<DecideMsg>(msg), out);
    return;
  }
  ViewId v = view_of(msg);
  if (v < 1) {
    drop(kind_of(msg), from, v, DropReason::Malformed);
    return;
  }
  if (v < state_.view) {
    handle_stale(from, msg, out);
    return;
  }
  if (v > state_.view) {
    future_[v].emplace_back(from, std::move(msg));
    return;
  }
  dispatch(from, std::move(msg), out);
}

void Party::handle_stale(PartyId from, const Message& msg, std::vector<Outbound>& out) {
  (void)out;
  ViewId v = view_of(msg);
  // A SEND from a party that was never selected for its view is rejected for
  // that reason, staleness notwithstanding: selection is checked first.
  if (const auto* send = std::get_if<SendMsg>(&msg)) {
    auto it = state_.committees.find(v);
    if (it != state_.committees.end() && !it->second.contains(send->pb_id.proposer)) {
      drop(MsgKind::Send, from, v, DropReason::NotSelected, send->pb_id);
      return;
    }
  }
  drop(kind_of(msg), from, v, DropReason::Stale);
}

void Party::dispatch(PartyId from, Message msg, std::vector<Outbound>& out) {
  std::visit(
      [&](auto&& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CommitteeShareMsg>) on_committee_share(from, m, out);
        else if constexpr (std::is_same_v<T, SendMsg>) on_send(from, m, out);
        else if constexpr (std::is_same_v<T, AckMsg>) on_ack(from, m, out);
        else if constexpr (std::is_same_v<T, ProposeMsg>) on_propose(from, m, out);
        else if constexpr (std::is_same_v<T, SuggestMsg>) on_suggest(from, m, out);
        else if constexpr (std::is_same_v<T, ElectShareMsg>) on_elect_share(from, m, out);
        else if constexpr (std::is_same_v<T, ViewChangeMsg>) on_viewchange(from, m, out);
      },
      std::move(msg));
}

void Party::on_committee_share(PartyId from, const CommitteeShareMsg& msg,
                               std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (msg.sender != from) {
    drop(MsgKind::CommitteeShare, from, msg.view, DropReason::Malformed);
    return;
  }
  std::uint64_t invalid_before = vs.selector->invalid_count();
  auto committee = vs.selector->on_share(msg);
  if (vs.selector->invalid_count() > invalid_before) {
    drop(MsgKind::CommitteeShare, from, msg.view, DropReason::InvalidProof);
    return;
  }
  if (!committee.has_value()) return;

  state_.committees[msg.view] = *committee;
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::CommitteeKnown;
  ev.view = msg.view;
  ev.members = committee->members;
  emit(std::move(ev));

  maybe_start_promotion(vs, out);
  auto pending = std::move(vs.awaiting_committee);
  vs.awaiting_committee.clear();
  for (auto& [src, m] : pending) process_message(src, std::move(m), out);
  try_complete_election(vs, out);
}

void Party::maybe_start_promotion(ViewState& vs, std::vector<Outbound>& out) {
  if (vs.promotion_started || vs.abandoned || !vs.selector->complete()) return;
  const Committee& c = *vs.selector->committee();
  if (!c.contains(me_)) return;
  vs.promotion_started = true;
  SendProof key_just{state_.prepare.view, state_.prepare.cert};
  vs.promoter.emplace(pub_, cfg_.instance, state_.view, me_, state_.prepare.value, key_just);
  multicast(vs.promoter->current_send(), out);
}

void Party::on_send(PartyId from, const SendMsg& msg, std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (from != msg.pb_id.proposer || msg.pb_id.instance != cfg_.instance) {
    drop(MsgKind::Send, from, msg.pb_id.view, DropReason::Malformed, msg.pb_id);
    return;
  }
  if (!vs.selector->complete()) {
    vs.awaiting_committee.emplace_back(from, msg);
    return;
  }
  // Membership is checked before any cryptographic work.
  if (!vs.selector->committee()->contains(msg.pb_id.proposer)) {
    drop(MsgKind::Send, from, msg.pb_id.view, DropReason::NotSelected, msg.pb_id);
    return;
  }
  PbContext ctx = make_pb_context();
  auto result = vs.receiver.on_send(msg, pub_, ctx);
  if (result.outcome == PbReceiver::Outcome::Drop) {
    drop(MsgKind::Send, from, msg.pb_id.view, result.reason, msg.pb_id);
    return;
  }
  if (result.outcome == PbReceiver::Outcome::Defer) return;
  accept_send(vs, msg, out);
  // An accept may unblock deferred later steps of the same promotion.
  while (auto next = vs.receiver.take_ready(msg.pb_id.proposer)) {
    auto r = vs.receiver.on_send(*next, pub_, ctx);
    if (r.outcome == PbReceiver::Outcome::Accept) {
      accept_send(vs, *next, out);
    } else if (r.outcome == PbReceiver::Outcome::Drop) {
      drop(MsgKind::Send, next->pb_id.proposer, next->pb_id.view, r.reason, next->pb_id);
      break;
    } else {
      break;
    }
  }
}

void Party::accept_send(ViewState& vs, const SendMsg& msg, std::vector<Outbound>& out) {
  Digest vd = sha256(msg.value);
  if (msg.pb_id.step >= 2) {
    std::uint32_t recorded = vs.deliverables.on_delivery(msg.pb_id, msg.value, *msg.proof.cert);
    if (recorded != 0) {
      EngineEvent ev;
      ev.kind = EngineEvent::Kind::DeliverableRecorded;
      ev.view = msg.pb_id.view;
      ev.pb = msg.pb_id;
      ev.digest = vd;
      emit(std::move(ev));
    }
  }
  AckMsg ack;
  ack.pb_id = msg.pb_id;
  ack.signer = me_;
  ack.share = sign_share(keys_, ack_payload(msg.pb_id, vd));
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::AckEmitted;
  ev.view = msg.pb_id.view;
  ev.pb = msg.pb_id;
  ev.digest = vd;
  emit(std::move(ev));
  send_to(msg.pb_id.proposer, ack, out);
}

void Party::on_ack(PartyId from, const AckMsg& msg, std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (msg.signer != from) {
    drop(MsgKind::Ack, from, msg.pb_id.view, DropReason::Malformed, msg.pb_id);
    return;
  }
  if (!vs.promoter.has_value() || vs.abandoned) return;
  auto cert = vs.promoter->on_ack(msg);
  if (!cert.has_value()) return;

  EngineEvent ev;
  ev.kind = EngineEvent::Kind::StepCert;
  ev.view = msg.pb_id.view;
  ev.pb = msg.pb_id;
  ev.digest = vs.promoter->value_digest();
  emit(std::move(ev));

  if (vs.promoter->complete()) {
    const PromotionResult& res = *vs.promoter->result();
    ProposeMsg p;
    p.view = state_.view;
    p.proposer = me_;
    p.value = res.value;
    p.commit_proof = res.final_cert;
    multicast(p, out);
  } else {
    multicast(vs.promoter->current_send(), out);
  }
}

bool Party::validate_suggested_proof(ViewId view, PartyId proposer, const Bytes& value,
                                     const ThresholdSignature& cert) {
  PbId id{cfg_.instance, view, proposer, 4};
  if (!threshold_validate(pub_, cert, ack_payload(id, sha256(value)))) return false;
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::CertSeen;
  ev.view = view;
  ev.pb = id;
  ev.digest = sha256(value);
  emit(std::move(ev));
  return true;
}

void Party::on_propose(PartyId from, const ProposeMsg& msg, std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (msg.proposer != from) {
    drop(MsgKind::Propose, from, msg.view, DropReason::Malformed);
    return;
  }
  if (!vs.selector->complete()) {
    vs.awaiting_committee.emplace_back(from, msg);
    return;
  }
  if (!vs.selector->committee()->contains(msg.proposer)) {
    drop(MsgKind::Propose, from, msg.view, DropReason::NotSelected);
    return;
  }
  if (!validate_suggested_proof(msg.view, msg.proposer, msg.value, msg.commit_proof)) {
    drop(MsgKind::Propose, from, msg.view, DropReason::InvalidProof);
    return;
  }
  vs.suggest_senders.insert(msg.proposer);
  if (!vs.suggested) {
    vs.suggested = true;
    SuggestMsg s;
    s.view = msg.view;
    s.sender = me_;
    s.proposer = msg.proposer;
    s.value = msg.value;
    s.commit_proof = msg.commit_proof;
    multicast(s, out);
  }
  check_suggest_threshold(vs, out);
}

void Party::on_suggest(PartyId from, const SuggestMsg& msg, std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (msg.sender != from) {
    drop(MsgKind::Suggest, from, msg.view, DropReason::Malformed);
    return;
  }
  if (!vs.selector->complete()) {
    vs.awaiting_committee.emplace_back(from, msg);
    return;
  }
  if (!vs.selector->committee()->contains(msg.proposer) ||
      !validate_suggested_proof(msg.view, msg.proposer, msg.value, msg.commit_proof)) {
    drop(MsgKind::Suggest, from, msg.view, DropReason::InvalidProof);
    return;
  }
  vs.suggest_senders.insert(msg.sender);
  check_suggest_threshold(vs, out);
}

void Party::check_suggest_threshold(ViewState& vs, std::vector<Outbound>& out) {
  if (vs.elect_sent || vs.suggest_senders.size() < cfg_.params.quorum()) return;
  vs.elect_sent = true;
  abandon_promotions(vs);
  ElectShareMsg e;
  e.view = state_.view;
  e.sender = me_;
  e.share = coin_share(keys_, elect_tag(cfg_.instance, state_.view));
  multicast(e, out);
}

void Party::abandon_promotions(ViewState& vs) {
  if (vs.abandoned) return;
  vs.abandoned = true;
  vs.receiver.abandon_all();
  if (vs.promoter.has_value()) vs.promoter->abandon();
}

void Party::on_elect_share(PartyId from, const ElectShareMsg& msg, std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (msg.sender != from || msg.share.signer != from) {
    drop(MsgKind::ElectShare, from, msg.view, DropReason::Malformed);
    return;
  }
  if (!coin_share_verify(pub_, msg.share, elect_tag(cfg_.instance, msg.view))) {
    drop(MsgKind::ElectShare, from, msg.view, DropReason::InvalidProof);
    return;
  }
  vs.elect_shares.emplace(from, msg.share);
  try_complete_election(vs, out);
}

void Party::try_complete_election(ViewState& vs, std::vector<Outbound>& out) {
  if (vs.leader.has_value()) return;
  if (vs.elect_shares.size() < cfg_.params.coin_threshold()) return;
  if (!vs.selector->complete()) return;

  std::vector<CoinShare> shares;
  shares.reserve(vs.elect_shares.size());
  for (const auto& [_, s] : vs.elect_shares) shares.push_back(s);
  PartyId leader = elect_and_map(pub_, cfg_.instance, state_.view, shares,
                                 *vs.selector->committee());
  vs.leader = leader;
  state_.leaders[state_.view] = leader;
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::LeaderKnown;
  ev.view = state_.view;
  ev.leader = leader;
  emit(std::move(ev));

  // Election ends the promotion phase for this view.
  abandon_promotions(vs);

  ViewChangeMsg vc;
  vc.view = state_.view;
  vc.sender = me_;
  vc.leader = leader;
  vc.commit = vs.deliverables.get_commit(leader);
  vc.lock = vs.deliverables.get_lock(leader);
  vc.key = vs.deliverables.get_prepare(leader);
  multicast(vc, out);

  auto pending = std::move(vs.awaiting_leader);
  vs.awaiting_leader.clear();
  for (auto& [src, m] : pending) process_message(src, std::move(m), out);
}

void Party::on_viewchange(PartyId from, const ViewChangeMsg& msg, std::vector<Outbound>& out) {
  ViewState& vs = current_view_state();
  if (msg.sender != from) {
    drop(MsgKind::ViewChange, from, msg.view, DropReason::Malformed);
    return;
  }
  if (!vs.leader.has_value()) {
    vs.awaiting_leader.emplace_back(from, msg);
    return;
  }
  if (msg.leader != *vs.leader) {
    drop(MsgKind::ViewChange, from, msg.view, DropReason::MismatchedLeader);
    return;
  }
  auto check_field = [&](const std::optional<Deliverable>& d, std::uint32_t step) {
    if (!d.has_value()) return true;
    PbId id{cfg_.instance, msg.view, msg.leader, step};
    if (!threshold_validate(pub_, d->cert, ack_payload(id, sha256(d->value)))) return false;
    EngineEvent ev;
    ev.kind = EngineEvent::Kind::CertSeen;
    ev.view = msg.view;
    ev.pb = id;
    ev.digest = sha256(d->value);
    emit(std::move(ev));
    return true;
  };
  if (!check_field(msg.commit, 3) || !check_field(msg.lock, 2) || !check_field(msg.key, 1)) {
    drop(MsgKind::ViewChange, from, msg.view, DropReason::InvalidProof);
    return;
  }
  if (!vs.vc_senders.insert(from).second) return;  // dedup

  if (msg.commit.has_value() && !state_.decided.has_value()) {
    decide_local(msg.view, msg.commit->value, msg.commit->cert, out);
    return;
  }
  if (msg.lock.has_value() && msg.view > state_.lock) {
    state_.lock = msg.view;
    EngineEvent ev;
    ev.kind = EngineEvent::Kind::LockUpdated;
    ev.view = msg.view;
    emit(std::move(ev));
  }
  if (msg.key.has_value() && msg.view > state_.prepare.view) {
    state_.prepare = PrepareSlot{msg.view, msg.key->value, msg.key->cert};
    EngineEvent ev;
    ev.kind = EngineEvent::Kind::PrepareAdopted;
    ev.view = msg.view;
    ev.digest = sha256(msg.key->value);
    emit(std::move(ev));
  }
  if (!state_.decided.has_value() && vs.vc_senders.size() >= cfg_.params.quorum()) {
    ViewId next = msg.view + 1;
    EngineEvent ev;
    ev.kind = EngineEvent::Kind::ViewAdvanced;
    ev.view = next;
    emit(std::move(ev));
    start_view(next, out);
    if (halted_) return;
    auto buffered = future_.find(next);
    if (buffered != future_.end()) {
      auto msgs = std::move(buffered->second);
      future_.erase(buffered);
      for (auto& [src, m] : msgs) process_message(src, std::move(m), out);
    }
  }
}

void Party::decide_local(ViewId view, const Bytes& value, const ThresholdSignature& cert3,
                         std::vector<Outbound>& out) {
  ViewState& vs = views_[view];
  state_.decided = value;
  state_.decided_view = view;
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::Decided;
  ev.view = view;
  ev.digest = sha256(value);
  emit(std::move(ev));

  // Final notification so laggards at any view can verify and terminate.
  DecideMsg d;
  d.view = view;
  d.sender = me_;
  d.proposer = vs.leader.value_or(0);
  d.value = value;
  d.commit_cert = cert3;
  std::uint32_t need = cfg_.params.coin_threshold();
  for (const auto& [_, s] : vs.selector->shares()) {
    if (d.committee_shares.size() >= need) break;
    d.committee_shares.push_back(s);
  }
  for (const auto& [_, s] : vs.elect_shares) {
    if (d.elect_shares.size() >= need) break;
    d.elect_shares.push_back(s);
  }
  multicast(d, out);
  halted_ = true;
}

void Party::on_decide(PartyId from, const DecideMsg& msg, std::vector<Outbound>& out) {
  if (state_.decided.has_value()) return;
  bool ok = false;
  try {
    Committee committee;
    committee.view = msg.view;
    committee.members = coin_toss(pub_, committee_tag(cfg_.instance, msg.view),
                                  msg.committee_shares, cfg_.params.n, kappa_);
    std::vector<CoinShare> eshares = msg.elect_shares;
    PartyId leader = elect_and_map(pub_, cfg_.instance, msg.view, eshares, committee);
    PbId id{cfg_.instance, msg.view, msg.proposer, 3};
    ok = (msg.proposer == leader) && cfg_.valid(msg.value) &&
         threshold_validate(pub_, msg.commit_cert, ack_payload(id, sha256(msg.value)));
    if (ok) {
      EngineEvent ev;
      ev.kind = EngineEvent::Kind::CertSeen;
      ev.view = msg.view;
      ev.pb = id;
      ev.digest = sha256(msg.value);
      emit(std::move(ev));
    }
  } catch (const CryptoError&) {
    ok = false;
  }
  if (!ok) {
    drop(MsgKind::Decide, from, msg.view, DropReason::InvalidProof);
    return;
  }
  state_.decided = msg.value;
  state_.decided_view = msg.view;
  EngineEvent ev;
  ev.kind = EngineEvent::Kind::Decided;
  ev.view = msg.view;
  ev.digest = sha256(msg.value);
  emit(std::move(ev));

  DecideMsg relay = msg;
  relay.sender = me_;
  multicast(relay, out);
  halted_ = true;
}

const PromotionStore* Party::deliverables(ViewId view) const {
  auto it = views_.find(view);
  return it == views_.end() ? nullptr : &it->second.deliverables;
}

std::optional<PartyId> Party::leader(ViewId view) const {
  auto it = state_.leaders.find(view);
  if (it == state_.leaders.end()) return std::nullopt;
  return it->second;
}

}  // namespace evaba
