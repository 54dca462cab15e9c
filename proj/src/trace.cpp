#include "evaba/trace.hpp"

#include <sstream>

namespace evaba::sim {

namespace {

const char* engine_event_name(EngineEvent::Kind k) {
  switch (k) {
    case EngineEvent::Kind::Dropped: return "drop";
    case EngineEvent::Kind::CommitteeKnown: return "committee";
    case EngineEvent::Kind::LeaderKnown: return "leader";
    case EngineEvent::Kind::StepCert: return "step-cert";
    case EngineEvent::Kind::CertSeen: return "cert-seen";
    case EngineEvent::Kind::DeliverableRecorded: return "deliverable";
    case EngineEvent::Kind::AckEmitted: return "ack-emitted";
    case EngineEvent::Kind::LockUpdated: return "lock";
    case EngineEvent::Kind::PrepareAdopted: return "prepare";
    case EngineEvent::Kind::ViewAdvanced: return "advance";
    case EngineEvent::Kind::Decided: return "decide";
    case EngineEvent::Kind::ViewCapReached: return "view-cap";
  }
  return "?";
}

void append_pb(std::ostringstream& os, const PbId& pb) {
  os << " pb=" << pb.view << "/" << pb.proposer << "/" << pb.step;
}

}  // namespace

void PhaseCounts::add(MsgKind kind) {
  switch (kind) {
    case MsgKind::CommitteeShare: ++selection; break;
    case MsgKind::Send:
    case MsgKind::Ack: ++promotion; break;
    case MsgKind::Propose: ++propose; break;
    case MsgKind::Suggest: ++suggest; break;
    case MsgKind::ElectShare: ++election; break;
    case MsgKind::ViewChange: ++view_change; break;
    case MsgKind::Decide: ++decide; break;
  }
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Decided: return "decided";
    case Verdict::MaxViewsExceeded: return "max-views-exceeded";
    case Verdict::Stalled: return "stalled";
  }
  return "?";
}

std::string TraceEvent::line() const {
  std::ostringstream os;
  os << "tick=" << tick;
  if (kind == Kind::Send || kind == Kind::Deliver) {
    os << " kind=" << (kind == Kind::Send ? "send" : "deliver");
    os << " from=" << from << " to=" << to;
    os << " msg=" << (msg.has_value() ? msg_kind_name(*msg) : "?");
    os << " view=" << view;
    return os.str();
  }
  const EngineEvent& ev = *engine;
  if (ev.kind == EngineEvent::Kind::Dropped) {
    os << " kind=drop";
    if (ev.from.has_value()) os << " from=" << *ev.from;
    os << " to=" << ev.party;
    os << " msg=" << (ev.msg.has_value() ? msg_kind_name(*ev.msg) : "?");
    os << " view=" << ev.view;
    os << " reason=" << (ev.reason.has_value() ? drop_reason_name(*ev.reason) : "?");
    if (ev.pb.has_value()) append_pb(os, *ev.pb);
    return os.str();
  }
  os << " kind=" << (ev.kind == EngineEvent::Kind::Decided ? "decide" : "state");
  os << " party=" << ev.party << " view=" << ev.view;
  os << " event=" << engine_event_name(ev.kind);
  if (ev.pb.has_value()) append_pb(os, *ev.pb);
  if (ev.digest.has_value()) os << " digest=" << hex_prefix(*ev.digest);
  if (ev.leader.has_value()) os << " leader=" << *ev.leader;
  if (!ev.members.empty()) {
    os << " members=";
    for (std::size_t i = 0; i < ev.members.size(); ++i) {
      if (i) os << ",";
      os << ev.members[i];
    }
  }
  return os.str();
}

PhaseCounts Trace::honest_totals() const {
  PhaseCounts t;
  for (const auto& [_, vc] : per_view) {
    t.selection += vc.honest.selection;
    t.promotion += vc.honest.promotion;
    t.propose += vc.honest.propose;
    t.suggest += vc.honest.suggest;
    t.election += vc.honest.election;
    t.view_change += vc.honest.view_change;
    t.decide += vc.honest.decide;
  }
  return t;
}

PhaseCounts Trace::byz_totals() const {
  PhaseCounts t;
  for (const auto& [_, vc] : per_view) {
    t.selection += vc.byz.selection;
    t.promotion += vc.byz.promotion;
    t.propose += vc.byz.propose;
    t.suggest += vc.byz.suggest;
    t.election += vc.byz.election;
    t.view_change += vc.byz.view_change;
    t.decide += vc.byz.decide;
  }
  return t;
}

std::string Trace::serialize() const {
  std::ostringstream os;
  for (const auto& ev : events) os << ev.line() << "\n";
  for (const auto& [view, vc] : per_view) {
    os << "counters view=" << view << " honest selection=" << vc.honest.selection
       << " promotion=" << vc.honest.promotion << " propose=" << vc.honest.propose
       << " suggest=" << vc.honest.suggest << " election=" << vc.honest.election
       << " view_change=" << vc.honest.view_change << " decide=" << vc.honest.decide
       << " byz_total=" << vc.byz.total() << "\n";
  }
  os << "bytes l=" << l_bytes << " k=" << k_bytes << " byz_l=" << byz_l_bytes
     << " byz_k=" << byz_k_bytes << "\n";
  for (const auto& s : snapshots) {
    os << "snapshot party=" << s.id << (s.byz ? " byz=1" : " byz=0") << " view=" << s.view
       << " lock=" << s.lock << " prepare_view=" << s.prepare_view
       << " decided=" << (s.decided ? 1 : 0);
    if (s.decided) {
      os << " value=" << hex(s.decided_value) << " decided_view=" << s.decided_view;
    }
    os << " halted=" << (s.halted ? 1 : 0) << "\n";
  }
  os << "verdict " << verdict_name(verdict) << " pending_honest=" << pending_honest_at_end
     << " envelopes=" << total_envelopes << "\n";
  return os.str();
}

}  // namespace evaba::sim
