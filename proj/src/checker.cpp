#include "evaba/checker.hpp"

#include <map>

#include "evaba/sha256.hpp"

namespace evaba::harness {

namespace {

struct PbKeyDigest {
  PbId pb;
  Digest digest;
  bool operator<(const PbKeyDigest& o) const {
    if (pb != o.pb) return pb < o.pb;
    return digest < o.digest;
  }
};

std::string pb_str(const PbId& pb) {
  return "view " + std::to_string(pb.view) + " proposer " + std::to_string(pb.proposer) +
         " step " + std::to_string(pb.step);
}

}  // namespace

std::vector<Violation> verify_run(const sim::Trace& trace, const sim::RunConfig& cfg,
                                  const std::set<PartyId>& byz) {
  std::vector<Violation> out;
  auto violate = [&](std::string rule, std::string detail) {
    out.push_back({std::move(rule), std::move(detail)});
  };
  const std::uint32_t n = cfg.params.n;
  const std::uint32_t f = cfg.params.f;
  ValidityPredicate valid = cfg.valid ? cfg.valid : [](const Bytes& v) { return !v.empty(); };

  // Pass 1: collect honest engine events into indexed form.
  std::map<ViewId, std::vector<PartyId>> committees;          // agreed members per view
  std::map<ViewId, std::map<PartyId, PartyId>> leaders;       // view -> party -> leader
  std::map<std::pair<PartyId, PbId>, std::uint64_t> acks;     // ack count per (party, pb)
  std::map<PbKeyDigest, std::uint64_t> ack_digests;           // acks per (pb, digest)
  std::map<PbId, std::set<Digest>> cert_digests;              // certs seen per pb
  std::map<PbId, std::set<PartyId>> recorded;                 // deliverable holders per (pb)
  std::map<PbId, std::map<PartyId, Digest>> recorded_digest;  // and their digests
  std::map<PartyId, std::pair<ViewId, Digest>> decided;       // honest decisions

  for (const auto& te : trace.events) {
    if (te.kind != sim::TraceEvent::Kind::Engine) continue;
    const EngineEvent& ev = *te.engine;
    if (byz.count(ev.party)) continue;
    switch (ev.kind) {
      case EngineEvent::Kind::CommitteeKnown: {
        auto it = committees.find(ev.view);
        if (it == committees.end()) {
          committees[ev.view] = ev.members;
        } else if (it->second != ev.members) {
          violate("committee-agreement",
                  "view " + std::to_string(ev.view) + ": party " + std::to_string(ev.party) +
                      " derived a different committee");
        }
        break;
      }
      case EngineEvent::Kind::LeaderKnown:
        leaders[ev.view][ev.party] = *ev.leader;
        break;
      case EngineEvent::Kind::AckEmitted:
        ++acks[{ev.party, *ev.pb}];
        if (ev.digest.has_value()) ++ack_digests[{*ev.pb, *ev.digest}];
        break;
      case EngineEvent::Kind::StepCert:
      case EngineEvent::Kind::CertSeen:
        cert_digests[*ev.pb].insert(*ev.digest);
        break;
      case EngineEvent::Kind::DeliverableRecorded:
        recorded[*ev.pb].insert(ev.party);
        recorded_digest[*ev.pb][ev.party] = *ev.digest;
        break;
      case EngineEvent::Kind::Decided:
        decided.emplace(ev.party, std::make_pair(ev.view, *ev.digest));
        break;
      default:
        break;
    }
  }

  auto committee_has = [&](ViewId view, PartyId id) -> bool {
    auto it = committees.find(view);
    if (it == committees.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), id);
  };

  // Committee validity: size kappa, ids in range.
  std::uint32_t kappa = cfg.kappa == 0 ? f + 1 : cfg.kappa;
  for (const auto& [view, members] : committees) {
    if (members.size() != kappa) {
      violate("committee-size", "view " + std::to_string(view) + ": |C| = " +
                                    std::to_string(members.size()));
    }
    for (PartyId m : members) {
      if (m < 1 || m > n) violate("committee-range", "member " + std::to_string(m));
    }
  }

  // Leader agreement and membership.
  for (const auto& [view, per_party] : leaders) {
    PartyId first = per_party.begin()->second;
    for (const auto& [party, leader] : per_party) {
      if (leader != first) {
        violate("leader-agreement", "view " + std::to_string(view) + ": party " +
                                        std::to_string(party) + " elected " +
                                        std::to_string(leader) + " vs " + std::to_string(first));
      }
    }
    if (!committee_has(view, first)) {
      violate("leader-membership",
              "view " + std::to_string(view) + ": leader " + std::to_string(first));
    }
  }

  // Agreement: one decided digest across all honest parties.
  std::optional<Digest> decided_digest;
  ViewId first_decided_view = 0;
  for (const auto& [party, vd] : decided) {
    if (!decided_digest.has_value()) {
      decided_digest = vd.second;
      first_decided_view = vd.first;
    } else if (*decided_digest != vd.second) {
      violate("agreement", "party " + std::to_string(party) + " decided a different value");
    }
    if (vd.first < first_decided_view) first_decided_view = vd.first;
  }

  // External validity, checked on snapshot values (full bytes).
  for (const auto& snap : trace.snapshots) {
    if (snap.byz || !snap.decided) continue;
    if (!valid(snap.decided_value)) {
      violate("external-validity",
              "party " + std::to_string(snap.id) + " decided an invalid value");
    }
    Digest d = sha256(snap.decided_value);
    bool promoted = false;
    for (const auto& [pb, digests] : cert_digests) {
      if (digests.count(d) && committee_has(pb.view, pb.proposer)) {
        promoted = true;
        break;
      }
    }
    if (!promoted) {
      violate("external-validity",
              "decided value does not trace to a committee member's promotion");
    }
  }

  // PB-Integrity: at most one ACK per (party, pb_id).
  for (const auto& [key, count] : acks) {
    if (count > 1) {
      violate("pb-integrity", "party " + std::to_string(key.first) + " acked " +
                                  pb_str(key.second) + " x" + std::to_string(count));
    }
  }

  // PB-Selected (Lemma 1): every certificate and every honest ACK names a
  // selected proposer.
  for (const auto& [pb, _] : cert_digests) {
    if (!committee_has(pb.view, pb.proposer)) {
      violate("pb-selected", "certificate for non-committee " + pb_str(pb));
    }
  }
  for (const auto& [key, _] : acks) {
    if (!committee_has(key.second.view, key.second.proposer)) {
      violate("pb-selected", "honest ACK for non-committee " + pb_str(key.second));
    }
  }

  // PB-Provability: one digest per pb_id, and the certified digest gathered
  // >= n-2f honest ACKs.
  for (const auto& [pb, digests] : cert_digests) {
    if (digests.size() > 1) {
      violate("pb-provability", "two certified values for " + pb_str(pb));
    }
    for (const Digest& d : digests) {
      auto it = ack_digests.find({pb, d});
      std::uint64_t honest_acks = it == ack_digests.end() ? 0 : it->second;
      if (honest_acks < n - 2 * f) {
        violate("pb-provability", "certified " + pb_str(pb) + " has only " +
                                      std::to_string(honest_acks) + " honest acks");
      }
    }
  }

  // Coverage: a valid step-s certificate (s = 2, 3) implies >= n-2f honest
  // parties recorded the step-s deliverable for the same value. Step 3 is
  // the lock-coverage acceptance criterion; step 2 is key coverage.
  for (const auto& [pb, digests] : cert_digests) {
    if (pb.step != 2 && pb.step != 3) continue;
    for (const Digest& d : digests) {
      std::uint64_t holders = 0;
      auto it = recorded_digest.find(pb);
      if (it != recorded_digest.end()) {
        for (const auto& [party, pd] : it->second) {
          if (pd == d) ++holders;
        }
      }
      if (holders < n - 2 * f) {
        violate(pb.step == 3 ? "lock-coverage" : "key-coverage",
                pb_str(pb) + " certified but only " + std::to_string(holders) +
                    " honest holders");
      }
    }
  }
  // A commit deliverable embeds a step-3 certificate; include those
  // observations in lock coverage too.
  for (const auto& [pb, per_party] : recorded_digest) {
    if (pb.step != 4 || per_party.empty()) continue;
    const Digest& d = per_party.begin()->second;
    PbId lock_pb = pb.with_step(3);
    std::uint64_t lock_holders = 0;
    auto it = recorded_digest.find(lock_pb);
    if (it != recorded_digest.end()) {
      for (const auto& [p2, d2] : it->second) {
        (void)p2;
        if (d2 == d) ++lock_holders;
      }
    }
    if (lock_holders < n - 2 * f) {
      violate("lock-coverage", pb_str(lock_pb) + " implied by commit but only " +
                                   std::to_string(lock_holders) + " honest holders");
    }
  }

  // Value consistency inside one promotion.
  std::map<std::pair<ViewId, PartyId>, Digest> promo_value;
  for (const auto& [pb, per_party] : recorded_digest) {
    for (const auto& [party, d] : per_party) {
      auto key = std::make_pair(pb.view, pb.proposer);
      auto it = promo_value.find(key);
      if (it == promo_value.end()) {
        promo_value.emplace(key, d);
      } else if (it->second != d) {
        violate("value-consistency", "promotion " + pb_str(pb) + " recorded two values");
      }
      (void)party;
    }
  }

  // Safety across views: once some honest party decided v in view w, every
  // later-view certificate carries v.
  if (decided_digest.has_value()) {
    for (const auto& [pb, digests] : cert_digests) {
      if (pb.view <= first_decided_view) continue;
      for (const Digest& d : digests) {
        if (d != *decided_digest) {
          violate("cross-view-safety",
                  "post-decision certificate for a different value at " + pb_str(pb));
        }
      }
    }
  }

  // Eventual delivery.
  if (trace.pending_honest_at_end != 0) {
    violate("eventual-delivery", std::to_string(trace.pending_honest_at_end) +
                                     " honest envelopes undelivered");
  }

  return out;
}

}  // namespace evaba::harness
