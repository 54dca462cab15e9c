#include "evaba/sim.hpp"

#include <algorithm>
#include <memory>

#include "evaba/codec.hpp"
#include "evaba/rng.hpp"
#include "evaba/sha256.hpp"

namespace evaba::sim {

namespace {

class IParty {
 public:
  virtual ~IParty() = default;
  virtual std::vector<Outbound> start() = 0;
  virtual std::vector<Outbound> handle(PartyId from, const Bytes& payload) = 0;
  virtual const Party* engine() const { return nullptr; }
};

class HonestParty : public IParty {
 public:
  HonestParty(PartyId id, const EngineConfig& cfg, const KeyMaterial& km, EventSink sink)
      : party_(id, cfg, km, std::move(sink)) {}
  std::vector<Outbound> start() override { return party_.start(); }
  std::vector<Outbound> handle(PartyId from, const Bytes& payload) override {
    return party_.handle(from, payload);
  }
  const Party* engine() const override { return &party_; }

 protected:
  Party party_;
};

// Emits its view-1 committee share, then nothing ever again.
class CrashParty : public HonestParty {
 public:
  using HonestParty::HonestParty;
  std::vector<Outbound> handle(PartyId, const Bytes&) override { return {}; }
};

// Receives and keeps state, never sends.
class MuteParty : public HonestParty {
 public:
  using HonestParty::HonestParty;
  std::vector<Outbound> start() override {
    party_.start();
    return {};
  }
  std::vector<Outbound> handle(PartyId from, const Bytes& payload) override {
    party_.handle(from, payload);
    return {};
  }
};

// Never contributes a sign-share or coin share of any flavor.
class WithholdSharesParty : public HonestParty {
 public:
  using HonestParty::HonestParty;
  std::vector<Outbound> start() override { return filter(party_.start()); }
  std::vector<Outbound> handle(PartyId from, const Bytes& payload) override {
    return filter(party_.handle(from, payload));
  }

 private:
  static std::vector<Outbound> filter(std::vector<Outbound> outs) {
    std::erase_if(outs, [](const Outbound& o) {
      auto k = peek_kind(o.payload);
      return k == MsgKind::Ack || k == MsgKind::CommitteeShare || k == MsgKind::ElectShare;
    });
    return outs;
  }
};

// Committee member that sends one value to the lower half of the parties and
// a different value to the upper half in its step-1 SENDs.
class EquivocateParty : public HonestParty {
 public:
  EquivocateParty(PartyId id, const EngineConfig& cfg, const KeyMaterial& km, EventSink sink)
      : HonestParty(id, cfg, km, std::move(sink)), me_(id), n_(cfg.params.n) {}
  std::vector<Outbound> start() override { return mutate(party_.start()); }
  std::vector<Outbound> handle(PartyId from, const Bytes& payload) override {
    return mutate(party_.handle(from, payload));
  }

 private:
  std::vector<Outbound> mutate(std::vector<Outbound> outs) {
    for (auto& o : outs) {
      if (peek_kind(o.payload) != MsgKind::Send || o.to <= n_ / 2) continue;
      auto msg = decode(o.payload);
      auto& send = std::get<SendMsg>(msg);
      if (send.pb_id.proposer != me_ || send.pb_id.step != 1) continue;
      send.value.push_back('!');
      o.payload = encode(msg);
    }
    return outs;
  }
  PartyId me_;
  std::uint32_t n_;
};

// Non-selected party that fires a fabricated 4-step SEND sequence each view.
class RogueBroadcastParty : public HonestParty {
 public:
  RogueBroadcastParty(PartyId id, const EngineConfig& cfg, const KeyMaterial& km,
                      EventSink sink)
      : HonestParty(id, cfg, km, std::move(sink)), me_(id), cfg_(cfg) {}
  std::vector<Outbound> start() override { return augment(party_.start()); }
  std::vector<Outbound> handle(PartyId from, const Bytes& payload) override {
    return augment(party_.handle(from, payload));
  }

 private:
  std::vector<Outbound> augment(std::vector<Outbound> outs) {
    const PartyState& st = party_.state();
    ViewId v = st.view;
    auto it = st.committees.find(v);
    if (it == st.committees.end() || it->second.contains(me_) || fired_.count(v)) {
      return outs;
    }
    fired_.insert(v);
    Bytes value = cfg_.initial_value;
    Digest vd = sha256(value);
    for (std::uint32_t step = 1; step <= 4; ++step) {
      SendMsg send;
      send.pb_id = PbId{cfg_.instance, v, me_, step};
      send.value = value;
      if (step > 1) {
        ThresholdSignature fake;
        fake.message_digest = sha256(ack_payload(send.pb_id.with_step(step - 1), vd));
        fake.sig_bytes = Bytes(32, 0xee);
        send.proof = SendProof{0, fake};
      }
      Bytes payload = encode(Message{send});
      for (PartyId to = 1; to <= cfg_.params.n; ++to) outs.push_back({to, payload});
    }
    return outs;
  }
  PartyId me_;
  EngineConfig cfg_;
  std::set<ViewId> fired_;
};

// Replays a fixed outbound list at startup, ignores all input.
class ScriptedParty : public IParty {
 public:
  explicit ScriptedParty(std::vector<ScriptedMsg> script) : script_(std::move(script)) {}
  std::vector<Outbound> start() override {
    std::vector<Outbound> outs;
    for (const auto& m : script_) outs.push_back({m.to, m.payload});
    return outs;
  }
  std::vector<Outbound> handle(PartyId, const Bytes&) override { return {}; }

 private:
  std::vector<ScriptedMsg> script_;
};

// Pending queue with one index per policy; every pop is O(log n).
class PendingQueue {
 public:
  PendingQueue(Scheduler policy, std::uint64_t seed, const std::set<PartyId>& byz)
      : policy_(policy), rng_(seed), byz_(byz) {}

  void push(Envelope env) {
    std::uint64_t seq = env.seq;
    bool from_byz = byz_.count(env.from) > 0;
    switch (policy_) {
      case Scheduler::Fifo:
      case Scheduler::TargetDelay:
        by_time_.insert({env.deliver_at, seq});
        break;
      case Scheduler::Random:
        order_.push_back(seq);
        break;
      case Scheduler::HonestLast:
        (from_byz ? byz_seqs_ : honest_seqs_).insert(seq);
        break;
    }
    store_.emplace(seq, std::move(env));
  }

  bool empty() const { return store_.empty(); }
  std::size_t size() const { return store_.size(); }

  Envelope pop() {
    std::uint64_t seq = 0;
    switch (policy_) {
      case Scheduler::Fifo:
      case Scheduler::TargetDelay: {
        auto it = by_time_.begin();
        seq = it->second;
        by_time_.erase(it);
        break;
      }
      case Scheduler::Random: {
        std::size_t i = std::size_t(rng_.below(order_.size()));
        seq = order_[i];
        order_[i] = order_.back();
        order_.pop_back();
        break;
      }
      case Scheduler::HonestLast: {
        if (!byz_seqs_.empty()) {
          seq = *byz_seqs_.begin();
          byz_seqs_.erase(byz_seqs_.begin());
        } else {
          auto it = std::prev(honest_seqs_.end());
          seq = *it;
          honest_seqs_.erase(it);
        }
        break;
      }
    }
    auto it = store_.find(seq);
    Envelope env = std::move(it->second);
    store_.erase(it);
    return env;
  }

  std::uint64_t count_honest_to_honest() const {
    std::uint64_t c = 0;
    for (const auto& [_, env] : store_) {
      if (!byz_.count(env.from) && !byz_.count(env.to)) ++c;
    }
    return c;
  }

 private:
  Scheduler policy_;
  Rng rng_;
  const std::set<PartyId>& byz_;
  std::map<std::uint64_t, Envelope> store_;
  std::set<std::pair<std::uint64_t, std::uint64_t>> by_time_;
  std::vector<std::uint64_t> order_;
  std::set<std::uint64_t> byz_seqs_;
  std::set<std::uint64_t> honest_seqs_;
};

}  // namespace

Scheduler scheduler_from_name(const std::string& name) {
  if (name == "fifo") return Scheduler::Fifo;
  if (name == "random") return Scheduler::Random;
  if (name == "honest-last") return Scheduler::HonestLast;
  if (name == "target-delay") return Scheduler::TargetDelay;
  throw ConfigError("unknown scheduler: " + name);
}

const char* scheduler_name(Scheduler s) {
  switch (s) {
    case Scheduler::Fifo: return "fifo";
    case Scheduler::Random: return "random";
    case Scheduler::HonestLast: return "honest-last";
    case Scheduler::TargetDelay: return "target-delay";
  }
  return "?";
}

Behavior behavior_from_name(const std::string& name) {
  if (name == "crash") return Behavior::Crash;
  if (name == "mute") return Behavior::Mute;
  if (name == "equivocate") return Behavior::Equivocate;
  if (name == "rogue-broadcast") return Behavior::RogueBroadcast;
  if (name == "withhold-shares") return Behavior::WithholdShares;
  if (name == "scripted") return Behavior::Scripted;
  throw ConfigError("unknown behavior: " + name);
}

const char* behavior_name(Behavior b) {
  switch (b) {
    case Behavior::Crash: return "crash";
    case Behavior::Mute: return "mute";
    case Behavior::Equivocate: return "equivocate";
    case Behavior::RogueBroadcast: return "rogue-broadcast";
    case Behavior::WithholdShares: return "withhold-shares";
    case Behavior::Scripted: return "scripted";
  }
  return "?";
}

std::set<PartyId> AdversaryConfig::byz_set() const {
  std::set<PartyId> s;
  for (const auto& [id, _] : byzantine) s.insert(id);
  return s;
}

Trace run(const RunConfig& cfg, const AdversaryConfig& adv) {
  return run(cfg, adv, deal(cfg.params));
}

Trace run(const RunConfig& cfg, const AdversaryConfig& adv, const KeyMaterial& km) {
  const std::uint32_t n = cfg.params.n;
  cfg.params.validate();
  if (adv.byzantine.size() > cfg.params.f) {
    throw ConfigError("byzantine set larger than fault bound f");
  }
  for (const auto& [id, _] : adv.byzantine) {
    if (id < 1 || id > n) throw ConfigError("byzantine id out of range");
  }
  if (cfg.values.size() != n) throw ConfigError("need one initial value per party");

  ValidityPredicate valid = cfg.valid ? cfg.valid : [](const Bytes& v) { return !v.empty(); };
  std::set<PartyId> byz = adv.byz_set();

  Trace trace;
  std::uint64_t tick = 0;

  auto sink_for = [&](PartyId id) -> EventSink {
    if (byz.count(id)) return nullptr;  // white-box events come from honest engines only
    return [&trace, &tick](const EngineEvent& ev) {
      TraceEvent te;
      te.tick = tick;
      te.kind = TraceEvent::Kind::Engine;
      te.view = ev.view;
      te.engine = ev;
      trace.events.push_back(std::move(te));
    };
  };

  std::vector<std::unique_ptr<IParty>> parties(n + 1);
  for (PartyId id = 1; id <= n; ++id) {
    EngineConfig ec;
    ec.params = cfg.params;
    ec.kappa = cfg.kappa;
    ec.instance = cfg.instance;
    ec.initial_value = cfg.values[id - 1];
    ec.valid = valid;
    ec.max_views = cfg.max_views;
    auto it = adv.byzantine.find(id);
    if (it == adv.byzantine.end()) {
      parties[id] = std::make_unique<HonestParty>(id, ec, km, sink_for(id));
    } else {
      switch (it->second) {
        case Behavior::Crash:
          parties[id] = std::make_unique<CrashParty>(id, ec, km, nullptr);
          break;
        case Behavior::Mute:
          parties[id] = std::make_unique<MuteParty>(id, ec, km, nullptr);
          break;
        case Behavior::Equivocate:
          parties[id] = std::make_unique<EquivocateParty>(id, ec, km, nullptr);
          break;
        case Behavior::RogueBroadcast:
          parties[id] = std::make_unique<RogueBroadcastParty>(id, ec, km, nullptr);
          break;
        case Behavior::WithholdShares:
          parties[id] = std::make_unique<WithholdSharesParty>(id, ec, km, nullptr);
          break;
        case Behavior::Scripted: {
          auto sit = adv.scripts.find(id);
          std::vector<ScriptedMsg> script;
          if (sit != adv.scripts.end()) script = sit->second;
          parties[id] = std::make_unique<ScriptedParty>(std::move(script));
          break;
        }
      }
    }
  }

  PendingQueue pending(adv.scheduler, adv.seed, byz);
  std::uint64_t next_seq = 1;

  auto delayed = [&](const Envelope& env) -> bool {
    if (adv.scheduler != Scheduler::TargetDelay) return false;
    if (adv.delay_filter) return adv.delay_filter(env);
    for (const auto& [from, to] : adv.delay_pairs) {
      if ((from == 0 || from == env.from) && (to == 0 || to == env.to)) return true;
    }
    return false;
  };

  // Consecutive multicast copies of one payload share a single decode.
  Bytes cache_payload;
  WireCost cache_cost;
  ViewId cache_view = 0;
  bool cache_ok = false;
  auto enqueue = [&](PartyId from, std::vector<Outbound> outs) {
    for (auto& o : outs) {
      Envelope env;
      env.seq = next_seq++;
      env.from = from;
      env.to = o.to;
      env.payload = std::move(o.payload);
      env.sent_at = tick;
      env.deliver_at = tick + (delayed(env) ? adv.delay : 1);

      auto kind = peek_kind(env.payload);
      bool from_byz = byz.count(from) > 0;
      TraceEvent te;
      te.tick = tick;
      te.kind = TraceEvent::Kind::Send;
      te.from = from;
      te.to = env.to;
      te.msg = kind;
      te.from_byz = from_byz;
      if (kind.has_value()) {
        if (!cache_ok || cache_payload != env.payload) {
          cache_payload = env.payload;
          try {
            Message m = decode(env.payload);
            cache_view = view_of(m);
            cache_cost = measure(m);
            cache_ok = true;
          } catch (const CodecError&) {
            cache_view = 0;
            cache_cost = {};
            cache_ok = true;
          }
        }
        te.view = cache_view;
        auto& counts = trace.per_view[te.view];
        (from_byz ? counts.byz : counts.honest).add(*kind);
        if (from_byz) {
          trace.byz_l_bytes += cache_cost.l_bytes;
          trace.byz_k_bytes += cache_cost.k_bytes;
        } else {
          trace.l_bytes += cache_cost.l_bytes;
          trace.k_bytes += cache_cost.k_bytes;
        }
      }
      trace.events.push_back(te);
      ++trace.total_envelopes;
      pending.push(std::move(env));
    }
  };

  for (PartyId id = 1; id <= n; ++id) enqueue(id, parties[id]->start());

  bool cap_reached = false;
  while (!pending.empty()) {
    Envelope env = pending.pop();
    ++tick;
    TraceEvent te;
    te.tick = tick;
    te.kind = TraceEvent::Kind::Deliver;
    te.from = env.from;
    te.to = env.to;
    te.msg = peek_kind(env.payload);
    te.from_byz = byz.count(env.from) > 0;
    trace.events.push_back(te);

    enqueue(env.to, parties[env.to]->handle(env.from, env.payload));
  }

  bool all_honest_decided = true;
  for (PartyId id = 1; id <= n; ++id) {
    const Party* engine = parties[id]->engine();
    PartySnapshot snap;
    snap.id = id;
    snap.byz = byz.count(id) > 0;
    if (engine) {
      const PartyState& st = engine->state();
      snap.view = st.view;
      snap.lock = st.lock;
      snap.prepare_view = st.prepare.view;
      snap.decided = st.decided.has_value();
      if (snap.decided) {
        snap.decided_value = *st.decided;
        snap.decided_view = st.decided_view;
      }
      snap.halted = engine->halted();
      if (!snap.byz) {
        if (!snap.decided) all_honest_decided = false;
        if (st.view > cfg.max_views) cap_reached = true;
      }
    }
    trace.snapshots.push_back(std::move(snap));
  }
  // Every party that froze at the view cap shows up as halted-but-undecided.
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceEvent::Kind::Engine &&
        ev.engine->kind == EngineEvent::Kind::ViewCapReached) {
      cap_reached = true;
    }
  }

  trace.pending_honest_at_end = pending.count_honest_to_honest();
  trace.verdict = all_honest_decided
                      ? Verdict::Decided
                      : (cap_reached ? Verdict::MaxViewsExceeded : Verdict::Stalled);
  return trace;
}

}  // namespace evaba::sim
