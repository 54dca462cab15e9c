#pragma once

#include <functional>
#include <map>
#include <set>

#include "evaba/trace.hpp"

namespace evaba::sim {

/// Wire unit. deliver_at is a scheduling priority for the fifo/target-delay
/// policies; the random and honest-last policies order by their own rule.
struct Envelope {
  std::uint64_t seq = 0;
  PartyId from = 0;
  PartyId to = 0;
  Bytes payload;
  std::uint64_t sent_at = 0;
  std::uint64_t deliver_at = 0;
};

enum class Scheduler { Fifo, Random, HonestLast, TargetDelay };
Scheduler scheduler_from_name(const std::string& name);
const char* scheduler_name(Scheduler s);

enum class Behavior { Crash, Mute, Equivocate, RogueBroadcast, WithholdShares, Scripted };
Behavior behavior_from_name(const std::string& name);
const char* behavior_name(Behavior b);

struct ScriptedMsg {
  PartyId to = 0;
  Bytes payload;
};

struct AdversaryConfig {
  Scheduler scheduler = Scheduler::Random;
  std::map<PartyId, Behavior> byzantine;  // |byzantine| <= f
  std::uint64_t seed = 1;
  // target-delay policy: envelopes matching any (from, to) pair (0 = any) are
  // postponed by `delay` priority units; tests may install a finer filter.
  std::vector<std::pair<PartyId, PartyId>> delay_pairs;
  std::uint64_t delay = 16;
  std::function<bool(const Envelope&)> delay_filter;
  std::map<PartyId, std::vector<ScriptedMsg>> scripts;

  std::set<PartyId> byz_set() const;
};

struct RunConfig {
  CryptoParams params;
  std::uint32_t kappa = 0;  // 0 -> f+1
  std::uint64_t instance = 1;
  std::vector<Bytes> values;  // per-party initial values, index id-1
  ViewId max_views = 20;
  ValidityPredicate valid;  // default: non-empty
};

/// Drive all parties under the adversary until the network drains. Every
/// honest-to-honest envelope is delivered before any verdict; the whole run
/// is a deterministic function of (config, adversary).
Trace run(const RunConfig& cfg, const AdversaryConfig& adv);

/// Same, with pre-dealt key material (dealing is pure, this is a fast path).
Trace run(const RunConfig& cfg, const AdversaryConfig& adv, const KeyMaterial& km);

}  // namespace evaba::sim
