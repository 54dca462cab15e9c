#pragma once

#include <map>
#include <set>
#include <string>

#include "evaba/engine.hpp"

namespace evaba::sim {

/// Replayable record of one run: ordered events, per-phase counters, final
/// snapshots. serialize() is byte-stable so identical runs diff clean.
struct TraceEvent {
  enum class Kind { Send, Deliver, Engine };
  std::uint64_t tick = 0;
  Kind kind = Kind::Send;
  // network events
  PartyId from = 0;
  PartyId to = 0;
  std::optional<MsgKind> msg;
  ViewId view = 0;
  bool from_byz = false;
  // engine events (Kind::Engine)
  std::optional<EngineEvent> engine;

  std::string line() const;
};

struct PhaseCounts {
  std::uint64_t selection = 0;
  std::uint64_t promotion = 0;  // SEND + ACK
  std::uint64_t propose = 0;
  std::uint64_t suggest = 0;
  std::uint64_t election = 0;
  std::uint64_t view_change = 0;
  std::uint64_t decide = 0;

  std::uint64_t total() const {
    return selection + promotion + propose + suggest + election + view_change + decide;
  }
  void add(MsgKind kind);
};

struct ViewCounts {
  PhaseCounts honest;
  PhaseCounts byz;
};

struct PartySnapshot {
  PartyId id = 0;
  bool byz = false;
  ViewId view = 0;
  ViewId lock = 0;
  ViewId prepare_view = 0;
  bool decided = false;
  Bytes decided_value;
  ViewId decided_view = 0;
  bool halted = false;
};

enum class Verdict { Decided, MaxViewsExceeded, Stalled };
const char* verdict_name(Verdict v);

struct Trace {
  std::vector<TraceEvent> events;
  std::map<ViewId, ViewCounts> per_view;
  std::uint64_t l_bytes = 0;  // honest-sent value bytes
  std::uint64_t k_bytes = 0;  // honest-sent share/signature bytes
  std::uint64_t byz_l_bytes = 0;
  std::uint64_t byz_k_bytes = 0;
  std::vector<PartySnapshot> snapshots;
  Verdict verdict = Verdict::Stalled;
  std::uint64_t pending_honest_at_end = 0;
  std::uint64_t total_envelopes = 0;

  PhaseCounts honest_totals() const;
  PhaseCounts byz_totals() const;
  std::string serialize() const;
};

}  // namespace evaba::sim
