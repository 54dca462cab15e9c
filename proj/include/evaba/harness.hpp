#pragma once

#include "evaba/checker.hpp"
#include "json.hpp"  // vendored nlohmann/json

namespace evaba::harness {

using Json = nlohmann::ordered_json;

/// Fixed constant for the per-view O(n^2) total-message bound: each all-to-all
/// phase contributes n^2 and the promotion phase 8nk <= 8n^2, summed with the
/// decide broadcast this stays under 14 n^2.
inline constexpr std::uint64_t kTotalPerViewConstant = 14;

struct ExperimentFlags {
  std::uint32_t n = 4;
  std::uint32_t f = 0;      // 0 -> (n-1)/3
  std::uint32_t kappa = 0;  // 0 -> f+1
  std::uint32_t runs = 100;
  std::uint64_t seed = 1;
  std::string adversary = "none";
  std::vector<PartyId> byz;  // empty -> last f ids when adversary != none
  std::string scheduler = "random";
  ViewId max_views = 20;
  bool baseline = false;  // also run kappa = n and compare promotion traffic
  std::string out;        // report file path (empty = none)
  std::string trace_path; // first run's trace (gzipped when path ends in .gz)
  std::uint32_t jobs = 0; // 0 -> hardware concurrency

  std::uint32_t resolved_f() const { return f == 0 ? (n - 1) / 3 : f; }
  std::uint32_t resolved_kappa() const { return kappa == 0 ? resolved_f() + 1 : kappa; }
};

struct ComplexityCheck {
  bool pass = true;
  std::uint64_t max_promotion_per_view = 0;
  std::uint64_t promotion_bound = 0;  // 8 n kappa
  std::uint64_t max_total_per_view = 0;
  double max_total_over_n2 = 0.0;
  std::vector<std::string> failures;
};

/// Per-view message-count assertions from the efficiency analysis: promotion
/// <= 8nk, propose <= kn, each all-to-all phase <= n^2, total <= c n^2.
/// Exact counters, honest traffic only; adversary budget is tracked apart.
ComplexityCheck check_complexity(const sim::Trace& trace, const CryptoParams& params,
                                 std::uint32_t kappa);

struct RunStats {
  std::uint64_t seed = 0;
  sim::Verdict verdict = sim::Verdict::Stalled;
  ViewId views_to_decide = 0;
  std::string decided_digest;
  sim::PhaseCounts phases;  // honest totals
  std::uint64_t byz_messages = 0;
  std::uint64_t l_bytes = 0;
  std::uint64_t k_bytes = 0;
  ComplexityCheck complexity;
  std::vector<Violation> violations;
};

struct ExperimentReport {
  ExperimentFlags flags;
  std::vector<RunStats> runs;
  std::vector<RunStats> baseline_runs;  // kappa = n, when flags.baseline
  std::string first_trace_text;

  std::size_t total_violations() const;
  double mean_views() const;
  double p95_views() const;
  double mean_promotion() const;
  double baseline_mean_promotion() const;
  Json to_json() const;
  std::string human_table() const;
};

ExperimentReport run_experiment(const ExperimentFlags& flags);

/// Writes text to path; gzip-compressed when the path ends in ".gz".
void write_text_file(const std::string& path, const std::string& text);

struct CommitteeStatsRow {
  std::uint32_t kappa = 0;
  Rational exact;
  double empirical = 0.0;
  double sigma = 0.0;
  std::uint64_t trials = 0;
  bool within_3_sigma = true;
  bool bound_ok = true;  // exact <= (1/3)^kappa whenever kappa <= f
};

/// Exact vs Monte Carlo all-Byzantine committee probability, Byzantine set
/// fixed to the top f ids.
CommitteeStatsRow committee_stats(std::uint32_t n, std::uint32_t f, std::uint32_t kappa,
                                  std::uint64_t trials, std::uint64_t seed);

}  // namespace evaba::harness
