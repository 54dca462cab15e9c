#include "evaba/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <zlib.h>

#include "evaba/rng.hpp"
#include "evaba/sha256.hpp"

namespace evaba::harness {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t lane) {
  Rng r(seed * 0x9e3779b97f4a7c15ull + lane);
  return r.next();
}

Bytes default_value(PartyId id) { return to_bytes("v:" + std::to_string(id)); }

bool default_valid(const Bytes& v) {
  return v.size() >= 2 && v[0] == 'v' && v[1] == ':';
}

struct RunSetup {
  sim::RunConfig cfg;
  sim::AdversaryConfig adv;
};

RunSetup make_setup(const ExperimentFlags& flags, std::uint32_t kappa, std::uint64_t run_seed) {
  RunSetup s;
  std::uint32_t f = flags.resolved_f();
  s.cfg.params = CryptoParams{flags.n, flags.n - f, f, mix(run_seed, 1)};
  s.cfg.kappa = kappa;
  s.cfg.instance = mix(run_seed, 3);
  for (PartyId id = 1; id <= flags.n; ++id) s.cfg.values.push_back(default_value(id));
  s.cfg.max_views = flags.max_views;
  s.cfg.valid = default_valid;

  s.adv.scheduler = sim::scheduler_from_name(flags.scheduler);
  s.adv.seed = mix(run_seed, 2);
  if (s.adv.scheduler == sim::Scheduler::TargetDelay) {
    s.adv.delay_pairs = {{1, 0}};  // postpone everything party 1 sends
    s.adv.delay = 16;
  }
  if (flags.adversary != "none") {
    sim::Behavior b = sim::behavior_from_name(flags.adversary);
    std::vector<PartyId> ids = flags.byz;
    if (ids.empty()) {
      for (PartyId id = flags.n - f + 1; id <= flags.n; ++id) ids.push_back(id);
    }
    for (PartyId id : ids) s.adv.byzantine[id] = b;
  }
  return s;
}

RunStats summarize(std::uint64_t run_seed, const sim::Trace& trace, const RunSetup& setup,
                   std::uint32_t kappa) {
  RunStats st;
  st.seed = run_seed;
  st.verdict = trace.verdict;
  st.phases = trace.honest_totals();
  st.byz_messages = trace.byz_totals().total();
  st.l_bytes = trace.l_bytes;
  st.k_bytes = trace.k_bytes;
  st.complexity = check_complexity(trace, setup.cfg.params, kappa);
  st.violations = verify_run(trace, setup.cfg, setup.adv.byz_set());
  if (!st.complexity.pass) {
    for (const auto& fmsg : st.complexity.failures) {
      st.violations.push_back({"complexity", fmsg});
    }
  }
  ViewId max_decided_view = 0;
  for (const auto& snap : trace.snapshots) {
    if (snap.byz || !snap.decided) continue;
    max_decided_view = std::max(max_decided_view, snap.decided_view);
    if (st.decided_digest.empty()) st.decided_digest = hex_prefix(sha256(snap.decided_value));
  }
  st.views_to_decide = max_decided_view;
  return st;
}

std::vector<RunStats> run_batch(const ExperimentFlags& flags, std::uint32_t kappa,
                                std::string* first_trace_text) {
  std::vector<RunStats> results(flags.runs);
  std::vector<std::string> first_text(1);
  std::atomic<std::uint32_t> next{0};
  std::uint32_t jobs = flags.jobs ? flags.jobs : std::thread::hardware_concurrency();
  if (jobs == 0) jobs = 1;
  jobs = std::min(jobs, flags.runs == 0 ? 1u : flags.runs);

  auto worker = [&] {
    for (;;) {
      std::uint32_t i = next.fetch_add(1);
      if (i >= flags.runs) return;
      std::uint64_t run_seed = flags.seed + i;
      RunSetup setup = make_setup(flags, kappa, run_seed);
      sim::Trace trace = sim::run(setup.cfg, setup.adv);
      results[i] = summarize(run_seed, trace, setup, kappa);
      if (i == 0 && first_trace_text) first_text[0] = trace.serialize();
    }
  };
  std::vector<std::thread> pool;
  for (std::uint32_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_trace_text) *first_trace_text = std::move(first_text[0]);
  return results;
}

double mean_of(const std::vector<RunStats>& runs, std::uint64_t sim::PhaseCounts::* field) {
  if (runs.empty()) return 0.0;
  double sum = 0;
  for (const auto& r : runs) sum += double(r.phases.*field);
  return sum / double(runs.size());
}

}  // namespace

ComplexityCheck check_complexity(const sim::Trace& trace, const CryptoParams& params,
                                 std::uint32_t kappa) {
  ComplexityCheck c;
  const std::uint64_t n = params.n;
  const std::uint64_t n2 = n * n;
  c.promotion_bound = 8 * n * kappa;
  auto fail = [&](ViewId view, const std::string& what, std::uint64_t got,
                  std::uint64_t bound) {
    c.pass = false;
    c.failures.push_back("view " + std::to_string(view) + " " + what + " = " +
                         std::to_string(got) + " > " + std::to_string(bound));
  };
  for (const auto& [view, counts] : trace.per_view) {
    const sim::PhaseCounts& h = counts.honest;
    c.max_promotion_per_view = std::max(c.max_promotion_per_view, h.promotion);
    c.max_total_per_view = std::max(c.max_total_per_view, h.total());
    if (h.promotion > c.promotion_bound) fail(view, "promotion", h.promotion, c.promotion_bound);
    if (h.propose > kappa * n) fail(view, "propose", h.propose, kappa * n);
    if (h.suggest > n2) fail(view, "suggest", h.suggest, n2);
    if (h.selection > n2) fail(view, "selection", h.selection, n2);
    if (h.election > n2) fail(view, "election", h.election, n2);
    if (h.view_change > n2) fail(view, "view-change", h.view_change, n2);
    if (h.total() > kTotalPerViewConstant * n2) {
      fail(view, "total", h.total(), kTotalPerViewConstant * n2);
    }
  }
  c.max_total_over_n2 = double(c.max_total_per_view) / double(n2);
  return c;
}

ExperimentReport run_experiment(const ExperimentFlags& flags) {
  if (flags.n < 4 || flags.n != 3 * flags.resolved_f() + 1) {
    throw ConfigError("n must be 3f+1 with n >= 4");
  }
  std::uint32_t f = flags.resolved_f();
  std::uint32_t kappa = flags.resolved_kappa();
  if (kappa < 1 || kappa > flags.n) throw ConfigError("kappa out of range");
  if (!flags.byz.empty() && flags.byz.size() > f) {
    throw ConfigError("|byz| exceeds fault bound f");
  }
  for (PartyId id : flags.byz) {
    if (id < 1 || id > flags.n) throw ConfigError("byz id out of range");
  }
  if (flags.adversary != "none") sim::behavior_from_name(flags.adversary);
  sim::scheduler_from_name(flags.scheduler);

  ExperimentReport report;
  report.flags = flags;
  report.runs = run_batch(flags, kappa, &report.first_trace_text);
  if (flags.baseline) {
    report.baseline_runs = run_batch(flags, flags.n, nullptr);
  }

  if (!flags.trace_path.empty()) write_text_file(flags.trace_path, report.first_trace_text);
  if (!flags.out.empty()) write_text_file(flags.out, report.to_json().dump(2) + "\n");
  return report;
}

std::size_t ExperimentReport::total_violations() const {
  std::size_t c = 0;
  for (const auto& r : runs) c += r.violations.size();
  for (const auto& r : baseline_runs) c += r.violations.size();
  return c;
}

double ExperimentReport::mean_views() const {
  if (runs.empty()) return 0.0;
  double sum = 0;
  std::size_t decided = 0;
  for (const auto& r : runs) {
    if (r.verdict == sim::Verdict::Decided) {
      sum += double(r.views_to_decide);
      ++decided;
    }
  }
  return decided == 0 ? 0.0 : sum / double(decided);
}

double ExperimentReport::p95_views() const {
  std::vector<ViewId> views;
  for (const auto& r : runs) {
    if (r.verdict == sim::Verdict::Decided) views.push_back(r.views_to_decide);
  }
  if (views.empty()) return 0.0;
  std::sort(views.begin(), views.end());
  std::size_t idx = std::size_t(std::ceil(0.95 * double(views.size()))) - 1;
  return double(views[std::min(idx, views.size() - 1)]);
}

double ExperimentReport::mean_promotion() const {
  return mean_of(runs, &sim::PhaseCounts::promotion);
}

double ExperimentReport::baseline_mean_promotion() const {
  return mean_of(baseline_runs, &sim::PhaseCounts::promotion);
}

static Json stats_json(const RunStats& r) {
  Json j;
  j["seed"] = r.seed;
  j["verdict"] = sim::verdict_name(r.verdict);
  j["views_to_decide"] = r.views_to_decide;
  j["decided_digest"] = r.decided_digest;
  j["messages"] = Json{{"selection", r.phases.selection},
                       {"promotion", r.phases.promotion},
                       {"propose_suggest", r.phases.propose + r.phases.suggest},
                       {"election", r.phases.election},
                       {"view_change", r.phases.view_change},
                       {"decide", r.phases.decide},
                       {"total", r.phases.total()},
                       {"byzantine_extra", r.byz_messages}};
  j["bytes"] = Json{{"l_part", r.l_bytes}, {"k_part", r.k_bytes}};
  Json v = Json::array();
  for (const auto& viol : r.violations) {
    v.push_back(Json{{"rule", viol.rule}, {"detail", viol.detail}});
  }
  j["violations"] = v;
  return j;
}

Json ExperimentReport::to_json() const {
  Json j;
  j["version"] = "evaba-report/1";
  j["config"] = Json{{"n", flags.n},
                     {"f", flags.resolved_f()},
                     {"kappa", flags.resolved_kappa()},
                     {"runs", flags.runs},
                     {"seed", flags.seed},
                     {"adversary", flags.adversary},
                     {"scheduler", flags.scheduler},
                     {"max_views", flags.max_views},
                     {"baseline", flags.baseline}};
  std::size_t decided = 0;
  std::uint64_t max_promo = 0;
  double max_total_over_n2 = 0.0;
  for (const auto& r : runs) {
    if (r.verdict == sim::Verdict::Decided) ++decided;
    max_promo = std::max(max_promo, r.complexity.max_promotion_per_view);
    max_total_over_n2 = std::max(max_total_over_n2, r.complexity.max_total_over_n2);
  }
  Json agg;
  agg["runs"] = runs.size();
  agg["decided_runs"] = decided;
  agg["mean_views_to_decide"] = mean_views();
  agg["p95_views_to_decide"] = p95_views();
  agg["mean_messages"] = Json{
      {"selection", mean_of(runs, &sim::PhaseCounts::selection)},
      {"promotion", mean_promotion()},
      {"propose", mean_of(runs, &sim::PhaseCounts::propose)},
      {"suggest", mean_of(runs, &sim::PhaseCounts::suggest)},
      {"election", mean_of(runs, &sim::PhaseCounts::election)},
      {"view_change", mean_of(runs, &sim::PhaseCounts::view_change)},
      {"decide", mean_of(runs, &sim::PhaseCounts::decide)}};
  agg["complexity"] = Json{{"max_promotion_per_view", max_promo},
                           {"promotion_bound_8nk",
                            8ull * flags.n * flags.resolved_kappa()},
                           {"max_total_per_view_over_n2", max_total_over_n2},
                           {"total_constant_c", kTotalPerViewConstant}};
  j["aggregates"] = agg;
  if (flags.baseline) {
    double ratio = mean_promotion() > 0 ? baseline_mean_promotion() / mean_promotion() : 0.0;
    j["baseline"] = Json{{"kappa", flags.n},
                         {"mean_promotion", baseline_mean_promotion()},
                         {"evaba_mean_promotion", mean_promotion()},
                         {"promotion_ratio", ratio},
                         {"expected_n_over_kappa",
                          double(flags.n) / double(flags.resolved_kappa())}};
  }
  Json violations = Json::array();
  for (const auto& r : runs) {
    for (const auto& viol : r.violations) {
      violations.push_back(Json{{"seed", r.seed}, {"rule", viol.rule}, {"detail", viol.detail}});
    }
  }
  j["violations"] = violations;
  Json rj = Json::array();
  for (const auto& r : runs) rj.push_back(stats_json(r));
  j["runs"] = rj;
  return j;
}

std::string ExperimentReport::human_table() const {
  std::ostringstream os;
  os << "evaba experiment: n=" << flags.n << " f=" << flags.resolved_f()
     << " kappa=" << flags.resolved_kappa() << " runs=" << flags.runs
     << " adversary=" << flags.adversary << " scheduler=" << flags.scheduler << "\n";
  std::size_t decided = 0;
  for (const auto& r : runs) {
    if (r.verdict == sim::Verdict::Decided) ++decided;
  }
  os << "  decided runs        : " << decided << "/" << runs.size() << "\n";
  os << "  mean views-to-decide: " << mean_views() << " (p95 " << p95_views() << ")\n";
  os << "  mean promotion msgs : " << mean_promotion() << "\n";
  if (flags.baseline) {
    os << "  baseline (kappa=n)  : " << baseline_mean_promotion() << " promotion msgs, ratio "
       << (mean_promotion() > 0 ? baseline_mean_promotion() / mean_promotion() : 0.0) << "\n";
  }
  os << "  violations          : " << total_violations() << "\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (!gz) throw ConfigError("cannot open " + path);
    if (gzwrite(gz, text.data(), unsigned(text.size())) != int(text.size())) {
      gzclose(gz);
      throw ConfigError("short gzip write to " + path);
    }
    gzclose(gz);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path);
  out << text;
}

CommitteeStatsRow committee_stats(std::uint32_t n, std::uint32_t f, std::uint32_t kappa,
                                  std::uint64_t trials, std::uint64_t seed) {
  CommitteeStatsRow row;
  row.kappa = kappa;
  row.trials = trials;
  row.exact = committee_probability(n, f, kappa);

  CryptoParams params{n, n - f, f, seed};
  KeyMaterial km = deal(params);
  std::vector<CoinShare> shares;
  std::uint64_t all_byz = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Bytes tag = committee_tag(i, 1);
    shares.clear();
    for (PartyId id = 1; id <= f + 1; ++id) shares.push_back(coin_share(km.keys_for(id), tag));
    auto members = coin_toss(km.public_set, tag, shares, n, kappa);
    bool all = true;
    for (PartyId m : members) {
      if (m <= n - f) {  // Byzantine set = top f ids
        all = false;
        break;
      }
    }
    if (all) ++all_byz;
  }
  double p = row.exact.value();
  row.empirical = trials == 0 ? 0.0 : double(all_byz) / double(trials);
  row.sigma = trials == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / double(trials));
  row.within_3_sigma = std::abs(row.empirical - p) <= 3.0 * row.sigma + 1e-12;
  if (kappa <= f) {
    row.bound_ok = p <= std::pow(1.0 / 3.0, double(kappa)) + 1e-12;
  }
  return row;
}

}  // namespace evaba::harness
