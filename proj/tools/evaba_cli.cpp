#include <iostream>

#include "CLI11.hpp"
#include "evaba/harness.hpp"

using namespace evaba;

int main(int argc, char** argv) {
  CLI::App app{"eVABA experiment harness"};
  app.require_subcommand(1);

  harness::ExperimentFlags flags;
  auto* run = app.add_subcommand("run", "run seeded experiments and verify every trace");
  run->add_option("--n", flags.n, "party count (3f+1)")->capture_default_str();
  run->add_option("--f", flags.f, "fault bound (default (n-1)/3)");
  run->add_option("--kappa", flags.kappa, "committee size (default f+1)");
  run->add_option("--runs", flags.runs, "number of seeded runs")->capture_default_str();
  run->add_option("--seed", flags.seed, "base seed")->capture_default_str();
  run->add_option("--adversary", flags.adversary,
                  "none|crash|mute|equivocate|rogue-broadcast|withhold-shares")
      ->capture_default_str();
  run->add_option("--byz", flags.byz, "byzantine party ids (default: last f)");
  run->add_option("--scheduler", flags.scheduler, "fifo|random|honest-last|target-delay")
      ->capture_default_str();
  run->add_option("--max-views", flags.max_views, "view cap per run")->capture_default_str();
  run->add_flag("--baseline", flags.baseline, "also run kappa=n and report the ratio");
  run->add_option("--out", flags.out, "write machine report (json) here");
  run->add_option("--trace", flags.trace_path, "write first run's trace here (.gz to compress)");
  run->add_option("--jobs", flags.jobs, "worker threads (default: hardware)");

  std::uint32_t cs_n = 10, cs_f = 3, cs_kappa = 0;
  std::uint64_t cs_trials = 100000, cs_seed = 1;
  auto* stats = app.add_subcommand("committee-stats",
                                   "exact vs Monte Carlo all-Byzantine committee probability");
  stats->add_option("--n", cs_n, "party count (3f+1)")->capture_default_str();
  stats->add_option("--f", cs_f, "fault bound")->capture_default_str();
  stats->add_option("--kappa", cs_kappa, "committee size (default f+1; 0 sweeps 1..f+1)");
  stats->add_option("--trials", cs_trials, "Monte Carlo trials")->capture_default_str();
  stats->add_option("--seed", cs_seed, "dealer seed")->capture_default_str();

  std::uint32_t deal_n = 4, deal_f = 1, deal_t = 0;
  std::uint64_t deal_seed = 1;
  std::string deal_out = "keys.evtc";
  auto* deal_cmd = app.add_subcommand("deal", "deal key material to an EVTC file");
  deal_cmd->add_option("--n", deal_n, "party count (3f+1)")->capture_default_str();
  deal_cmd->add_option("--f", deal_f, "fault bound")->capture_default_str();
  deal_cmd->add_option("--t", deal_t, "signing threshold (default n-f)");
  deal_cmd->add_option("--seed", deal_seed, "dealer seed")->capture_default_str();
  deal_cmd->add_option("--out", deal_out, "output path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      harness::ExperimentReport report = harness::run_experiment(flags);
      std::cout << report.human_table();
      if (report.total_violations() > 0) {
        std::cerr << "FAIL: " << report.total_violations() << " violation(s)\n";
        return 1;
      }
      return 0;
    }
    if (stats->parsed()) {
      std::vector<std::uint32_t> kappas;
      if (cs_kappa == 0) {
        for (std::uint32_t k = 1; k <= cs_f + 1; ++k) kappas.push_back(k);
      } else {
        kappas.push_back(cs_kappa);
      }
      std::cout << "kappa  exact          exact(float)   empirical      3sigma-ok  (1/3)^k-ok\n";
      bool ok = true;
      for (std::uint32_t k : kappas) {
        auto row = harness::committee_stats(cs_n, cs_f, k, cs_trials, cs_seed);
        std::printf("%-6u %-14s %-14.8g %-14.8g %-10s %s\n", k, row.exact.str().c_str(),
                    row.exact.value(), row.empirical, row.within_3_sigma ? "yes" : "NO",
                    row.bound_ok ? "yes" : "NO");
        ok = ok && row.within_3_sigma && row.bound_ok;
      }
      return ok ? 0 : 1;
    }
    if (deal_cmd->parsed()) {
      CryptoParams params{deal_n, deal_t == 0 ? deal_n - deal_f : deal_t, deal_f, deal_seed};
      KeyMaterial km = deal(params);
      km.save(deal_out);
      std::cout << "wrote " << deal_out << " (n=" << params.n << " t=" << params.t
                << " f=" << params.f << ")\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
