// Command-line front end over the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "trmoa/trmoa.h"

namespace {

// Exit codes beyond CLI11's own usage errors.
constexpr int kExitFailure = 1;
constexpr int kExitFlagged = 3;

int report(trmoa_status status) {
  if (status == TRMOA_OK) return 0;
  std::cerr << "error: " << trmoa_last_error() << '\n';
  return kExitFailure;
}

struct InstanceGuard {
  trmoa_instance* p = nullptr;
  ~InstanceGuard() { trmoa_instance_free(p); }
};

struct ResultGuard {
  trmoa_result* p = nullptr;
  ~ResultGuard() { trmoa_result_free(p); }
};

void print_stats(const trmoa_instance* instance, double gamma) {
  trmoa_instance_stats st{};
  if (trmoa_instance_stats_get(instance, gamma, &st) != TRMOA_OK) return;
  std::cerr << "users=" << st.users << " records=" << st.trajectory_records
            << " affinities=" << st.affinities << " boards=" << st.boards
            << " slots=" << st.slots << " advertisers=" << st.advertisers << " tags=" << st.tags
            << " supply=" << st.supply << " demand=" << st.total_demand << '\n';
}

int write_text(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << "error: cannot write " << path << '\n';
    return kExitFailure;
  }
  return 0;
}

struct RunOptions {
  std::string instance;
  std::string algo = "bg";
  std::string out = "-";
  std::string trace;
  std::string score_context = "tag";
  std::string score_denominator = "cost";
  trmoa_solver_config cfg{};
};

int run_solve(RunOptions& o) {
  if (trmoa_algorithm_parse(o.algo.c_str(), &o.cfg.algorithm) != TRMOA_OK) {
    return report(TRMOA_E_INVALID_ARGUMENT);
  }
  o.cfg.score_context = o.score_context == "full" ? TRMOA_SCORE_FULL : TRMOA_SCORE_TAG;
  o.cfg.score_denominator =
      o.score_denominator == "influence" ? TRMOA_DENOM_INFLUENCE : TRMOA_DENOM_COST;

  InstanceGuard inst;
  if (int rc = report(trmoa_instance_load(o.instance.c_str(), &inst.p))) return rc;
  ResultGuard res;
  if (int rc = report(trmoa_solve(inst.p, &o.cfg, &res.p))) return rc;

  char* text = nullptr;
  if (int rc = report(trmoa_result_serialize(res.p, &text))) return rc;
  const int rc = write_text(o.out, text);
  trmoa_string_free(text);
  if (rc) return rc;
  if (!o.trace.empty()) {
    if (int t = report(trmoa_result_write_trace(res.p, o.trace.c_str()))) return t;
  }

  trmoa_result_summary s{};
  trmoa_result_summary_get(res.p, &s);
  std::cerr << o.algo << ": total_regret=" << s.total_regret
            << " excessive=" << s.excessive_regret << " unsatisfied=" << s.unsatisfied_regret
            << " satisfied=" << s.satisfied_advertisers << " allocated=" << s.allocated_slots
            << " wall_ms=" << s.wall_ms << '\n';
  return 0;
}

void add_regret_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--instance", o.instance, "Instance directory")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--delta", o.cfg.delta, "Unsatisfied penalty ratio in [0, 1]")->capture_default_str();
  cmd->add_option("--omega", o.cfg.omega, "Tag selection stopping ratio in (0, 1)")->capture_default_str();
  cmd->add_option("--gamma", o.cfg.gamma, "Exposure radius in meters")->capture_default_str();
  cmd->add_option("--out", o.out, "Allocation output file, '-' for stdout")->capture_default_str();
  cmd->add_option("--trace", o.trace, "Selection trace CSV");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regret-minimizing billboard slot allocation"};
  app.set_version_flag("--version", std::string(trmoa_version()));
  app.require_subcommand(1);

  // gen
  trmoa_generator_params gen{};
  trmoa_generator_params_default(&gen);
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic instance");
  gen_cmd->add_option("--alpha", gen.alpha, "Total demand over supply")->capture_default_str();
  gen_cmd->add_option("--beta", gen.beta, "Average advertiser demand over supply")->capture_default_str();
  gen_cmd->add_option("--users", gen.users)->capture_default_str();
  gen_cmd->add_option("--boards", gen.boards)->capture_default_str();
  gen_cmd->add_option("--tags", gen.tags, "Tag universe size")->capture_default_str();
  gen_cmd->add_option("--t1", gen.t1, "Horizon start (seconds)")->capture_default_str();
  gen_cmd->add_option("--t2", gen.t2, "Horizon end (seconds)")->capture_default_str();
  gen_cmd->add_option("--slot-duration", gen.slot_duration)->capture_default_str();
  gen_cmd->add_option("--gamma", gen.gamma, "Exposure radius in meters")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output directory")->required();

  // ingest
  std::string traj, aff, boards, advs, ingest_out;
  trmoa_ingest_options ing{};
  trmoa_ingest_options_default(&ing);
  bool keep_unseen = false;
  auto* ingest_cmd = app.add_subcommand("ingest", "Assemble an instance from CSV files");
  ingest_cmd->add_option("--trajectories", traj)->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--affinities", aff)->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--billboards", boards)->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--advertisers", advs)->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest_out, "Output directory")->required();
  auto* t1_opt = ingest_cmd->add_option("--t1", ing.t1, "Horizon start; default earliest record");
  auto* t2_opt = ingest_cmd->add_option("--t2", ing.t2, "Horizon end; default covers every record");
  ingest_cmd->add_option("--slot-duration", ing.slot_duration)->capture_default_str();
  ingest_cmd->add_option("--gamma", ing.gamma, "Radius for dropping unseen boards")->capture_default_str();
  ingest_cmd->add_option("--seed", ing.seed, "Seed for slot cost multipliers")->capture_default_str();
  ingest_cmd->add_flag("--keep-unseen-boards", keep_unseen);

  // run
  RunOptions run;
  trmoa_solver_config_default(&run.cfg);
  auto* run_cmd = app.add_subcommand("run", "Solve one instance");
  add_regret_options(run_cmd, run);
  run_cmd->add_option("--algo", run.algo)->check(CLI::IsMember({"bg", "rg", "rls", "random", "oracle"}))->capture_default_str();
  run_cmd->add_option("--epsilon", run.cfg.epsilon, "Sampling error for rg")->capture_default_str();
  run_cmd->add_option("--rls-iters", run.cfg.rls_iters)->capture_default_str();
  run_cmd->add_option("--seed", run.cfg.seed)->capture_default_str();
  run_cmd->add_option("--score-context", run.score_context)->check(CLI::IsMember({"tag", "full"}))->capture_default_str();
  run_cmd->add_option("--score-denominator", run.score_denominator)->check(CLI::IsMember({"cost", "influence"}))->capture_default_str();
  bool early_stop = false;
  run_cmd->add_flag("--early-stop", early_stop, "Stop an advertiser when a pick would raise its regret");
  run_cmd->add_option("--rg-sample", run.cfg.rg_sample_override, "Force the rg sample size");

  // oracle
  RunOptions orc;
  trmoa_solver_config_default(&orc.cfg);
  orc.algo = "oracle";
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact minimum regret on a tiny instance");
  add_regret_options(oracle_cmd, orc);
  oracle_cmd->add_option("--max-slots", orc.cfg.oracle_max_slots)->capture_default_str();
  oracle_cmd->add_option("--max-advertisers", orc.cfg.oracle_max_advertisers)->capture_default_str();

  // sweep
  std::string grid, sweep_out, algos;
  std::uint64_t seeds = 0, jobs = 0;
  bool strict = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep_cmd->add_option("--grid", grid, "Grid file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--algos", algos, "Comma-separated algorithms; overrides the grid file");
  sweep_cmd->add_option("--seeds", seeds, "Repetitions per cell; overrides the grid file");
  sweep_cmd->add_option("--jobs", jobs, "Worker threads");
  sweep_cmd->add_option("--out", sweep_out, "Output directory")->required();
  sweep_cmd->add_flag("--strict", strict, "Exit non-zero when any row is flagged");

  CLI11_PARSE(app, argc, argv);

  if (*gen_cmd) {
    InstanceGuard inst;
    if (int rc = report(trmoa_instance_generate(&gen, &inst.p))) return rc;
    if (int rc = report(trmoa_instance_save(inst.p, gen_out.c_str()))) return rc;
    print_stats(inst.p, gen.gamma);
    return 0;
  }
  if (*ingest_cmd) {
    ing.has_t1 = t1_opt->count() > 0;
    ing.has_t2 = t2_opt->count() > 0;
    ing.keep_unseen_boards = keep_unseen ? 1 : 0;
    InstanceGuard inst;
    char* log = nullptr;
    if (int rc = report(trmoa_instance_ingest(traj.c_str(), aff.c_str(), boards.c_str(),
                                              advs.c_str(), &ing, &inst.p, &log))) {
      return rc;
    }
    std::cerr << log;
    trmoa_string_free(log);
    if (int rc = report(trmoa_instance_save(inst.p, ingest_out.c_str()))) return rc;
    print_stats(inst.p, ing.gamma);
    return 0;
  }
  if (*run_cmd) {
    run.cfg.early_stop = early_stop ? 1 : 0;
    return run_solve(run);
  }
  if (*oracle_cmd) return run_solve(orc);
  if (*sweep_cmd) {
    trmoa_sweep_summary s{};
    if (int rc = report(trmoa_sweep_run(grid.c_str(), sweep_out.c_str(), algos.c_str(), seeds,
                                        jobs, &s))) {
      return rc;
    }
    std::cerr << "rows=" << s.rows << " flagged=" << s.flagged << " out=" << sweep_out << '\n';
    if (strict && s.flagged > 0) return kExitFlagged;
    return 0;
  }
  return 0;
}
