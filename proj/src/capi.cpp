#include "trmoa/trmoa.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "trmoa/bench.hpp"
#include "trmoa/error.hpp"
#include "trmoa/instance_io.hpp"

struct trmoa_instance {
  std::shared_ptr<const trmoa::Instance> instance;
  // Extra manifest keys recording how the instance was produced.
  trmoa::Manifest manifest;
};

struct trmoa_result {
  std::shared_ptr<const trmoa::Instance> instance;
  trmoa::SolveResult result;
};

namespace {

thread_local std::string g_last_error;

trmoa_status fail(trmoa_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

// Runs f, translating exceptions into status codes.
template <class F>
trmoa_status guarded(F&& f) noexcept {
  try {
    g_last_error.clear();
    return f();
  } catch (const trmoa::ParseError& e) {
    return fail(TRMOA_E_PARSE, e.what());
  } catch (const trmoa::IoError& e) {
    return fail(TRMOA_E_IO, e.what());
  } catch (const trmoa::GuardRailExceeded& e) {
    return fail(TRMOA_E_GUARD_RAIL, e.what());
  } catch (const trmoa::InvalidInput& e) {
    return fail(TRMOA_E_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TRMOA_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TRMOA_E_INTERNAL, e.what());
  } catch (...) {
    return fail(TRMOA_E_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

trmoa::SolverConfig to_config(const trmoa_solver_config& c) {
  trmoa::SolverConfig cfg;
  switch (c.algorithm) {
    case TRMOA_ALGO_BG: cfg.algorithm = trmoa::Algorithm::bg; break;
    case TRMOA_ALGO_RG: cfg.algorithm = trmoa::Algorithm::rg; break;
    case TRMOA_ALGO_RLS: cfg.algorithm = trmoa::Algorithm::rls; break;
    case TRMOA_ALGO_RANDOM: cfg.algorithm = trmoa::Algorithm::random; break;
    case TRMOA_ALGO_ORACLE: cfg.algorithm = trmoa::Algorithm::oracle; break;
    default: throw trmoa::InvalidInput("unknown algorithm code");
  }
  cfg.epsilon = c.epsilon;
  cfg.rls_iters = c.rls_iters;
  cfg.seed = c.seed;
  cfg.regret.delta = c.delta;
  cfg.tags.omega = c.omega;
  cfg.gamma = c.gamma;
  if (c.score_context != TRMOA_SCORE_TAG && c.score_context != TRMOA_SCORE_FULL) {
    throw trmoa::InvalidInput("unknown score context");
  }
  cfg.score_context = c.score_context == TRMOA_SCORE_TAG ? trmoa::ScoreContext::tag
                                                         : trmoa::ScoreContext::full;
  if (c.score_denominator != TRMOA_DENOM_COST && c.score_denominator != TRMOA_DENOM_INFLUENCE) {
    throw trmoa::InvalidInput("unknown score denominator");
  }
  cfg.score_denominator = c.score_denominator == TRMOA_DENOM_COST
                              ? trmoa::ScoreDenominator::cost
                              : trmoa::ScoreDenominator::influence;
  cfg.early_stop = c.early_stop != 0;
  cfg.rg_sample_override = c.rg_sample_override;
  cfg.oracle_max_slots = c.oracle_max_slots;
  cfg.oracle_max_advertisers = c.oracle_max_advertisers;
  return cfg;
}

#define TRMOA_REQUIRE(cond, what) \
  if (!(cond)) return fail(TRMOA_E_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* trmoa_version(void) { return "1.0.0"; }

const char* trmoa_last_error(void) { return g_last_error.c_str(); }

void trmoa_generator_params_default(trmoa_generator_params* p) {
  if (!p) return;
  const trmoa::GeneratorParams g;
  *p = {g.alpha, g.beta, g.users, g.boards, g.tags, g.t1, g.t2, g.slot_duration, g.gamma, g.seed};
}

void trmoa_solver_config_default(trmoa_solver_config* c) {
  if (!c) return;
  const trmoa::SolverConfig s;
  *c = {TRMOA_ALGO_BG,   s.epsilon,        s.rls_iters,       s.seed,
        s.regret.delta,  s.tags.omega,     s.gamma,           TRMOA_SCORE_TAG,
        TRMOA_DENOM_COST, 0,               s.rg_sample_override, s.oracle_max_slots,
        s.oracle_max_advertisers};
}

void trmoa_ingest_options_default(trmoa_ingest_options* o) {
  if (!o) return;
  const trmoa::IngestOptions d;
  *o = {0, 0, 0, 0, d.slot_duration, d.gamma, d.seed, d.keep_unseen_boards ? 1 : 0};
}

trmoa_status trmoa_algorithm_parse(const char* name, trmoa_algorithm* out) {
  TRMOA_REQUIRE(name && out, "null argument");
  const auto a = trmoa::algorithm_from_string(name);
  if (!a) return fail(TRMOA_E_INVALID_ARGUMENT, std::string("unknown algorithm '") + name + "'");
  *out = static_cast<trmoa_algorithm>(static_cast<int>(*a));
  return TRMOA_OK;
}

trmoa_status trmoa_instance_generate(const trmoa_generator_params* params, trmoa_instance** out) {
  TRMOA_REQUIRE(params && out, "null argument");
  return guarded([&] {
    trmoa::GeneratorParams g;
    g.alpha = params->alpha;
    g.beta = params->beta;
    g.users = params->users;
    g.boards = params->boards;
    g.tags = params->tags;
    g.t1 = params->t1;
    g.t2 = params->t2;
    g.slot_duration = params->slot_duration;
    g.gamma = params->gamma;
    g.seed = params->seed;
    auto inst = std::make_shared<const trmoa::Instance>(trmoa::generate_instance(g));
    trmoa::Manifest m{{"source", "generated"},
                      {"alpha", trmoa::format_double(g.alpha)},
                      {"beta", trmoa::format_double(g.beta)},
                      {"users", std::to_string(g.users)},
                      {"boards", std::to_string(g.boards)},
                      {"tags", std::to_string(g.tags)},
                      {"gamma", trmoa::format_double(g.gamma)},
                      {"seed", std::to_string(g.seed)}};
    *out = new trmoa_instance{std::move(inst), std::move(m)};
    return TRMOA_OK;
  });
}

trmoa_status trmoa_instance_ingest(const char* trajectories, const char* affinities,
                                   const char* billboards, const char* advertisers,
                                   const trmoa_ingest_options* options, trmoa_instance** out,
                                   char** log) {
  TRMOA_REQUIRE(trajectories && affinities && billboards && advertisers && out,
                "null argument");
  return guarded([&] {
    trmoa::IngestOptions opt;
    if (options) {
      if (options->has_t1) opt.t1 = options->t1;
      if (options->has_t2) opt.t2 = options->t2;
      opt.slot_duration = options->slot_duration;
      opt.gamma = options->gamma;
      opt.seed = options->seed;
      opt.keep_unseen_boards = options->keep_unseen_boards != 0;
    }
    auto rep = trmoa::ingest_csv({trajectories, affinities, billboards, advertisers}, opt);
    std::string text;
    for (const auto& line : rep.log) text += line + "\n";
    if (!rep.validation.ok()) {
      std::string msg = "ingested instance failed validation:";
      for (const auto& v : rep.validation.violations) msg += "\n  " + v.kind + ": " + v.message;
      return fail(TRMOA_E_VALIDATION, msg);
    }
    if (log) *log = copy_string(text);
    trmoa::Manifest m{{"source", "ingested"},
                      {"gamma", trmoa::format_double(opt.gamma)},
                      {"seed", std::to_string(opt.seed)}};
    *out = new trmoa_instance{std::make_shared<const trmoa::Instance>(std::move(rep.instance)),
                              std::move(m)};
    return TRMOA_OK;
  });
}

trmoa_status trmoa_instance_load(const char* dir, trmoa_instance** out) {
  TRMOA_REQUIRE(dir && out, "null argument");
  return guarded([&] {
    trmoa::Manifest m;
    auto inst = std::make_shared<const trmoa::Instance>(trmoa::load_instance(dir, &m));
    *out = new trmoa_instance{std::move(inst), std::move(m)};
    return TRMOA_OK;
  });
}

trmoa_status trmoa_instance_save(const trmoa_instance* instance, const char* dir) {
  TRMOA_REQUIRE(instance && dir, "null argument");
  return guarded([&] {
    trmoa::save_instance(*instance->instance, dir, instance->manifest);
    return TRMOA_OK;
  });
}

void trmoa_instance_free(trmoa_instance* instance) { delete instance; }

trmoa_status trmoa_instance_validate(const trmoa_instance* instance) {
  TRMOA_REQUIRE(instance, "null argument");
  return guarded([&] {
    const auto v = trmoa::validate_instance(*instance->instance);
    if (v.ok()) return TRMOA_OK;
    std::string msg = std::to_string(v.violations.size()) + " violation(s)";
    for (const auto& x : v.violations) msg += "\n  " + x.kind + ": " + x.message;
    return fail(TRMOA_E_VALIDATION, msg);
  });
}

trmoa_status trmoa_instance_stats_get(const trmoa_instance* instance, double gamma,
                                      trmoa_instance_stats* out) {
  TRMOA_REQUIRE(instance && out, "null argument");
  return guarded([&] {
    const auto& in = *instance->instance;
    const trmoa::InfluenceEngine engine(in, gamma);
    double demand = 0.0;
    for (const auto& a : in.advertisers) demand += a.demand;
    *out = {engine.user_count(),  in.trajectories.size(),       in.affinities.size(),
            in.boards.size(),     in.slots.size(),              in.advertisers.size(),
            engine.tag_universe().size(), engine.supply(),      demand};
    return TRMOA_OK;
  });
}

trmoa_status trmoa_solve(const trmoa_instance* instance, const trmoa_solver_config* config,
                         trmoa_result** out) {
  TRMOA_REQUIRE(instance && config && out, "null argument");
  return guarded([&] {
    const auto cfg = to_config(*config);
    auto res = trmoa::solve(*instance->instance, cfg);
    *out = new trmoa_result{instance->instance, std::move(res)};
    return TRMOA_OK;
  });
}

trmoa_status trmoa_result_summary_get(const trmoa_result* result, trmoa_result_summary* out) {
  TRMOA_REQUIRE(result && out, "null argument");
  const auto& r = result->result;
  *out = {r.report.total,
          r.report.excessive,
          r.report.unsatisfied,
          r.report.satisfied_count,
          r.allocation.allocated_count(),
          r.leftover.size(),
          r.trace.wall_ms,
          r.trace.rng_draws,
          r.trace.warm_start_regret ? 1 : 0,
          r.trace.warm_start_regret.value_or(0.0),
          r.trace.improvements};
  g_last_error.clear();
  return TRMOA_OK;
}

trmoa_status trmoa_result_serialize(const trmoa_result* result, char** out) {
  TRMOA_REQUIRE(result && out, "null argument");
  return guarded([&] {
    const auto& r = result->result;
    *out = copy_string(trmoa::serialize_allocation(r.allocation, r.report, *result->instance));
    return TRMOA_OK;
  });
}

trmoa_status trmoa_result_write_trace(const trmoa_result* result, const char* path) {
  TRMOA_REQUIRE(result && path, "null argument");
  return guarded([&] {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw trmoa::IoError(std::string("cannot write ") + path);
    trmoa::write_trace_csv(f, result->result.trace, *result->instance);
    if (!f) throw trmoa::IoError(std::string("write failed for ") + path);
    return TRMOA_OK;
  });
}

void trmoa_result_free(trmoa_result* result) { delete result; }

trmoa_status trmoa_sweep_run(const char* grid_file, const char* out_dir, const char* algorithms,
                             uint64_t seeds, uint64_t jobs, trmoa_sweep_summary* out) {
  TRMOA_REQUIRE(grid_file && out_dir, "null argument");
  return guarded([&] {
    auto spec = trmoa::load_grid(grid_file);
    if (algorithms && *algorithms) {
      std::istringstream line(std::string("algos=") + algorithms);
      spec = trmoa::parse_grid(line, "--algos", spec);
    }
    if (seeds) spec.seeds = seeds;
    if (jobs) spec.jobs = jobs;
    const auto res = trmoa::run_sweep(spec, std::filesystem::path(out_dir));
    if (out) *out = {res.rows.size(), res.flagged};
    return TRMOA_OK;
  });
}

trmoa_status trmoa_rg_sample_size(uint64_t remaining, double epsilon, uint64_t* out) {
  TRMOA_REQUIRE(out, "null argument");
  return guarded([&] {
    *out = trmoa::rg_sample_size(remaining, epsilon);
    return TRMOA_OK;
  });
}

void trmoa_string_free(char* text) { std::free(text); }

}  // extern "C"
