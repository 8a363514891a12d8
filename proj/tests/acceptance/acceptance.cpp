// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "trmoa/allocators.hpp"
#include "trmoa/bench.hpp"
#include "trmoa/instance_io.hpp"

using namespace trmoa;

namespace {

// Tolerances and budgets; fixed here so they cannot drift with the data.
constexpr double kPropertyTol = 1e-9;
constexpr double kOracleTol = 1e-9;
// Mean bg regret may exceed mean rg regret by at most this factor.
constexpr double kBgRgSlack = 1.05;
constexpr double kBudget1Sec = 10.0;
constexpr double kBudget3Sec = 120.0;
constexpr double kBudget4Sec = 300.0;
constexpr std::size_t kPropertyInstances = 500;
constexpr std::size_t kOracleInstances = 100;
constexpr std::size_t kSweepSeeds = 10;
constexpr std::size_t kRlsSeeds = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Verdict& v) {
  std::printf("%s criterion %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// --- 1 -----------------------------------------------------------------------

Verdict influence_properties() {
  const auto start = Clock::now();
  std::size_t checks = 0, violations = 0;
  double worst = 0.0;
  std::mt19937_64 g(1);
  for (std::size_t n = 0; n < kPropertyInstances; ++n) {
    const auto in = fixtures::random_micro(1000 + n, {20, 8, 6, 3});
    const InfluenceEngine engine(in, 100.0);
    const std::size_t m = in.slots.size();

    std::vector<std::vector<TagId>> tag_sets = {fixtures::all_tags(in)};
    for (const auto& a : in.advertisers) tag_sets.push_back(a.tags);
    for (const auto& tags : tag_sets) {
      const auto ctx = engine.context(tags);
      std::vector<double> f(std::size_t{1} << m);
      for (std::size_t mask = 0; mask < f.size(); ++mask) {
        std::vector<SlotId> s;
        for (std::size_t k = 0; k < m; ++k) {
          if (mask >> k & 1U) s.push_back(SlotId{static_cast<std::int64_t>(k)});
        }
        f[mask] = engine.influence(s, ctx);
        ++checks;
        if (f[mask] < -kPropertyTol) ++violations;
      }
      // Every pair A subset of B and every slot x outside B.
      for (std::size_t b = 0; b < f.size(); ++b) {
        for (std::size_t a = b;; a = (a - 1) & b) {
          for (std::size_t k = 0; k < m; ++k) {
            const std::size_t bit = std::size_t{1} << k;
            if (b & bit) continue;
            const double ga = f[a | bit] - f[a];
            const double gb = f[b | bit] - f[b];
            checks += 2;
            worst = std::max({worst, -ga, gb - ga});
            if (ga < -kPropertyTol) ++violations;
            if (gb > ga + kPropertyTol) ++violations;
          }
          if (a == 0) break;
        }
      }
    }
  }
  const double secs = seconds_since(start);
  Verdict v;
  v.pass = violations == 0 && secs < kBudget1Sec;
  v.detail = std::to_string(kPropertyInstances) + " instances, " + std::to_string(checks) +
             " checks, " + std::to_string(violations) + " violations, worst slack " + fmt(worst) +
             ", " + fmt(secs) + " s";
  return v;
}

// --- 2 -----------------------------------------------------------------------

Verdict regret_golden() {
  Verdict v;
  std::string bad;
  const RegretParams half{0.5};
  if (advertiser_regret(6, 6, 9, half).value != 0.0) bad += " a1";
  if (advertiser_regret(8, 7, 12, half).value != 12.0 / 7.0) bad += " a2";
  if (advertiser_regret(6, 8, 18, half).value != 11.25) bad += " a3";

  // Same values through the full influence path.
  const auto in = fixtures::worked_example();
  const InfluenceEngine engine(in, 100.0);
  Allocation alloc(3, 5);
  for (auto [adv, slot] : {std::pair{0, 0}, {0, 4}, {1, 1}, {1, 2}, {2, 3}}) {
    alloc.assign(static_cast<std::size_t>(adv), TagId{1}, SlotId{slot});
  }
  const std::vector<std::vector<TagId>> tags(3, {TagId{1}});
  const auto rep = total_regret(alloc, in, tags, half, engine);
  if (rep.per_advertiser[0].value != 0.0 || rep.per_advertiser[1].value != 12.0 / 7.0 ||
      rep.per_advertiser[2].value != 11.25) {
    bad += " engine-path";
  }

  const double sigma = 8.0, u = 18.0;
  const auto at = advertiser_regret(sigma, sigma, u, half);
  const auto under = advertiser_regret(std::nextafter(sigma, 0.0), sigma, u, half);
  if (at.value != 0.0 || at.kind != RegretKind::zero) bad += " boundary-at";
  if (under.kind != RegretKind::unsatisfied || std::abs(under.value - u * 0.5) > 1e-12) {
    bad += " boundary-below";
  }
  v.pass = bad.empty();
  v.detail = v.pass ? "a1=0 a2=" + fmt(rep.per_advertiser[1].value) +
                          " a3=11.25; boundary 0 vs " + fmt(under.value)
                    : "mismatch:" + bad;
  return v;
}

// --- 3 -----------------------------------------------------------------------

Verdict oracle_dominance() {
  const auto start = Clock::now();
  std::size_t violations = 0, feasibility = 0;
  double bg_sum = 0.0, rg_sum = 0.0;
  for (std::size_t n = 0; n < kOracleInstances; ++n) {
    const auto in = fixtures::random_micro(5000 + n, {20, 8, 6, 3});
    const InfluenceEngine engine(in, 100.0);
    SolverConfig cfg;
    cfg.seed = n;
    cfg.algorithm = Algorithm::oracle;
    const auto exact = solve(in, engine, cfg);
    auto check = [&](const SolveResult& r) {
      if (!allocation_is_feasible(r.allocation, in, r.refined_tags, engine).disjoint) ++feasibility;
    };
    check(exact);
    for (auto a : {Algorithm::bg, Algorithm::rg, Algorithm::rls, Algorithm::random}) {
      cfg.algorithm = a;
      const auto r = solve(in, engine, cfg);
      check(r);
      if (exact.report.total > r.report.total + kOracleTol * std::max(1.0, r.report.total)) {
        ++violations;
      }
      if (a == Algorithm::bg) bg_sum += r.report.total;
      if (a == Algorithm::rg) rg_sum += r.report.total;
    }
  }
  const double secs = seconds_since(start);
  const double bg_mean = bg_sum / kOracleInstances, rg_mean = rg_sum / kOracleInstances;
  Verdict v;
  v.pass = violations == 0 && feasibility == 0 && bg_mean <= kBgRgSlack * rg_mean &&
           secs < kBudget3Sec;
  v.detail = std::to_string(kOracleInstances) + " instances, " + std::to_string(violations) +
             " dominance violations, " + std::to_string(feasibility) +
             " feasibility violations, mean bg " + fmt(bg_mean) + " vs rg " + fmt(rg_mean) + ", " +
             fmt(secs) + " s";
  return v;
}

// --- 4 and 9 share one sweep ----------------------------------------------

SweepSpec nyc_micro_spec() {
  SweepSpec s;  // 200 users, 30 boards, 48 slots per board, 50 tags.
  s.alpha = {0.4, 0.8, 1.2};
  s.beta = {0.05};
  s.seeds = kSweepSeeds;
  s.master_seed = 1;
  return s;
}

const SummaryRow* find_row(const Summary& sum, std::size_t cell, Algorithm a) {
  for (const auto& r : sum.rows) {
    if (r.cell == cell && r.algorithm == a) return &r;
  }
  return nullptr;
}

struct TrendRun {
  SweepOutput out;
  Summary summary;
  double seconds = 0.0;
};

TrendRun trend_sweep() {
  TrendRun t;
  const auto start = Clock::now();
  t.out = run_sweep(nyc_micro_spec());
  t.summary = summarize(t.out.rows);
  t.seconds = seconds_since(start);
  return t;
}

Verdict trend(const TrendRun& t) {
  Verdict v;
  v.pass = t.out.flagged == 0 && t.seconds < kBudget4Sec;
  std::string detail;
  for (auto a : {Algorithm::bg, Algorithm::rg, Algorithm::rls}) {
    detail += std::string(to_string(a)) + " excessive share";
    double prev_exc = 2.0, prev_uns = -1.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto* r = find_row(t.summary, c, a);
      const double exc = r->excessive_share;
      const double uns = r->total.mean > 0.0 ? r->unsatisfied.mean / r->total.mean : 0.0;
      if (!(exc < prev_exc) || !(uns > prev_uns)) v.pass = false;
      prev_exc = exc;
      prev_uns = uns;
      detail += " " + fmt(exc);
    }
    detail += "; ";
  }
  detail += "random highest in cells:";
  for (const auto& f : t.summary.cells) {
    const bool ok = f.random_highest.value_or(false);
    if (!ok) v.pass = false;
    detail += ok ? " yes" : " no";
  }
  v.detail = detail + "; " + fmt(t.seconds) + " s";
  return v;
}

Verdict runtime_order(const TrendRun& t) {
  Verdict v;
  std::string detail;
  for (const auto& f : t.summary.cells) {
    const bool ok = f.runtime_order.value_or(false);
    if (!ok) v.pass = false;
    detail += "cell " + std::to_string(f.cell) + " ms:";
    for (auto a : {Algorithm::random, Algorithm::rg, Algorithm::rls, Algorithm::bg}) {
      detail += " " + std::string(to_string(a)) + "=" + fmt(find_row(t.summary, f.cell, a)->wall_ms.mean);
    }
    detail += ok ? " ok; " : " out of order; ";
  }
  v.detail = detail;
  return v;
}

// --- 5 -----------------------------------------------------------------------

Verdict delta_sweep() {
  auto s = nyc_micro_spec();
  s.alpha = {1.0};
  s.delta = {0.0, 0.5, 1.0};
  const auto out = run_sweep(s);
  const auto sum = summarize(out.rows);
  Verdict v;
  v.pass = out.flagged == 0;
  for (auto a : s.algorithms) {
    v.detail += std::string(to_string(a));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < 3; ++c) {
      const double m = find_row(sum, c, a)->total.mean;
      if (!(m < prev)) v.pass = false;
      prev = m;
      v.detail += " " + fmt(m);
    }
    v.detail += "; ";
  }
  return v;
}

// --- 6 -----------------------------------------------------------------------

Verdict stochastic_greedy() {
  Verdict v;
  const auto n = rg_sample_size(1000, 0.01);
  v.pass = n == 47;
  std::size_t identical = 0, runs = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorParams g;
    g.seed = seed;
    const auto in = generate_instance(g);
    const InfluenceEngine engine(in, g.gamma);
    SolverConfig bg;
    bg.seed = seed;
    auto rg = bg;
    rg.algorithm = Algorithm::rg;
    rg.rg_sample_override = in.slots.size();
    const auto a = solve(in, engine, bg);
    const auto b = solve(in, engine, rg);
    ++runs;
    if (serialize_allocation(a.allocation, a.report, in) ==
        serialize_allocation(b.allocation, b.report, in)) {
      ++identical;
    }
  }
  v.pass = v.pass && identical == runs;
  v.detail = "rg_sample_size(1000, 0.01) = " + std::to_string(n) + "; full-sample rg identical to bg in " +
             std::to_string(identical) + "/" + std::to_string(runs) + " instances";
  return v;
}

// --- 7 -----------------------------------------------------------------------

Verdict determinism() {
  Verdict v;
  std::size_t same = 0, runs = 0;
  GeneratorParams g;
  g.seed = 77;
  const auto in = generate_instance(g);
  for (auto a : {Algorithm::bg, Algorithm::rg, Algorithm::rls, Algorithm::random}) {
    SolverConfig cfg;
    cfg.algorithm = a;
    cfg.seed = 123;
    const auto x = solve(in, cfg);
    const auto y = solve(in, cfg);
    ++runs;
    if (serialize_allocation(x.allocation, x.report, in) ==
        serialize_allocation(y.allocation, y.report, in)) {
      ++same;
    }
  }
  const fixtures::TempDir d1("accept_a"), d2("accept_b");
  auto s = nyc_micro_spec();
  s.seeds = 2;
  s.write_traces = false;
  run_sweep(s, d1.path());
  s.jobs = 4;
  run_sweep(s, d2.path());
  const bool csv_same = slurp(d1.path() / "results.csv") == slurp(d2.path() / "results.csv") &&
                        !slurp(d1.path() / "results.csv").empty();
  v.pass = same == runs && csv_same;
  v.detail = "allocations identical " + std::to_string(same) + "/" + std::to_string(runs) +
             "; results.csv identical across runs (1 vs 4 workers): " + (csv_same ? "yes" : "no");
  return v;
}

// --- 8 -----------------------------------------------------------------------

Verdict rls_improvement_only() {
  Verdict v;
  std::size_t ok = 0, improved = 0;
  GeneratorParams g;
  g.seed = 5;
  const auto in = generate_instance(g);
  const InfluenceEngine engine(in, g.gamma);
  for (std::uint64_t seed = 1; seed <= kRlsSeeds; ++seed) {
    SolverConfig cfg;
    cfg.algorithm = Algorithm::rls;
    cfg.seed = seed;
    const auto r = solve(in, engine, cfg);
    if (r.trace.warm_start_regret && r.report.total <= *r.trace.warm_start_regret) ++ok;
    if (r.trace.warm_start_regret && r.report.total < *r.trace.warm_start_regret) ++improved;
  }
  v.pass = ok == kRlsSeeds;
  v.detail = std::to_string(ok) + "/" + std::to_string(kRlsSeeds) +
             " seeds no worse than warm start (" + std::to_string(improved) + " strictly better)";
  return v;
}

}  // namespace

int main() {
  auto guarded = [](int id, const char* name, const std::function<Verdict()>& fn) {
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("exception: ") + e.what()});
    }
  };
  guarded(1, "influence properties", influence_properties);
  guarded(2, "regret golden values", regret_golden);
  guarded(3, "oracle dominance", oracle_dominance);

  // The trend sweep also supplies the timings judged last.
  Verdict order{false, "sweep did not complete"};
  try {
    const TrendRun t = trend_sweep();
    report(4, "trend reproduction", trend(t));
    order = runtime_order(t);
  } catch (const std::exception& e) {
    report(4, "trend reproduction", {false, std::string("exception: ") + e.what()});
  }

  guarded(5, "delta sweep", delta_sweep);
  guarded(6, "stochastic greedy", stochastic_greedy);
  guarded(7, "determinism", determinism);
  guarded(8, "rls improvement only", rls_improvement_only);
  report(9, "runtime ordering", order);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
