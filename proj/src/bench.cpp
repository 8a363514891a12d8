#include "trmoa/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "trmoa/error.hpp"

namespace trmoa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

struct Range {
  const char* name;
  double lo;
  double hi;
};

void check_range(const std::vector<double>& values, Range r, bool allow) {
  if (values.empty()) throw InvalidInput(std::string(r.name) + " grid is empty");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(r.name) + " must be finite");
    if (!allow && (v < r.lo || v > r.hi)) {
      throw InvalidInput(std::string(r.name) + " value " + format_double(v) + " outside [" +
                         format_double(r.lo) + ", " + format_double(r.hi) +
                         "]; set allow_out_of_range=true to override");
    }
  }
}

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

struct Task {
  std::size_t cell;
  std::size_t rep;
};

}  // namespace

void check_spec(const SweepSpec& spec) {
  const bool allow = spec.allow_out_of_range;
  check_range(spec.alpha, {"alpha", 0.4, 1.2}, allow);
  check_range(spec.beta, {"beta", 0.01, 0.2}, allow);
  check_range(spec.delta, {"delta", 0.0, 1.0}, allow);
  check_range(spec.gamma, {"gamma", 25.0, 150.0}, allow);
  check_range(spec.epsilon, {"epsilon", 0.01, 0.2}, allow);
  check_range(spec.omega, {"omega", 0.01, 0.2}, allow);
  if (spec.algorithms.empty()) throw InvalidInput("no algorithms selected");
  if (spec.seeds < 1) throw InvalidInput("at least one seed per cell is required");
  if (spec.jobs < 1) throw InvalidInput("jobs must be at least 1");
  if (spec.instance_dir && (spec.alpha.size() > 1 || spec.beta.size() > 1)) {
    throw InvalidInput("alpha and beta cannot vary over a loaded instance");
  }
}

std::vector<SweepCell> expand_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (double a : spec.alpha)
    for (double b : spec.beta)
      for (double d : spec.delta)
        for (double g : spec.gamma)
          for (double e : spec.epsilon)
            for (double o : spec.omega) cells.push_back({a, b, d, g, e, o});
  return cells;
}

SweepSpec parse_grid(std::istream& in, const std::string& name, SweepSpec spec) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    auto fail = [&](const std::string& what) -> void { throw ParseError(name, number, what); };
    if (eq == std::string_view::npos) fail("expected key=value");
    const std::string key(trim(t.substr(0, eq)));
    const auto value = trim(t.substr(eq + 1));

    auto reals = [&] {
      std::vector<double> out;
      for (auto item : split_list(value)) {
        double v{};
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || p != item.data() + item.size()) {
          fail("invalid number '" + std::string(item) + "' for " + key);
        }
        out.push_back(v);
      }
      return out;
    };
    auto boolean = [&] {
      if (value != "true" && value != "false") fail("expected true or false for " + key);
      return value == "true";
    };
    auto count = [&]() -> std::uint64_t {
      std::uint64_t v{};
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (value.empty() || ec != std::errc{} || p != value.data() + value.size()) {
        fail("invalid non-negative integer for " + key);
      }
      return v;
    };

    if (key == "alpha") {
      spec.alpha = reals();
    } else if (key == "beta") {
      spec.beta = reals();
    } else if (key == "delta") {
      spec.delta = reals();
    } else if (key == "gamma") {
      spec.gamma = reals();
    } else if (key == "epsilon") {
      spec.epsilon = reals();
    } else if (key == "omega") {
      spec.omega = reals();
    } else if (key == "algos" || key == "algorithms") {
      spec.algorithms.clear();
      for (auto item : split_list(value)) {
        const auto a = algorithm_from_string(item);
        if (!a) fail("unknown algorithm '" + std::string(item) + "'");
        spec.algorithms.push_back(*a);
      }
    } else if (key == "seeds") {
      spec.seeds = count();
    } else if (key == "master_seed") {
      spec.master_seed = count();
    } else if (key == "rls_iters") {
      spec.rls_iters = static_cast<std::uint32_t>(count());
    } else if (key == "users") {
      spec.world.users = count();
    } else if (key == "boards") {
      spec.world.boards = count();
    } else if (key == "tags") {
      spec.world.tags = count();
    } else if (key == "slot_duration") {
      const auto per_board = (spec.world.t2 - spec.world.t1) / spec.world.slot_duration;
      spec.world.slot_duration = static_cast<Timestamp>(count());
      spec.world.t2 = spec.world.t1 + per_board * spec.world.slot_duration;
    } else if (key == "slots_per_board") {
      spec.world.t2 = spec.world.t1 + static_cast<Timestamp>(count()) * spec.world.slot_duration;
    } else if (key == "allow_out_of_range") {
      spec.allow_out_of_range = boolean();
    } else if (key == "early_stop") {
      spec.early_stop = boolean();
    } else if (key == "score_context") {
      if (value != "tag" && value != "full") fail("expected tag or full");
      spec.score_context = value == "tag" ? ScoreContext::tag : ScoreContext::full;
    } else if (key == "score_denominator") {
      if (value != "cost" && value != "influence") fail("expected cost or influence");
      spec.score_denominator =
          value == "cost" ? ScoreDenominator::cost : ScoreDenominator::influence;
    } else if (key == "instance") {
      spec.instance_dir = std::filesystem::path(std::string(value));
    } else if (key == "jobs") {
      spec.jobs = count();
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  return spec;
}

SweepSpec load_grid(const std::filesystem::path& path, SweepSpec base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_grid(in, path.string(), std::move(base));
}

SweepOutput run_sweep(const SweepSpec& spec, const std::optional<std::filesystem::path>& out_dir) {
  check_spec(spec);
  const auto cells = expand_cells(spec);
  const std::size_t n_algos = spec.algorithms.size();

  std::optional<Instance> loaded;
  if (spec.instance_dir) loaded = load_instance(*spec.instance_dir);

  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir / "trace", ec);
    if (ec) throw IoError("cannot create " + out_dir->string() + ": " + ec.message());
  }

  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t r = 0; r < spec.seeds; ++r) tasks.push_back({c, r});

  std::vector<SweepResultRow> rows(tasks.size() * n_algos);

  auto run_task = [&](std::size_t t) {
    const auto [c, rep] = tasks[t];
    const SweepCell& cell = cells[c];
    const std::uint64_t seed = derive_seed(spec.master_seed, {c, rep});
    for (std::size_t k = 0; k < n_algos; ++k) {
      auto& row = rows[t * n_algos + k];
      row.cell = c;
      row.params = cell;
      row.algorithm = spec.algorithms[k];
      row.repetition = rep;
      row.seed = seed;
    }

    Instance generated;
    const Instance* instance = nullptr;
    std::optional<InfluenceEngine> engine;
    try {
      if (loaded) {
        instance = &*loaded;
      } else {
        GeneratorParams g = spec.world;
        g.alpha = cell.alpha;
        g.beta = cell.beta;
        g.gamma = cell.gamma;
        g.seed = derive_seed(spec.master_seed, {rep});
        generated = generate_instance(g);
        instance = &generated;
      }
      engine.emplace(*instance, cell.gamma);
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < n_algos; ++k) {
        rows[t * n_algos + k].error = std::string("instance: ") + e.what();
      }
      return;
    }

    for (std::size_t k = 0; k < n_algos; ++k) {
      auto& row = rows[t * n_algos + k];
      row.advertisers = instance->advertisers.size();
      row.slots = instance->slots.size();
      SolverConfig cfg;
      cfg.algorithm = row.algorithm;
      cfg.seed = seed;
      cfg.epsilon = cell.epsilon;
      cfg.regret.delta = cell.delta;
      cfg.tags.omega = cell.omega;
      cfg.gamma = cell.gamma;
      cfg.rls_iters = spec.rls_iters;
      cfg.score_context = spec.score_context;
      cfg.score_denominator = spec.score_denominator;
      cfg.early_stop = spec.early_stop;
      try {
        const SolveResult res = solve(*instance, *engine, cfg);
        row.allocated = res.allocation.allocated_count();
        row.excessive = res.report.excessive;
        row.unsatisfied = res.report.unsatisfied;
        row.total = res.report.total;
        row.satisfied = res.report.satisfied_count;
        row.wall_ms = res.trace.wall_ms;
        if (out_dir && spec.write_traces) {
          auto out = open_out(*out_dir / "trace" /
                              ("cell" + std::to_string(c) + "_rep" + std::to_string(rep) + "_" +
                               to_string(row.algorithm) + ".csv"));
          write_trace_csv(out, res.trace, *instance);
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  if (spec.jobs <= 1 || tasks.size() <= 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t j = 0; j < std::min(spec.jobs, tasks.size()); ++j) {
      workers.emplace_back([&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) run_task(t);
      });
    }
  }

  SweepOutput out;
  out.rows = std::move(rows);
  out.flagged = static_cast<std::size_t>(
      std::count_if(out.rows.begin(), out.rows.end(), [](const auto& r) { return r.flagged(); }));

  if (out_dir) {
    { auto f = open_out(*out_dir / "results.csv"); write_results_csv(f, out.rows); }
    { auto f = open_out(*out_dir / "timings.csv"); write_timings_csv(f, out.rows); }
    auto f = open_out(*out_dir / "summary.csv");
    write_summary_csv(f, summarize(out.rows));
  }
  return out;
}

Stats describe(std::vector<double> values) {
  Stats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

Summary summarize(const std::vector<SweepResultRow>& rows) {
  struct Bucket {
    SweepCell params;
    std::vector<double> total, excessive, unsatisfied, wall, satisfied;
  };
  std::map<std::pair<std::size_t, int>, Bucket> buckets;
  for (const auto& r : rows) {
    auto& b = buckets[{r.cell, static_cast<int>(r.algorithm)}];
    b.params = r.params;
    if (r.flagged()) continue;
    b.total.push_back(r.total);
    b.excessive.push_back(r.excessive);
    b.unsatisfied.push_back(r.unsatisfied);
    b.wall.push_back(r.wall_ms);
    b.satisfied.push_back(static_cast<double>(r.satisfied));
  }

  Summary out;
  std::map<std::size_t, std::map<Algorithm, const SummaryRow*>> by_cell;
  for (const auto& [key, b] : buckets) {
    SummaryRow s;
    s.cell = key.first;
    s.params = b.params;
    s.algorithm = static_cast<Algorithm>(key.second);
    s.runs = b.total.size();
    s.total = describe(b.total);
    s.excessive = describe(b.excessive);
    s.unsatisfied = describe(b.unsatisfied);
    s.wall_ms = describe(b.wall);
    s.excessive_share = s.total.mean > 0.0 ? s.excessive.mean / s.total.mean : 0.0;
    s.satisfied_mean = describe(b.satisfied).mean;
    out.rows.push_back(s);
  }
  for (const auto& s : out.rows) {
    if (s.runs > 0) by_cell[s.cell][s.algorithm] = &s;
  }

  for (const auto& [cell, algos] : by_cell) {
    CellFlags f;
    f.cell = cell;
    auto get = [&](Algorithm a) -> const SummaryRow* {
      const auto it = algos.find(a);
      return it == algos.end() ? nullptr : it->second;
    };
    const auto* bg = get(Algorithm::bg);
    const auto* rg = get(Algorithm::rg);
    const auto* rls = get(Algorithm::rls);
    const auto* rnd = get(Algorithm::random);
    if (bg && rnd) f.bg_le_random = bg->total.mean <= rnd->total.mean;
    if (rnd && algos.size() > 1) {
      bool highest = true;
      for (const auto& [a, s] : algos) {
        if (a != Algorithm::random && !(rnd->total.mean > s->total.mean)) highest = false;
      }
      f.random_highest = highest;
    }
    if (bg && rg && rls && rnd) {
      f.runtime_order = rnd->wall_ms.mean < rg->wall_ms.mean &&
                        rg->wall_ms.mean <= rls->wall_ms.mean &&
                        rls->wall_ms.mean < bg->wall_ms.mean;
    }
    out.cells.push_back(f);
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<SweepResultRow>& rows) {
  out << "cell,alpha,beta,delta,gamma,epsilon,omega,algorithm,rep,seed,advertisers,slots,"
         "allocated,excessive,unsatisfied,total,satisfied,status\n";
  for (const auto& r : rows) {
    const auto& p = r.params;
    out << r.cell << ',' << format_double(p.alpha) << ',' << format_double(p.beta) << ','
        << format_double(p.delta) << ',' << format_double(p.gamma) << ','
        << format_double(p.epsilon) << ',' << format_double(p.omega) << ','
        << to_string(r.algorithm) << ',' << r.repetition << ',' << r.seed << ','
        << r.advertisers << ',' << r.slots << ',' << r.allocated << ','
        << format_double(r.excessive) << ',' << format_double(r.unsatisfied) << ','
        << format_double(r.total) << ',' << r.satisfied << ','
        << (r.flagged() ? "error: " + sanitize(r.error) : std::string("ok")) << '\n';
  }
}

void write_timings_csv(std::ostream& out, const std::vector<SweepResultRow>& rows) {
  out << "cell,algorithm,rep,wall_ms\n";
  for (const auto& r : rows) {
    out << r.cell << ',' << to_string(r.algorithm) << ',' << r.repetition << ','
        << format_double(r.wall_ms) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const Summary& summary) {
  std::map<std::size_t, const CellFlags*> flags;
  for (const auto& f : summary.cells) flags[f.cell] = &f;
  auto flag = [](const std::optional<bool>& b) { return b ? (*b ? "true" : "false") : ""; };
  auto stats = [&](const Stats& s) {
    out << ',' << format_double(s.mean) << ',' << format_double(s.median) << ','
        << format_double(s.stddev);
  };

  out << "cell,alpha,beta,delta,gamma,epsilon,omega,algorithm,runs,"
         "total_mean,total_median,total_stddev,"
         "excessive_mean,excessive_median,excessive_stddev,"
         "unsatisfied_mean,unsatisfied_median,unsatisfied_stddev,"
         "wall_ms_mean,wall_ms_median,wall_ms_stddev,"
         "excessive_share,satisfied_mean,bg_le_random,random_highest,runtime_order\n";
  for (const auto& s : summary.rows) {
    const auto& p = s.params;
    out << s.cell << ',' << format_double(p.alpha) << ',' << format_double(p.beta) << ','
        << format_double(p.delta) << ',' << format_double(p.gamma) << ','
        << format_double(p.epsilon) << ',' << format_double(p.omega) << ','
        << to_string(s.algorithm) << ',' << s.runs;
    stats(s.total);
    stats(s.excessive);
    stats(s.unsatisfied);
    stats(s.wall_ms);
    out << ',' << format_double(s.excessive_share) << ',' << format_double(s.satisfied_mean);
    const auto it = flags.find(s.cell);
    if (it != flags.end()) {
      out << ',' << flag(it->second->bg_le_random) << ',' << flag(it->second->random_highest)
          << ',' << flag(it->second->runtime_order) << '\n';
    } else {
      out << ",,,\n";
    }
  }
}

}  // namespace trmoa
