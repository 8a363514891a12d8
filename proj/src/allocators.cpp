#include "trmoa/allocators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "trmoa/error.hpp"
#include "trmoa/rng.hpp"

namespace trmoa {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Remaining slots with O(1) removal and in-place partial shuffles.
class SlotPool {
 public:
  explicit SlotPool(std::size_t n) : items_(n), pos_(n) {
    for (std::size_t k = 0; k < n; ++k) {
      items_[k] = SlotId{static_cast<std::int64_t>(k)};
      pos_[k] = k;
    }
  }

  bool empty() const noexcept { return items_.empty(); }
  std::size_t size() const noexcept { return items_.size(); }
  std::span<const SlotId> items() const noexcept { return items_; }
  SlotId at(std::size_t i) const { return items_[i]; }

  void remove(SlotId s) {
    const auto k = static_cast<std::size_t>(s.value);
    const auto i = pos_[k];
    const SlotId last = items_.back();
    items_[i] = last;
    pos_[static_cast<std::size_t>(last.value)] = i;
    items_.pop_back();
    pos_[k] = kAbsent;
  }

  // Uniform sample of m distinct slots without replacement (partial
  // Fisher-Yates over the pool's own storage).
  std::span<const SlotId> sample(Rng& rng, std::size_t m) {
    const std::size_t n = items_.size();
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      if (i != j) {
        std::swap(items_[i], items_[j]);
        pos_[static_cast<std::size_t>(items_[i].value)] = i;
        pos_[static_cast<std::size_t>(items_[j].value)] = j;
      }
    }
    return std::span<const SlotId>(items_).first(m);
  }

  std::vector<SlotId> sorted() const {
    std::vector<SlotId> out(items_.begin(), items_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<SlotId> items_;
  std::vector<std::size_t> pos_;
};

struct Prepared {
  const Instance* instance = nullptr;
  const InfluenceEngine* engine = nullptr;
  SolverConfig cfg;
  std::vector<std::vector<TagId>> refined;
  std::vector<TagContext> full_ctx;
  std::map<TagId, TagContext> single_ctx;
  std::vector<std::size_t> order;
  std::vector<double> denom;
};

Prepared prepare(const Instance& instance, const InfluenceEngine& engine,
                 const SolverConfig& cfg) {
  check_config(cfg);
  if (engine.slot_count() != instance.slots.size()) {
    throw InvalidInput("influence engine was built for a different slot catalog");
  }
  Prepared p;
  p.instance = &instance;
  p.engine = &engine;
  p.cfg = cfg;
  p.refined = refine_all_tags(instance, engine, cfg.tags);
  p.full_ctx.reserve(p.refined.size());
  for (const auto& tags : p.refined) {
    p.full_ctx.push_back(engine.context(tags));
    if (cfg.score_context == ScoreContext::tag) {
      for (auto t : tags) {
        if (!p.single_ctx.contains(t)) {
          const TagId one[] = {t};
          p.single_ctx.emplace(t, engine.context(one));
        }
      }
    }
  }
  p.order = sort_advertisers(instance.advertisers);
  p.denom.resize(instance.slots.size());
  for (std::size_t k = 0; k < p.denom.size(); ++k) {
    p.denom[k] = cfg.score_denominator == ScoreDenominator::cost
                     ? instance.slots[k].cost
                     : engine.slot_influence(SlotId{static_cast<std::int64_t>(k)});
  }
  return p;
}

struct AdvState {
  InfluenceAccumulator full;
  std::vector<InfluenceAccumulator> per_tag;
  std::size_t pointer = 0;
};

struct Working {
  Allocation alloc;
  std::vector<AdvState> states;
  std::vector<TraceEvent> events;
  // While set, selections are recorded only in `events`; materialize()
  // replays them into `alloc`.
  bool deferred = false;
};

void materialize(Working& w) {
  if (!w.deferred) return;
  for (const auto& ev : w.events) {
    if (ev.kind == TraceEvent::Kind::select) w.alloc.assign(ev.advertiser, ev.tag, ev.slot);
  }
  w.deferred = false;
}

// Per-tag accumulators are only needed for greedy scoring; random fills
// leave them empty and ensure_per_tag rebuilds them on demand.
Working fresh_working(const Prepared& p, bool with_per_tag = true) {
  const auto& index = p.engine->index();
  Working w;
  w.alloc = Allocation(p.instance->advertisers.size(), p.instance->slots.size());
  // At most one select per slot plus one skip per advertiser.
  w.events.reserve(p.instance->slots.size() + p.refined.size());
  w.states.reserve(p.refined.size());
  for (std::size_t i = 0; i < p.refined.size(); ++i) {
    AdvState st{InfluenceAccumulator(index, p.full_ctx[i]), {}, 0};
    if (with_per_tag && p.cfg.score_context == ScoreContext::tag) {
      for (auto t : p.refined[i]) st.per_tag.emplace_back(index, p.single_ctx.at(t));
    }
    w.states.push_back(std::move(st));
  }
  return w;
}

// Replays each advertiser's slots, in insertion order, into fresh per-tag
// accumulators; the products match incremental maintenance exactly.
void ensure_per_tag(const Prepared& p, Working& w) {
  if (p.cfg.score_context != ScoreContext::tag) return;
  const auto& index = p.engine->index();
  for (std::size_t i = 0; i < w.states.size(); ++i) {
    auto& st = w.states[i];
    if (!st.per_tag.empty() || p.refined[i].empty()) continue;
    for (auto t : p.refined[i]) {
      st.per_tag.emplace_back(index, p.single_ctx.at(t));
      for (auto s : w.alloc.of(i).slots) st.per_tag.back().add(s);
    }
  }
}

double regret_at(const Prepared& p, std::size_t adv, double achieved) {
  const auto& a = p.instance->advertisers[adv];
  return advertiser_regret(achieved, a.demand, a.payment, p.cfg.regret).value;
}

void commit(const Prepared& p, Working& w, SlotPool& pool, std::size_t adv, SlotId slot,
            double score) {
  auto& st = w.states[adv];
  const auto& tags = p.refined[adv];
  const std::size_t k = st.pointer;
  TraceEvent ev;
  ev.kind = TraceEvent::Kind::select;
  ev.advertiser = adv;
  ev.tag_pointer = k;
  ev.tag = tags[k];
  ev.slot = slot;
  ev.score = score;
  ev.remaining_demand = p.instance->advertisers[adv].demand - st.full.total();
  w.events.push_back(ev);

  if (!w.deferred) w.alloc.assign(adv, tags[k], slot);
  st.full.add(slot);
  for (auto& acc : st.per_tag) acc.add(slot);
  pool.remove(slot);
  st.pointer = (k + 1) % tags.size();
}

void log_skip(Working& w, std::size_t adv) {
  TraceEvent ev;
  ev.kind = TraceEvent::Kind::skip;
  ev.advertiser = adv;
  w.events.push_back(ev);
}

// Round-robin greedy loop shared by bg, rg and the rls extension. With a null
// rng every remaining slot is a candidate; otherwise each selection scores a
// fresh uniform sample of rg_sample_size(|pool|, epsilon) slots.
void greedy_fill(const Prepared& p, Working& w, SlotPool& pool, Rng* rng, bool log_skips) {
  for (auto adv : p.order) {
    const auto& tags = p.refined[adv];
    if (tags.empty()) {
      if (log_skips) log_skip(w, adv);
      continue;
    }
    const double demand = p.instance->advertisers[adv].demand;
    auto& st = w.states[adv];
    while (st.full.total() < demand && !pool.empty()) {
      const InfluenceAccumulator& acc =
          p.cfg.score_context == ScoreContext::tag ? st.per_tag[st.pointer] : st.full;
      const double current = acc.total();
      const double before = regret_at(p, adv, current);

      std::span<const SlotId> candidates = pool.items();
      if (rng != nullptr) {
        const std::size_t m = p.cfg.rg_sample_override != 0
                                  ? std::min(p.cfg.rg_sample_override, pool.size())
                                  : rg_sample_size(pool.size(), p.cfg.epsilon);
        if (m < pool.size()) candidates = pool.sample(*rng, m);
      }

      SlotId best{-1};
      double best_score = -std::numeric_limits<double>::infinity();
      for (auto s : candidates) {
        const double reduction = before - regret_at(p, adv, current + acc.gain(s));
        const double d = p.denom[static_cast<std::size_t>(s.value)];
        const double score = d > 0.0 ? reduction / d : reduction;
        if (score > best_score || (score == best_score && s < best)) {
          best_score = score;
          best = s;
        }
      }

      if (p.cfg.early_stop) {
        const double now = regret_at(p, adv, st.full.total());
        const double after = regret_at(p, adv, st.full.total() + st.full.gain(best));
        if (after > now) break;
      }
      commit(p, w, pool, adv, best, best_score);
    }
  }
}

// Uniformly random picks until demand is met or the pool runs dry.
void random_fill(const Prepared& p, Working& w, SlotPool& pool, Rng& rng,
                 std::span<const std::size_t> order, bool log_skips) {
  for (auto adv : order) {
    if (p.refined[adv].empty()) {
      if (log_skips) log_skip(w, adv);
      continue;
    }
    const double demand = p.instance->advertisers[adv].demand;
    auto& st = w.states[adv];
    while (st.full.total() < demand && !pool.empty()) {
      const SlotId s = pool.at(static_cast<std::size_t>(rng.below(pool.size())));
      commit(p, w, pool, adv, s, 0.0);
    }
  }
}

// Same arithmetic as total_regret, reusing the prepared contexts.
double recomputed_total(const Prepared& p, const Allocation& alloc) {
  std::vector<AdvertiserRegret> parts;
  parts.reserve(p.refined.size());
  for (std::size_t i = 0; i < p.refined.size(); ++i) {
    const auto& a = p.instance->advertisers[i];
    const double achieved = p.engine->influence(alloc.of(i).slots, p.full_ctx[i]);
    parts.push_back(advertiser_regret(achieved, a.demand, a.payment, p.cfg.regret));
  }
  return make_report(std::move(parts)).total;
}

double recomputed_total(const Prepared& p, const Working& w) {
  if (!w.deferred) return recomputed_total(p, w.alloc);
  std::vector<std::vector<SlotId>> slots(p.refined.size());
  for (const auto& ev : w.events) {
    if (ev.kind == TraceEvent::Kind::select) slots[ev.advertiser].push_back(ev.slot);
  }
  std::vector<AdvertiserRegret> parts;
  parts.reserve(p.refined.size());
  for (std::size_t i = 0; i < p.refined.size(); ++i) {
    const auto& a = p.instance->advertisers[i];
    const double achieved = p.engine->influence(slots[i], p.full_ctx[i]);
    parts.push_back(advertiser_regret(achieved, a.demand, a.payment, p.cfg.regret));
  }
  return make_report(std::move(parts)).total;
}

SolveResult finish(const Prepared& p, Working&& w, std::vector<SlotId> leftover, RunTrace trace,
                   Clock::time_point started) {
  SolveResult r;
  r.report = total_regret(w.alloc, *p.instance, p.refined, p.cfg.regret, *p.engine);
  r.allocation = std::move(w.alloc);
  r.leftover = std::move(leftover);
  r.refined_tags = p.refined;
  trace.events = std::move(w.events);
  trace.wall_ms = elapsed_ms(started);
  r.trace = std::move(trace);
  return r;
}

SolveResult run_greedy(const Instance& instance, const InfluenceEngine& engine,
                       const SolverConfig& config, bool sampled) {
  const auto started = Clock::now();
  const Prepared p = prepare(instance, engine, config);
  Rng rng(config.seed);
  Working w = fresh_working(p);
  SlotPool pool(instance.slots.size());
  greedy_fill(p, w, pool, sampled ? &rng : nullptr, true);
  RunTrace trace;
  trace.rng_draws = rng.draws();
  return finish(p, std::move(w), pool.sorted(), std::move(trace), started);
}

}  // namespace

const char* to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::bg:
      return "bg";
    case Algorithm::rg:
      return "rg";
    case Algorithm::rls:
      return "rls";
    case Algorithm::random:
      return "random";
    case Algorithm::oracle:
      return "oracle";
  }
  return "bg";
}

std::optional<Algorithm> algorithm_from_string(std::string_view text) noexcept {
  for (auto a : {Algorithm::bg, Algorithm::rg, Algorithm::rls, Algorithm::random,
                 Algorithm::oracle}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

void check_config(const SolverConfig& config) {
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    throw InvalidInput("epsilon must lie in (0, 1)");
  }
  if (config.rls_iters < 1) throw InvalidInput("rls iterations must be at least 1");
  if (!(config.regret.delta >= 0.0 && config.regret.delta <= 1.0)) {
    throw InvalidInput("delta must lie in [0, 1]");
  }
  if (!(config.tags.omega > 0.0 && config.tags.omega < 1.0)) {
    throw InvalidInput("omega must lie in (0, 1)");
  }
  if (!(config.gamma > 0.0)) throw InvalidInput("gamma must be positive");
}

Allocation replay(const RunTrace& trace, std::size_t advertiser_count, std::size_t slot_count) {
  Allocation alloc(advertiser_count, slot_count);
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceEvent::Kind::select) alloc.assign(ev.advertiser, ev.tag, ev.slot);
  }
  return alloc;
}

std::vector<std::size_t> sort_advertisers(std::span<const Advertiser> advertisers) {
  for (const auto& a : advertisers) {
    if (!(a.demand > 0.0)) throw InvalidInput("advertiser demand must be positive");
  }
  std::vector<std::size_t> order(advertisers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = advertisers[x];
    const auto& b = advertisers[y];
    // u_a / s_a > u_b / s_b without dividing.
    const double lhs = a.payment * b.demand;
    const double rhs = b.payment * a.demand;
    if (lhs != rhs) return lhs > rhs;
    return a.id < b.id;
  });
  return order;
}

std::size_t rg_sample_size(std::size_t remaining, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidInput("epsilon must lie in (0, 1]");
  if (remaining == 0) return 0;
  const double k = std::max(1.0, std::ceil(0.10 * static_cast<double>(remaining)));
  const double raw = std::ceil(static_cast<double>(remaining) / k * std::log(1.0 / epsilon));
  const auto size = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(remaining, size);
}

std::vector<std::vector<TagId>> refine_all_tags(const Instance& instance,
                                                const InfluenceEngine& engine,
                                                const TagSelectionParams& params) {
  std::map<std::vector<TagId>, std::vector<TagId>> memo;
  std::vector<std::vector<TagId>> out;
  out.reserve(instance.advertisers.size());
  for (const auto& a : instance.advertisers) {
    std::vector<TagId> key = a.tags;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    auto it = memo.find(key);
    if (it == memo.end()) {
      it = memo.emplace(key, select_tags(key, engine, params).tags).first;
    }
    out.push_back(it->second);
  }
  return out;
}

SolveResult bg_solve(const Instance& instance, const InfluenceEngine& engine,
                     const SolverConfig& config) {
  return run_greedy(instance, engine, config, false);
}

SolveResult rg_solve(const Instance& instance, const InfluenceEngine& engine,
                     const SolverConfig& config) {
  return run_greedy(instance, engine, config, true);
}

SolveResult rls_solve(const Instance& instance, const InfluenceEngine& engine,
                      const SolverConfig& config) {
  const auto started = Clock::now();
  const Prepared p = prepare(instance, engine, config);
  Rng rng(config.seed);

  // Warm start: exactly the rg solve for the same seed.
  Working best = fresh_working(p);
  SlotPool best_pool(instance.slots.size());
  greedy_fill(p, best, best_pool, &rng, true);
  double best_total = recomputed_total(p, best.alloc);

  RunTrace trace;
  trace.warm_start_regret = best_total;

  for (std::uint32_t iter = 0; iter < config.rls_iters; ++iter) {
    Working w = fresh_working(p, false);
    w.deferred = true;
    SlotPool pool(instance.slots.size());
    random_fill(p, w, pool, rng, p.order, true);
    const double total = recomputed_total(p, w);
    if (total < best_total) {
      materialize(w);
      best = std::move(w);
      best_pool = std::move(pool);
      best_total = total;
      ++trace.improvements;
    }
  }

  if (!best_pool.empty()) {
    // Tags and advertiser order are reused; only the rg loop runs again.
    ensure_per_tag(p, best);
    Working extended = best;
    SlotPool pool = best_pool;
    greedy_fill(p, extended, pool, &rng, false);
    if (extended.events.size() != best.events.size()) {
      const double total = recomputed_total(p, extended.alloc);
      if (total < best_total) {
        best = std::move(extended);
        best_pool = std::move(pool);
        best_total = total;
      }
    }
  }

  trace.rng_draws = rng.draws();
  return finish(p, std::move(best), best_pool.sorted(), std::move(trace), started);
}

SolveResult random_solve(const Instance& instance, const InfluenceEngine& engine,
                         const SolverConfig& config) {
  const auto started = Clock::now();
  const Prepared p = prepare(instance, engine, config);
  Rng rng(config.seed);
  Working w = fresh_working(p, false);
  SlotPool pool(instance.slots.size());
  std::vector<std::size_t> input_order(instance.advertisers.size());
  for (std::size_t i = 0; i < input_order.size(); ++i) input_order[i] = i;
  random_fill(p, w, pool, rng, input_order, true);
  RunTrace trace;
  trace.rng_draws = rng.draws();
  return finish(p, std::move(w), pool.sorted(), std::move(trace), started);
}

SolveResult oracle_solve(const Instance& instance, const InfluenceEngine& engine,
                         const SolverConfig& config) {
  if (instance.slots.size() > config.oracle_max_slots ||
      instance.advertisers.size() > config.oracle_max_advertisers) {
    throw GuardRailExceeded("oracle is limited to " + std::to_string(config.oracle_max_slots) +
                            " slots and " + std::to_string(config.oracle_max_advertisers) +
                            " advertisers");
  }
  const auto started = Clock::now();
  const Prepared p = prepare(instance, engine, config);
  const auto& index = engine.index();
  const std::size_t n = instance.slots.size();
  const std::size_t users = engine.user_count();
  const double delta = config.regret.delta;

  // The bg allocation seeds the incumbent.
  std::vector<int> best_owner(n, -1);
  double best_total;
  {
    Working w = fresh_working(p);
    SlotPool pool(n);
    greedy_fill(p, w, pool, nullptr, false);
    best_total = recomputed_total(p, w.alloc);
    for (std::size_t i = 0; i < w.alloc.advertiser_count(); ++i) {
      for (auto s : w.alloc.of(i).slots) best_owner[static_cast<std::size_t>(s.value)] = static_cast<int>(i);
    }
  }

  std::vector<std::size_t> eligible;
  double fixed_regret = 0.0;
  for (auto adv : p.order) {
    if (p.refined[adv].empty()) {
      fixed_regret += regret_at(p, adv, 0.0);
    } else {
      eligible.push_back(adv);
    }
  }
  const std::size_t na = eligible.size();

  std::vector<SlotId> slot_order(n);
  for (std::size_t k = 0; k < n; ++k) slot_order[k] = SlotId{static_cast<std::int64_t>(k)};
  std::stable_sort(slot_order.begin(), slot_order.end(), [&](SlotId a, SlotId b) {
    return engine.slot_influence(a) > engine.slot_influence(b);
  });

  // suffix[a][d][u]: product of (1 - p_u) over slots d.. that expose u.
  std::vector<std::vector<std::vector<double>>> suffix(
      na, std::vector<std::vector<double>>(n + 1, std::vector<double>(users, 1.0)));
  for (std::size_t a = 0; a < na; ++a) {
    const auto& prob = p.full_ctx[eligible[a]].user_prob;
    for (std::size_t d = n; d-- > 0;) {
      suffix[a][d] = suffix[a][d + 1];
      for (auto u : index.exposed(slot_order[d])) suffix[a][d][u] *= 1.0 - prob[u];
    }
  }

  std::vector<std::vector<double>> product(na, std::vector<double>(users, 1.0));
  std::vector<double> achieved(na, 0.0);
  std::vector<int> owner(n, -1);

  auto bound = [&](std::size_t d) {
    double lb = fixed_regret;
    for (std::size_t a = 0; a < na; ++a) {
      const auto& adv = instance.advertisers[eligible[a]];
      double hi = 0.0;
      for (std::size_t u = 0; u < users; ++u) hi += 1.0 - product[a][u] * suffix[a][d][u];
      const double lo = achieved[a];
      if (hi < adv.demand) {
        lb += adv.payment * (1.0 - delta * hi / adv.demand);
      } else if (lo > adv.demand) {
        lb += adv.payment * (lo - adv.demand) / adv.demand;
      }
    }
    return lb;
  };

  std::vector<std::pair<UserIndex, double>> undo;
  auto search = [&](auto&& self, std::size_t d) -> void {
    if (bound(d) >= best_total) return;
    if (d == n) {
      double total = fixed_regret;
      for (std::size_t a = 0; a < na; ++a) total += regret_at(p, eligible[a], achieved[a]);
      if (total < best_total) {
        best_total = total;
        best_owner = owner;
      }
      return;
    }
    const SlotId s = slot_order[d];
    for (std::size_t a = 0; a < na; ++a) {
      const auto& prob = p.full_ctx[eligible[a]].user_prob;
      const std::size_t mark = undo.size();
      const double before = achieved[a];
      for (auto u : index.exposed(s)) {
        undo.emplace_back(u, product[a][u]);
        achieved[a] += product[a][u] * prob[u];
        product[a][u] *= 1.0 - prob[u];
      }
      owner[static_cast<std::size_t>(s.value)] = static_cast<int>(eligible[a]);
      self(self, d + 1);
      owner[static_cast<std::size_t>(s.value)] = -1;
      while (undo.size() > mark) {
        product[a][undo.back().first] = undo.back().second;
        undo.pop_back();
      }
      achieved[a] = before;
    }
    self(self, d + 1);
  };
  search(search, 0);

  Working w = fresh_working(p);
  SlotPool pool(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int o = best_owner[k];
    if (o < 0) continue;
    commit(p, w, pool, static_cast<std::size_t>(o), SlotId{static_cast<std::int64_t>(k)}, 0.0);
  }
  return finish(p, std::move(w), pool.sorted(), RunTrace{}, started);
}

SolveResult solve(const Instance& instance, const InfluenceEngine& engine,
                  const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::bg:
      return bg_solve(instance, engine, config);
    case Algorithm::rg:
      return rg_solve(instance, engine, config);
    case Algorithm::rls:
      return rls_solve(instance, engine, config);
    case Algorithm::random:
      return random_solve(instance, engine, config);
    case Algorithm::oracle:
      return oracle_solve(instance, engine, config);
  }
  throw InvalidInput("unknown algorithm");
}

SolveResult solve(const Instance& instance, const SolverConfig& config) {
  check_config(config);
  const InfluenceEngine engine(instance, config.gamma);
  return solve(instance, engine, config);
}

}  // namespace trmoa
