#pragma once

// Slot allocation strategies behind one solver interface:
//
//   bg      round-robin greedy over each advertiser's refined tags, picking the
//           slot with the largest regret reduction per unit of denominator
//   rg      same loop, argmax over a uniform sample of the remaining pool
//   rls     rg warm start, then N uniformly random rebuilds kept only when they
//           lower total regret, then an rg pass over any leftover slots
//   random  uniform baseline in input order
//   oracle  exact branch-and-bound minimum, desk-scale instances only
//
// Every solve draws from a single seeded Rng stream, so a (instance, config)
// pair reproduces the same allocation and trace.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "trmoa/influence.hpp"
#include "trmoa/model.hpp"
#include "trmoa/regret.hpp"
#include "trmoa/tag_selection.hpp"

namespace trmoa {

enum class Algorithm { bg, rg, rls, random, oracle };

// Which tag set prices a candidate slot: the tag under the round-robin
// pointer, or the advertiser's whole refined set.
enum class ScoreContext { tag, full };

enum class ScoreDenominator { cost, influence };

const char* to_string(Algorithm a) noexcept;
std::optional<Algorithm> algorithm_from_string(std::string_view text) noexcept;

struct SolverConfig {
  Algorithm algorithm = Algorithm::bg;
  double epsilon = 0.01;
  std::uint32_t rls_iters = 20;
  std::uint64_t seed = 0;
  RegretParams regret;
  TagSelectionParams tags;
  double gamma = 100.0;
  ScoreContext score_context = ScoreContext::tag;
  ScoreDenominator score_denominator = ScoreDenominator::cost;
  // Stop an advertiser when the best pick would raise its regret.
  bool early_stop = false;
  // Forces the rg sample size when non-zero.
  std::size_t rg_sample_override = 0;
  std::size_t oracle_max_slots = 12;
  std::size_t oracle_max_advertisers = 3;
};

// Throws InvalidInput when a field is out of range.
void check_config(const SolverConfig& config);

struct TraceEvent {
  enum class Kind { select, skip };

  Kind kind = Kind::select;
  // Position in Instance::advertisers.
  std::size_t advertiser = 0;
  std::size_t tag_pointer = 0;
  TagId tag;
  SlotId slot;
  double score = 0.0;
  // demand - I(Z_i | T_i') just before the selection.
  double remaining_demand = 0.0;
};

struct RunTrace {
  std::vector<TraceEvent> events;
  double wall_ms = 0.0;
  std::uint64_t rng_draws = 0;
  // rls only: regret of the rg warm start and how many rebuilds replaced it.
  std::optional<double> warm_start_regret;
  std::size_t improvements = 0;
};

// Applies the trace's select events, in order, to an empty allocation.
Allocation replay(const RunTrace& trace, std::size_t advertiser_count, std::size_t slot_count);

struct SolveResult {
  Allocation allocation;
  RegretReport report;
  RunTrace trace;
  // Slots left unassigned, ascending.
  std::vector<SlotId> leftover;
  // Refined tag set per advertiser, in selection order.
  std::vector<std::vector<TagId>> refined_tags;
};

// Advertiser positions, descending by payment/demand; ties by ascending id.
std::vector<std::size_t> sort_advertisers(std::span<const Advertiser> advertisers);

// min(remaining, ceil(remaining / k * ln(1 / epsilon))) with
// k = max(1, ceil(0.1 * remaining)), clamped below at 1.
std::size_t rg_sample_size(std::size_t remaining, double epsilon);

// Refined tags for every advertiser. Advertisers sharing a candidate list
// share one refinement run.
std::vector<std::vector<TagId>> refine_all_tags(const Instance& instance,
                                                const InfluenceEngine& engine,
                                                const TagSelectionParams& params);

SolveResult bg_solve(const Instance& instance, const InfluenceEngine& engine,
                     const SolverConfig& config);
SolveResult rg_solve(const Instance& instance, const InfluenceEngine& engine,
                     const SolverConfig& config);
SolveResult rls_solve(const Instance& instance, const InfluenceEngine& engine,
                      const SolverConfig& config);
SolveResult random_solve(const Instance& instance, const InfluenceEngine& engine,
                         const SolverConfig& config);
// Throws GuardRailExceeded above config.oracle_max_slots slots or
// config.oracle_max_advertisers advertisers.
SolveResult oracle_solve(const Instance& instance, const InfluenceEngine& engine,
                         const SolverConfig& config);

// Dispatches on config.algorithm.
SolveResult solve(const Instance& instance, const InfluenceEngine& engine,
                  const SolverConfig& config);
// Builds the engine at config.gamma first.
SolveResult solve(const Instance& instance, const SolverConfig& config);

}  // namespace trmoa
