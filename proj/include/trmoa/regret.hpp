#pragma once

#include <span>
#include <vector>

#include "trmoa/influence.hpp"
#include "trmoa/model.hpp"

namespace trmoa {

struct RegretParams {
  // Penalty ratio for unsatisfied demand, in [0, 1].
  double delta = 0.5;
};

// Two-sided regret of one advertiser:
//   demand > achieved:  payment * (1 - delta * achieved / demand)   (unsatisfied)
//   otherwise:          payment * (achieved - demand) / demand      (excessive or zero)
// The branch test is the exact strict comparison; there is no tolerance band.
// Throws InvalidInput for demand <= 0, negative payment or achieved, or delta
// outside [0, 1].
AdvertiserRegret advertiser_regret(double achieved, double demand, double payment,
                                   const RegretParams& params);

// Folds per-advertiser regrets into a report with totals and subtotals.
RegretReport make_report(std::vector<AdvertiserRegret> per_advertiser);

// Per-advertiser achieved influence is I(W_i | T_i') under the advertiser's
// refined tag set. `tag_selections` is indexed like instance.advertisers.
RegretReport total_regret(const Allocation& alloc, const Instance& instance,
                          std::span<const std::vector<TagId>> tag_selections,
                          const RegretParams& params, const InfluenceEngine& engine);

struct FeasibilityVerdict {
  bool disjoint = true;
  std::vector<SlotId> conflicting_slots;
  std::vector<double> achieved;
  std::vector<bool> demand_met;

  bool all_demands_met() const;
};

// Diagnostic check of the disjointness and per-advertiser demand constraints.
// Unmet demand is reported, not rejected. Throws InvalidInput naming the
// offending id when the allocation references an unknown slot.
FeasibilityVerdict allocation_is_feasible(const Allocation& alloc, const Instance& instance,
                                          std::span<const std::vector<TagId>> tag_selections,
                                          const InfluenceEngine& engine);

}  // namespace trmoa
