#include "trmoa/regret.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trmoa/error.hpp"

namespace trmoa {

AdvertiserRegret advertiser_regret(double achieved, double demand, double payment,
                                   const RegretParams& params) {
  if (!(demand > 0.0) || !std::isfinite(demand)) {
    throw InvalidInput("advertiser demand must be positive");
  }
  if (!(payment >= 0.0) || !(achieved >= 0.0)) {
    throw InvalidInput("payment and achieved influence must be non-negative");
  }
  if (!(params.delta >= 0.0 && params.delta <= 1.0)) {
    throw InvalidInput("penalty ratio delta must lie in [0, 1]");
  }
  AdvertiserRegret r;
  r.achieved = achieved;
  if (demand > achieved) {
    r.value = payment * (1.0 - params.delta * achieved / demand);
    r.kind = RegretKind::unsatisfied;
  } else {
    r.value = payment * (achieved - demand) / demand;
    r.kind = achieved > demand ? RegretKind::excessive : RegretKind::zero;
  }
  return r;
}

RegretReport make_report(std::vector<AdvertiserRegret> per_advertiser) {
  RegretReport report;
  for (const auto& r : per_advertiser) {
    report.total += r.value;
    if (r.kind == RegretKind::unsatisfied) {
      report.unsatisfied += r.value;
    } else {
      report.excessive += r.value;
      ++report.satisfied_count;
    }
  }
  report.per_advertiser = std::move(per_advertiser);
  return report;
}

namespace {

void check_shapes(const Allocation& alloc, const Instance& instance,
                  std::span<const std::vector<TagId>> tag_selections) {
  if (alloc.advertiser_count() != instance.advertisers.size() ||
      tag_selections.size() != instance.advertisers.size()) {
    throw InvalidInput("allocation and tag selections must cover every advertiser");
  }
  for (std::size_t i = 0; i < alloc.advertiser_count(); ++i) {
    for (auto s : alloc.of(i).slots) {
      if (s.value < 0 || static_cast<std::size_t>(s.value) >= instance.slots.size()) {
        throw InvalidInput("unknown slot id " + std::to_string(s.value));
      }
    }
  }
}

}  // namespace

RegretReport total_regret(const Allocation& alloc, const Instance& instance,
                          std::span<const std::vector<TagId>> tag_selections,
                          const RegretParams& params, const InfluenceEngine& engine) {
  check_shapes(alloc, instance, tag_selections);
  std::vector<AdvertiserRegret> parts;
  parts.reserve(instance.advertisers.size());
  for (std::size_t i = 0; i < instance.advertisers.size(); ++i) {
    const auto& adv = instance.advertisers[i];
    const auto ctx = engine.context(tag_selections[i]);
    const double achieved = engine.influence(alloc.of(i).slots, ctx);
    parts.push_back(advertiser_regret(achieved, adv.demand, adv.payment, params));
  }
  return make_report(std::move(parts));
}

bool FeasibilityVerdict::all_demands_met() const {
  return std::all_of(demand_met.begin(), demand_met.end(), [](bool b) { return b; });
}

FeasibilityVerdict allocation_is_feasible(const Allocation& alloc, const Instance& instance,
                                          std::span<const std::vector<TagId>> tag_selections,
                                          const InfluenceEngine& engine) {
  check_shapes(alloc, instance, tag_selections);
  FeasibilityVerdict v;
  std::vector<int> owner(instance.slots.size(), -1);
  for (std::size_t i = 0; i < alloc.advertiser_count(); ++i) {
    for (auto s : alloc.of(i).slots) {
      auto& o = owner[static_cast<std::size_t>(s.value)];
      if (o != -1) {
        v.disjoint = false;
        v.conflicting_slots.push_back(s);
      }
      o = static_cast<int>(i);
    }
  }
  std::sort(v.conflicting_slots.begin(), v.conflicting_slots.end());
  v.conflicting_slots.erase(std::unique(v.conflicting_slots.begin(), v.conflicting_slots.end()),
                            v.conflicting_slots.end());

  for (std::size_t i = 0; i < instance.advertisers.size(); ++i) {
    const auto ctx = engine.context(tag_selections[i]);
    const double achieved = engine.influence(alloc.of(i).slots, ctx);
    v.achieved.push_back(achieved);
    v.demand_met.push_back(achieved >= instance.advertisers[i].demand);
  }
  return v;
}

}  // namespace trmoa
