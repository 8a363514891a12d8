#pragma once

// Plain and tag-specific influence of slot sets over the trajectory database.
//
// A user u is exposed to slot s when one of u's trajectory records lies within
// gamma meters of the slot's board and its interval overlaps the slot window.
// The probability that s influences u under tag set T' is
//
//   Pr(u, s | T') = [u exposed to s] * (1 - prod_{x in T'} (1 - Pr(u | x)))
//
// and the influence of a slot set S is sum_u (1 - prod_{s in S} (1 - Pr(u, s | T'))).
// Exposure gates once per slot: repeated visits during one window do not
// compound.

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "trmoa/model.hpp"

namespace trmoa {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

double haversine_meters(const GeoPoint& a, const GeoPoint& b) noexcept;

// 1 - prod (1 - p) over the given per-tag probabilities; 0 for an empty list.
double combine_tag_probs(std::span<const double> probs) noexcept;

using UserIndex = std::uint32_t;

class ExposureIndex {
 public:
  // Users are numbered densely in ascending UserId order, so the result does
  // not depend on the order of trajectory rows.
  ExposureIndex(std::span<const TrajectoryRecord> trajectories,
                std::span<const BillboardSlot> slots, double gamma_meters);

  std::span<const UserIndex> exposed(SlotId slot) const {
    return exposure_.at(static_cast<std::size_t>(slot.value));
  }
  std::size_t slot_count() const noexcept { return exposure_.size(); }
  std::size_t user_count() const noexcept { return users_.size(); }
  std::span<const UserId> users() const noexcept { return users_; }
  std::optional<UserIndex> index_of(UserId user) const;
  double gamma() const noexcept { return gamma_; }

 private:
  std::vector<UserId> users_;
  std::vector<std::vector<UserIndex>> exposure_;
  double gamma_;
};

// Per-user probability Pr(u | T') for one tag set T'.
struct TagContext {
  std::vector<double> user_prob;
};

struct TagUser {
  UserIndex user;
  double prob;
};

class InfluenceEngine {
 public:
  InfluenceEngine(const Instance& instance, double gamma_meters);

  const ExposureIndex& index() const noexcept { return index_; }
  std::size_t user_count() const noexcept { return index_.user_count(); }
  std::size_t slot_count() const noexcept { return index_.slot_count(); }

  // Pr(u | x); zero for pairs without an affinity row.
  double affinity(UserIndex user, TagId tag) const;
  double tag_prob(UserIndex user, std::span<const TagId> tags) const;
  TagContext context(std::span<const TagId> tags) const;
  // Context over every tag any user carries.
  const TagContext& universe_context() const noexcept { return universe_; }
  std::span<const TagId> tag_universe() const noexcept { return tag_ids_; }

  // Users with a positive affinity for `tag`, ascending by user.
  std::span<const TagUser> users_with_tag(TagId tag) const;

  double influence(std::span<const SlotId> slots, const TagContext& ctx) const;
  // sum_u Pr(u | T'), the tag-level objective used for tag refinement.
  double tag_set_influence(std::span<const TagId> tags) const;

  // Plain influence of a single slot over the full tag universe.
  double slot_influence(SlotId slot) const {
    return slot_influence_.at(static_cast<std::size_t>(slot.value));
  }
  // Sum of single-slot plain influences over the whole catalog.
  double supply() const noexcept { return supply_; }

 private:
  ExposureIndex index_;
  std::vector<TagId> tag_ids_;
  std::unordered_map<TagId, std::size_t> tag_pos_;
  std::vector<std::vector<TagUser>> tag_users_;
  TagContext universe_;
  std::vector<double> slot_influence_;
  double supply_ = 0.0;
};

// Running state of sum_u (1 - prod_u) for a growing slot set under a fixed
// tag context. Gains cost O(|exposed(slot)|); a slot already in the set
// gains zero and adding it again is a no-op.
class InfluenceAccumulator {
 public:
  InfluenceAccumulator(const ExposureIndex& index, const TagContext& ctx);

  double gain(SlotId slot) const;
  // Commits the slot and returns its gain.
  double add(SlotId slot);
  double total() const noexcept { return total_; }
  std::span<const double> products() const noexcept { return product_; }

 private:
  const ExposureIndex* index_;
  const TagContext* ctx_;
  std::vector<double> product_;
  std::vector<bool> member_;
  double total_ = 0.0;
};

}  // namespace trmoa
