#pragma once

// Domain entities shared by every module: trajectories, tag affinities,
// billboards and their time slots, advertisers, allocations and regret
// reports.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trmoa {

template <class Tag>
struct Id {
  std::int64_t value{};

  friend constexpr auto operator<=>(Id, Id) = default;
};

using UserId = Id<struct UserIdTag>;
using TagId = Id<struct TagIdTag>;
using BoardId = Id<struct BoardIdTag>;
using SlotId = Id<struct SlotIdTag>;
using AdvertiserId = Id<struct AdvertiserIdTag>;

// Seconds since epoch.
using Timestamp = std::int64_t;

struct GeoPoint {
  double lat{};
  double lon{};
};

// Closed interval [start, end].
struct TimeInterval {
  Timestamp start{};
  Timestamp end{};

  bool overlaps(const TimeInterval& other) const noexcept {
    return start <= other.end && other.start <= end;
  }
};

// Global horizon [t1, t2] cut into slots of slot_duration seconds.
struct Horizon {
  Timestamp t1{};
  Timestamp t2{};
  Timestamp slot_duration{1};

  std::int64_t slots_per_board() const noexcept {
    return slot_duration > 0 ? (t2 - t1) / slot_duration : 0;
  }
};

struct TrajectoryRecord {
  UserId user;
  GeoPoint location;
  TimeInterval interval;
};

struct TagAffinity {
  UserId user;
  TagId tag;
  double prob{};
};

struct Billboard {
  BoardId id;
  GeoPoint location;
};

struct BillboardSlot {
  SlotId id;
  BoardId board;
  GeoPoint location;
  TimeInterval window;
  double cost{};
  // Plain influence of the slot on its own, over the full tag universe.
  double base_influence{};
};

struct Advertiser {
  AdvertiserId id;
  double demand{};
  double payment{};
  std::vector<TagId> tags;
};

// Slot ids are dense: slots[k].id.value == k.
struct Instance {
  Horizon horizon;
  std::vector<TrajectoryRecord> trajectories;
  std::vector<TagAffinity> affinities;
  std::vector<Billboard> boards;
  std::vector<BillboardSlot> slots;
  std::vector<Advertiser> advertisers;
};

// Tiles [t1, t2] for every board in board order. Slot ids are assigned
// densely, board-major. Costs and base influence are left at zero.
std::vector<BillboardSlot> derive_slots(std::span<const Billboard> boards,
                                        const Horizon& horizon);

struct Violation {
  std::string kind;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

// Scans the instance for dangling ids, bad intervals, out-of-range values and
// slot tilings that do not partition the horizon. Never throws.
ValidationResult validate_instance(const Instance& instance);

// Slots allocated to one advertiser. `slots` keeps insertion order; `buckets`
// holds the per-tag sub-buckets whose union is `slots`.
struct AdvertiserAllocation {
  std::vector<SlotId> slots;
  std::map<TagId, std::vector<SlotId>> buckets;

  friend bool operator==(const AdvertiserAllocation&, const AdvertiserAllocation&) = default;
};

class Allocation {
 public:
  Allocation() = default;
  Allocation(std::size_t advertiser_count, std::size_t slot_count);

  // Advertiser positions index Instance::advertisers.
  void assign(std::size_t advertiser, TagId tag, SlotId slot);

  const AdvertiserAllocation& of(std::size_t advertiser) const {
    return per_advertiser_.at(advertiser);
  }
  std::size_t advertiser_count() const noexcept { return per_advertiser_.size(); }
  std::size_t slot_count() const noexcept { return slot_count_; }
  std::size_t allocated_count() const noexcept;

  // Slots not assigned to anybody, ascending.
  std::vector<SlotId> unassigned() const;

  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  std::vector<AdvertiserAllocation> per_advertiser_;
  std::size_t slot_count_ = 0;
};

enum class RegretKind { zero, excessive, unsatisfied };

const char* to_string(RegretKind kind) noexcept;
std::optional<RegretKind> regret_kind_from_string(std::string_view text) noexcept;

struct AdvertiserRegret {
  double achieved{};
  double value{};
  RegretKind kind = RegretKind::zero;
};

struct RegretReport {
  std::vector<AdvertiserRegret> per_advertiser;
  double total{};
  double excessive{};
  double unsatisfied{};
  std::size_t satisfied_count{};
};

}  // namespace trmoa

template <class Tag>
struct std::hash<trmoa::Id<Tag>> {
  std::size_t operator()(trmoa::Id<Tag> id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
