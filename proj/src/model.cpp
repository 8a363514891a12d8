#include "trmoa/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "trmoa/error.hpp"

namespace trmoa {

namespace {

bool valid_point(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && std::abs(p.lat) <= 90.0 &&
         std::abs(p.lon) <= 180.0;
}

bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

class Collector {
 public:
  explicit Collector(ValidationResult& out) : out_(out) {}

  void add(std::string kind, std::string message) {
    out_.violations.push_back({std::move(kind), std::move(message)});
  }

 private:
  ValidationResult& out_;
};

std::string id_text(std::int64_t v) { return std::to_string(v); }

void check_horizon(const Horizon& h, Collector& c) {
  if (h.slot_duration <= 0) {
    c.add("horizon", "slot duration must be positive");
    return;
  }
  if (h.t1 > h.t2) {
    c.add("horizon", "t1 > t2");
    return;
  }
  if ((h.t2 - h.t1) % h.slot_duration != 0) {
    c.add("horizon", "slot duration does not divide t2 - t1");
  }
}

void check_trajectories(const Instance& in, Collector& c) {
  for (std::size_t row = 0; row < in.trajectories.size(); ++row) {
    const auto& r = in.trajectories[row];
    const std::string where = "trajectory row " + std::to_string(row) + " (user " +
                              id_text(r.user.value) + ")";
    if (!valid_point(r.location)) c.add("coordinates", where + ": invalid coordinates");
    if (r.interval.start > r.interval.end) {
      c.add("interval", where + ": t1 > t2");
    } else if (r.interval.start < in.horizon.t1 || r.interval.end > in.horizon.t2) {
      c.add("interval", where + ": interval outside horizon");
    }
  }
}

void check_affinities(const Instance& in, Collector& c) {
  std::unordered_set<UserId> users;
  for (const auto& r : in.trajectories) users.insert(r.user);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (std::size_t row = 0; row < in.affinities.size(); ++row) {
    const auto& a = in.affinities[row];
    const std::string where = "affinity row " + std::to_string(row) + " (user " +
                              id_text(a.user.value) + ", tag " + id_text(a.tag.value) + ")";
    if (!(std::isfinite(a.prob) && a.prob >= 0.0 && a.prob <= 1.0)) {
      c.add("probability", where + ": probability out of range");
    }
    if (!seen.emplace(a.user.value, a.tag.value).second) {
      c.add("duplicate", where + ": duplicate (user, tag) pair");
    }
    if (!users.contains(a.user)) c.add("dangling", where + ": unknown user");
  }
}

void check_slots(const Instance& in, Collector& c) {
  std::unordered_set<BoardId> boards;
  for (const auto& b : in.boards) {
    if (!boards.insert(b.id).second) {
      c.add("duplicate", "board " + id_text(b.id.value) + ": duplicate board id");
    }
    if (!valid_point(b.location)) {
      c.add("coordinates", "board " + id_text(b.id.value) + ": invalid coordinates");
    }
  }

  std::unordered_map<BoardId, std::vector<TimeInterval>> windows;
  bool windows_ordered = true;
  for (std::size_t k = 0; k < in.slots.size(); ++k) {
    const auto& s = in.slots[k];
    const std::string where = "slot " + id_text(s.id.value);
    if (s.id.value != static_cast<std::int64_t>(k)) {
      c.add("slot id", where + ": slot ids must be dense and in order");
    }
    if (!boards.contains(s.board)) c.add("dangling", where + ": unknown board");
    if (s.window.start > s.window.end) {
      c.add("interval", where + ": t1 > t2");
      windows_ordered = false;
    }
    if (!non_negative(s.cost)) c.add("cost", where + ": cost must be finite and >= 0");
    if (!non_negative(s.base_influence)) {
      c.add("influence", where + ": base influence must be finite and >= 0");
    }
    windows[s.board].push_back(s.window);
  }
  if (!windows_ordered || in.horizon.slot_duration <= 0) return;

  for (auto& [board, list] : windows) {
    std::sort(list.begin(), list.end(),
              [](const TimeInterval& a, const TimeInterval& b) { return a.start < b.start; });
    Timestamp cursor = in.horizon.t1;
    bool tiles = true;
    for (const auto& w : list) {
      if (w.start != cursor || w.end - w.start != in.horizon.slot_duration) {
        tiles = false;
        break;
      }
      cursor = w.end;
    }
    if (!tiles || cursor != in.horizon.t2) {
      c.add("tiling", "board " + id_text(board.value) +
                          ": slot windows do not tile the horizon with the slot duration");
    }
  }
}

void check_advertisers(const Instance& in, Collector& c) {
  std::unordered_set<AdvertiserId> ids;
  for (const auto& a : in.advertisers) {
    const std::string where = "advertiser " + id_text(a.id.value);
    if (!ids.insert(a.id).second) c.add("duplicate", where + ": duplicate advertiser id");
    if (!(std::isfinite(a.demand) && a.demand > 0.0)) {
      c.add("demand", where + ": demand must be positive");
    }
    if (!(std::isfinite(a.payment) && a.payment > 0.0)) {
      c.add("payment", where + ": payment must be positive");
    }
    if (a.tags.empty()) c.add("tags", where + ": tag list is empty");
    std::unordered_set<TagId> tags(a.tags.begin(), a.tags.end());
    if (tags.size() != a.tags.size()) c.add("duplicate", where + ": duplicate tag");
  }
}

}  // namespace

std::vector<BillboardSlot> derive_slots(std::span<const Billboard> boards,
                                        const Horizon& horizon) {
  if (horizon.slot_duration <= 0 || horizon.t2 < horizon.t1 ||
      (horizon.t2 - horizon.t1) % horizon.slot_duration != 0) {
    throw InvalidInput("slot duration must be positive and divide t2 - t1");
  }
  const auto per_board = horizon.slots_per_board();
  std::vector<BillboardSlot> slots;
  slots.reserve(boards.size() * static_cast<std::size_t>(per_board));
  for (const auto& b : boards) {
    for (std::int64_t j = 0; j < per_board; ++j) {
      BillboardSlot s;
      s.id = SlotId{static_cast<std::int64_t>(slots.size())};
      s.board = b.id;
      s.location = b.location;
      s.window.start = horizon.t1 + j * horizon.slot_duration;
      s.window.end = s.window.start + horizon.slot_duration;
      slots.push_back(s);
    }
  }
  return slots;
}

ValidationResult validate_instance(const Instance& instance) {
  ValidationResult result;
  Collector c(result);
  check_horizon(instance.horizon, c);
  check_trajectories(instance, c);
  check_affinities(instance, c);
  check_slots(instance, c);
  check_advertisers(instance, c);
  return result;
}

Allocation::Allocation(std::size_t advertiser_count, std::size_t slot_count)
    : per_advertiser_(advertiser_count), slot_count_(slot_count) {}

void Allocation::assign(std::size_t advertiser, TagId tag, SlotId slot) {
  if (slot.value < 0 || static_cast<std::size_t>(slot.value) >= slot_count_) {
    throw InvalidInput("unknown slot id " + std::to_string(slot.value));
  }
  auto& a = per_advertiser_.at(advertiser);
  a.slots.push_back(slot);
  a.buckets[tag].push_back(slot);
}

std::size_t Allocation::allocated_count() const noexcept {
  std::size_t n = 0;
  for (const auto& a : per_advertiser_) n += a.slots.size();
  return n;
}

std::vector<SlotId> Allocation::unassigned() const {
  std::vector<char> used(slot_count_, 0);
  for (const auto& a : per_advertiser_) {
    for (auto s : a.slots) used[static_cast<std::size_t>(s.value)] = 1;
  }
  std::vector<SlotId> out;
  for (std::size_t k = 0; k < slot_count_; ++k) {
    if (!used[k]) out.push_back(SlotId{static_cast<std::int64_t>(k)});
  }
  return out;
}

const char* to_string(RegretKind kind) noexcept {
  switch (kind) {
    case RegretKind::zero:
      return "zero";
    case RegretKind::excessive:
      return "excessive";
    case RegretKind::unsatisfied:
      return "unsatisfied";
  }
  return "zero";
}

std::optional<RegretKind> regret_kind_from_string(std::string_view text) noexcept {
  if (text == "zero") return RegretKind::zero;
  if (text == "excessive") return RegretKind::excessive;
  if (text == "unsatisfied") return RegretKind::unsatisfied;
  return std::nullopt;
}

}  // namespace trmoa
