#include "trmoa/influence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "trmoa/error.hpp"

namespace trmoa {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct CellKey {
  std::int64_t row;
  std::int64_t col;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    auto h = static_cast<std::uint64_t>(k.row) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.col) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Uniform lat/lon grid whose cells are at least gamma wide in both
// directions for every latitude present, so any pair within gamma lies in
// neighbouring cells.
class BoardGrid {
 public:
  BoardGrid(double gamma, double max_abs_lat) {
    const double angle = gamma / kEarthRadiusMeters;
    cell_lat_ = angle / kDegToRad * (1.0 + 1e-9);
    const double c = std::cos(std::min(max_abs_lat, 90.0) * kDegToRad);
    const double s = std::sin(angle / 2.0);
    if (c <= s) {
      cell_lon_ = 360.0;
    } else {
      cell_lon_ = 2.0 * std::asin(s / c) / kDegToRad * (1.0 + 1e-9);
    }
  }

  CellKey key(const GeoPoint& p) const {
    return {static_cast<std::int64_t>(std::floor(p.lat / cell_lat_)),
            static_cast<std::int64_t>(std::floor(p.lon / cell_lon_))};
  }

  void insert(const GeoPoint& p, std::size_t board) { cells_[key(p)].push_back(board); }

  template <class Fn>
  void for_neighbours(const GeoPoint& p, Fn&& fn) const {
    const auto k = key(p);
    for (std::int64_t dr = -1; dr <= 1; ++dr) {
      for (std::int64_t dc = -1; dc <= 1; ++dc) {
        auto it = cells_.find({k.row + dr, k.col + dc});
        if (it == cells_.end()) continue;
        for (auto b : it->second) fn(b);
      }
    }
  }

 private:
  double cell_lat_;
  double cell_lon_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
};

}  // namespace

double haversine_meters(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

double combine_tag_probs(std::span<const double> probs) noexcept {
  double miss = 1.0;
  for (double p : probs) miss *= 1.0 - p;
  return 1.0 - miss;
}

ExposureIndex::ExposureIndex(std::span<const TrajectoryRecord> trajectories,
                             std::span<const BillboardSlot> slots, double gamma_meters)
    : exposure_(slots.size()), gamma_(gamma_meters) {
  if (!(gamma_meters > 0.0)) throw InvalidInput("gamma must be positive");

  users_.reserve(trajectories.size());
  for (const auto& r : trajectories) users_.push_back(r.user);
  std::sort(users_.begin(), users_.end());
  users_.erase(std::unique(users_.begin(), users_.end()), users_.end());

  // Boards are identified by id; each keeps the slots that belong to it.
  std::unordered_map<BoardId, std::size_t> board_pos;
  std::vector<GeoPoint> board_loc;
  std::vector<std::vector<std::size_t>> board_slots;
  double max_abs_lat = 0.0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    auto [it, fresh] = board_pos.emplace(slots[k].board, board_loc.size());
    if (fresh) {
      board_loc.push_back(slots[k].location);
      board_slots.emplace_back();
      max_abs_lat = std::max(max_abs_lat, std::abs(slots[k].location.lat));
    }
    board_slots[it->second].push_back(k);
  }
  for (const auto& r : trajectories) {
    max_abs_lat = std::max(max_abs_lat, std::abs(r.location.lat));
  }

  BoardGrid grid(gamma_meters, max_abs_lat);
  for (std::size_t b = 0; b < board_loc.size(); ++b) grid.insert(board_loc[b], b);

  for (const auto& r : trajectories) {
    const auto u = static_cast<UserIndex>(
        std::lower_bound(users_.begin(), users_.end(), r.user) - users_.begin());
    grid.for_neighbours(r.location, [&](std::size_t b) {
      if (haversine_meters(r.location, board_loc[b]) > gamma_meters) return;
      for (auto k : board_slots[b]) {
        if (slots[k].window.overlaps(r.interval)) exposure_[k].push_back(u);
      }
    });
  }
  for (auto& list : exposure_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

std::optional<UserIndex> ExposureIndex::index_of(UserId user) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), user);
  if (it == users_.end() || *it != user) return std::nullopt;
  return static_cast<UserIndex>(it - users_.begin());
}

InfluenceEngine::InfluenceEngine(const Instance& instance, double gamma_meters)
    : index_(instance.trajectories, instance.slots, gamma_meters) {
  for (const auto& a : instance.affinities) {
    const auto u = index_.index_of(a.user);
    if (!u || !(a.prob > 0.0)) continue;
    auto [it, fresh] = tag_pos_.emplace(a.tag, tag_ids_.size());
    if (fresh) {
      tag_ids_.push_back(a.tag);
      tag_users_.emplace_back();
    }
    tag_users_[it->second].push_back({*u, std::min(a.prob, 1.0)});
  }
  for (auto& list : tag_users_) {
    std::sort(list.begin(), list.end(),
              [](const TagUser& x, const TagUser& y) { return x.user < y.user; });
  }

  // Keep tag ids sorted so contexts and universes are order independent.
  std::vector<std::size_t> order(tag_ids_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return tag_ids_[x] < tag_ids_[y]; });
  std::vector<TagId> ids;
  std::vector<std::vector<TagUser>> users;
  for (auto i : order) {
    ids.push_back(tag_ids_[i]);
    users.push_back(std::move(tag_users_[i]));
  }
  tag_ids_ = std::move(ids);
  tag_users_ = std::move(users);
  tag_pos_.clear();
  for (std::size_t i = 0; i < tag_ids_.size(); ++i) tag_pos_.emplace(tag_ids_[i], i);

  universe_ = context(tag_ids_);
  slot_influence_.resize(index_.slot_count());
  for (std::size_t k = 0; k < slot_influence_.size(); ++k) {
    double sum = 0.0;
    for (auto u : index_.exposed(SlotId{static_cast<std::int64_t>(k)})) {
      sum += universe_.user_prob[u];
    }
    slot_influence_[k] = sum;
    supply_ += sum;
  }
}

double InfluenceEngine::affinity(UserIndex user, TagId tag) const {
  auto list = users_with_tag(tag);
  auto it = std::lower_bound(list.begin(), list.end(), user,
                             [](const TagUser& e, UserIndex u) { return e.user < u; });
  return (it != list.end() && it->user == user) ? it->prob : 0.0;
}

double InfluenceEngine::tag_prob(UserIndex user, std::span<const TagId> tags) const {
  double miss = 1.0;
  for (auto t : tags) miss *= 1.0 - affinity(user, t);
  return 1.0 - miss;
}

TagContext InfluenceEngine::context(std::span<const TagId> tags) const {
  std::vector<double> miss(index_.user_count(), 1.0);
  std::vector<TagId> unique(tags.begin(), tags.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  for (auto t : unique) {
    for (const auto& e : users_with_tag(t)) miss[e.user] *= 1.0 - e.prob;
  }
  TagContext ctx;
  ctx.user_prob.resize(miss.size());
  for (std::size_t u = 0; u < miss.size(); ++u) ctx.user_prob[u] = 1.0 - miss[u];
  return ctx;
}

std::span<const TagUser> InfluenceEngine::users_with_tag(TagId tag) const {
  auto it = tag_pos_.find(tag);
  if (it == tag_pos_.end()) return {};
  return tag_users_[it->second];
}

double InfluenceEngine::influence(std::span<const SlotId> slots, const TagContext& ctx) const {
  std::vector<SlotId> unique(slots.begin(), slots.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<double> product(index_.user_count(), 1.0);
  for (auto s : unique) {
    for (auto u : index_.exposed(s)) product[u] *= 1.0 - ctx.user_prob[u];
  }
  double total = 0.0;
  for (double p : product) total += 1.0 - p;
  return total;
}

double InfluenceEngine::tag_set_influence(std::span<const TagId> tags) const {
  const auto ctx = context(tags);
  double total = 0.0;
  for (double p : ctx.user_prob) total += p;
  return total;
}

InfluenceAccumulator::InfluenceAccumulator(const ExposureIndex& index, const TagContext& ctx)
    : index_(&index), ctx_(&ctx), product_(index.user_count(), 1.0), member_(index.slot_count()) {}

double InfluenceAccumulator::gain(SlotId slot) const {
  if (member_.at(static_cast<std::size_t>(slot.value))) return 0.0;
  double g = 0.0;
  for (auto u : index_->exposed(slot)) g += product_[u] * ctx_->user_prob[u];
  return g;
}

double InfluenceAccumulator::add(SlotId slot) {
  auto member = member_.at(static_cast<std::size_t>(slot.value));
  if (member) return 0.0;
  member = true;
  double g = 0.0;
  for (auto u : index_->exposed(slot)) {
    const double p = ctx_->user_prob[u];
    g += product_[u] * p;
    product_[u] *= 1.0 - p;
  }
  total_ += g;
  return g;
}

}  // namespace trmoa
