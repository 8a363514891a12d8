#pragma once

// Fixtures and reference implementations shared by the unit and acceptance
// tests. The reference code works from the raw instance rows, never from the
// library's indexes, so it can stand as an oracle for them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "trmoa/model.hpp"

namespace fixtures {

using namespace trmoa;

// Great-circle distance from the chord between unit vectors; algebraically the
// haversine distance but computed along a different path.
inline double chord_distance_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double r = 6'371'000.0;
  constexpr double k = std::numbers::pi / 180.0;
  auto unit = [&](const GeoPoint& p) {
    return std::array<double, 3>{std::cos(p.lat * k) * std::cos(p.lon * k),
                                 std::cos(p.lat * k) * std::sin(p.lon * k), std::sin(p.lat * k)};
  };
  const auto u = unit(a);
  const auto v = unit(b);
  const double c = std::hypot(u[0] - v[0], u[1] - v[1], u[2] - v[2]);
  return 2.0 * r * std::asin(std::min(1.0, c / 2.0));
}

inline bool ref_exposed(const Instance& in, UserId user, const BillboardSlot& slot, double gamma) {
  for (const auto& r : in.trajectories) {
    if (r.user != user) continue;
    if (chord_distance_m(r.location, slot.location) > gamma) continue;
    if (r.interval.start <= slot.window.end && slot.window.start <= r.interval.end) return true;
  }
  return false;
}

inline std::vector<UserId> ref_users(const Instance& in) {
  std::set<UserId> s;
  for (const auto& r : in.trajectories) s.insert(r.user);
  return {s.begin(), s.end()};
}

// Pr(u | T') straight from the affinity rows.
inline double ref_tag_prob(const Instance& in, UserId user, const std::vector<TagId>& tags) {
  double miss = 1.0;
  for (auto t : tags) {
    for (const auto& a : in.affinities) {
      if (a.user == user && a.tag == t) miss *= 1.0 - a.prob;
    }
  }
  return 1.0 - miss;
}

// I(S | T') by definition: one exposure gate per (user, slot).
inline double ref_influence(const Instance& in, const std::vector<SlotId>& slots,
                            const std::vector<TagId>& tags, double gamma) {
  double total = 0.0;
  for (auto u : ref_users(in)) {
    const double p = ref_tag_prob(in, u, tags);
    double miss = 1.0;
    for (auto s : slots) {
      if (ref_exposed(in, u, in.slots[static_cast<std::size_t>(s.value)], gamma)) miss *= 1.0 - p;
    }
    total += 1.0 - miss;
  }
  return total;
}

inline std::vector<TagId> all_tags(const Instance& in) {
  std::set<TagId> s;
  for (const auto& a : in.affinities) s.insert(a.tag);
  return {s.begin(), s.end()};
}

inline double ref_regret(double achieved, double demand, double payment, double delta) {
  if (achieved < demand) return payment * (1.0 - delta * achieved / demand);
  return payment * (achieved - demand) / demand;
}

// Exhaustive minimum regret over every assignment of slots to advertisers or
// to nobody, with each advertiser priced under its given tag set.
inline double ref_min_regret(const Instance& in, const std::vector<std::vector<TagId>>& tags,
                             double delta, double gamma) {
  const std::size_t m = in.slots.size();
  const std::size_t n = in.advertisers.size();
  // Per (advertiser, user): Pr(u | T_i) and per-slot exposure bits.
  const auto users = ref_users(in);
  std::vector<std::vector<double>> prob(n, std::vector<double>(users.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t u = 0; u < users.size(); ++u) prob[i][u] = ref_tag_prob(in, users[u], tags[i]);
  }
  std::vector<std::vector<bool>> exposed(m, std::vector<bool>(users.size()));
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t u = 0; u < users.size(); ++u) {
      exposed[s][u] = ref_exposed(in, users[u], in.slots[s], gamma);
    }
  }
  std::vector<std::size_t> owner(m, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double achieved = 0.0;
      for (std::size_t u = 0; u < users.size(); ++u) {
        double miss = 1.0;
        for (std::size_t s = 0; s < m; ++s) {
          if (owner[s] == i + 1 && exposed[s][u]) miss *= 1.0 - prob[i][u];
        }
        achieved += 1.0 - miss;
      }
      const auto& a = in.advertisers[i];
      total += ref_regret(achieved, a.demand, a.payment, delta);
    }
    best = std::min(best, total);
    std::size_t k = 0;
    while (k < m && ++owner[k] == n + 1) owner[k++] = 0;
    if (k == m) break;
  }
  return best;
}

struct MicroShape {
  std::size_t max_users = 20;
  std::size_t max_slots = 8;
  std::size_t max_tags = 6;
  std::size_t max_advertisers = 3;
};

// Random instance within the shape. Boards sit within a few hundred meters of
// each other so that exposures overlap between slots.
inline Instance random_micro(std::uint64_t seed, const MicroShape& shape = {}) {
  std::mt19937_64 g(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
  };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); };
  constexpr double lat0 = 40.75, lon0 = -73.98, deg = 1.0 / 111'000.0;

  Instance in;
  const std::size_t per_board = pick(1, 2);
  const std::size_t boards = pick(1, std::max<std::size_t>(1, shape.max_slots / per_board));
  in.horizon = {0, static_cast<Timestamp>(per_board) * 600, 600};
  for (std::size_t b = 0; b < boards; ++b) {
    in.boards.push_back({BoardId{static_cast<std::int64_t>(b + 1)},
                         {lat0 + real(-150, 150) * deg, lon0 + real(-150, 150) * deg}});
  }
  in.slots = derive_slots(in.boards, in.horizon);

  const std::size_t users = pick(1, shape.max_users);
  const std::size_t tags = pick(1, shape.max_tags);
  for (std::size_t u = 0; u < users; ++u) {
    const UserId id{static_cast<std::int64_t>(u + 1)};
    for (std::size_t r = pick(1, 3); r > 0; --r) {
      const auto start = static_cast<Timestamp>(pick(0, static_cast<std::size_t>(in.horizon.t2)));
      const auto end = std::min<Timestamp>(in.horizon.t2, start + static_cast<Timestamp>(pick(0, 400)));
      in.trajectories.push_back({id, {lat0 + real(-200, 200) * deg, lon0 + real(-200, 200) * deg},
                                 {start, end}});
    }
    for (std::size_t t = 1; t <= tags; ++t) {
      if (real(0, 1) < 0.6) {
        in.affinities.push_back({id, TagId{static_cast<std::int64_t>(t)}, real(0.0, 1.0)});
      }
    }
  }
  for (std::size_t a = pick(1, shape.max_advertisers); a > 0; --a) {
    Advertiser adv;
    adv.id = AdvertiserId{static_cast<std::int64_t>(in.advertisers.size() + 1)};
    adv.demand = real(0.5, 6.0);
    adv.payment = real(1.0, 20.0);
    for (std::size_t t = 1; t <= tags; ++t) {
      if (adv.tags.empty() || real(0, 1) < 0.5) adv.tags.push_back(TagId{static_cast<std::int64_t>(t)});
    }
    in.advertisers.push_back(std::move(adv));
  }
  for (auto& s : in.slots) s.cost = real(0.1, 2.0);
  return in;
}

// Each slot reaches its own disjoint crowd of users who carry tag 1 with
// probability 1, so slot influences add exactly. Boards are kilometres apart.
inline Instance additive_instance(const std::vector<int>& slot_users,
                                  const std::vector<std::pair<double, double>>& demand_payment) {
  Instance in;
  in.horizon = {0, 100, 100};
  std::int64_t next_user = 1;
  for (std::size_t k = 0; k < slot_users.size(); ++k) {
    const GeoPoint at{40.0 + 0.05 * static_cast<double>(k), -74.0};
    in.boards.push_back({BoardId{static_cast<std::int64_t>(k + 1)}, at});
    for (int j = 0; j < slot_users[k]; ++j) {
      const UserId u{next_user++};
      in.trajectories.push_back({u, at, {10, 20}});
      in.affinities.push_back({u, TagId{1}, 1.0});
    }
  }
  in.slots = derive_slots(in.boards, in.horizon);
  for (std::size_t k = 0; k < in.slots.size(); ++k) {
    in.slots[k].base_influence = slot_users[k];
    in.slots[k].cost = std::max(0.01, slot_users[k] / 10.0);
  }
  std::int64_t id = 1;
  for (auto [d, p] : demand_payment) in.advertisers.push_back({AdvertiserId{id++}, d, p, {TagId{1}}});
  return in;
}

// Slot influences 4, 5, 3, 6, 2; demands 6, 7, 8; payments 9, 12, 18.
inline Instance worked_example() {
  return additive_instance({4, 5, 3, 6, 2}, {{6, 9}, {7, 12}, {8, 18}});
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("trmoa_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
