#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "trmoa/error.hpp"
#include "trmoa/instance_io.hpp"

namespace trmoa {

namespace {

// Sub-stream labels, so the world does not shift when advertiser parameters
// change.
enum Stream : std::uint64_t { kWorld = 1, kCosts = 2, kAdvertisers = 3 };

struct Vec2 {
  double x;
  double y;
};

class Street {
 public:
  explicit Street(std::vector<Vec2> points) : points_(std::move(points)) {
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double dx = points_[i].x - points_[i - 1].x;
      const double dy = points_[i].y - points_[i - 1].y;
      cumulative_.push_back(cumulative_.back() + std::hypot(dx, dy));
    }
  }

  // Point at fraction f in [0, 1] of the street's length.
  Vec2 at(double f) const {
    const double target = f * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin(), 1)),
        points_.size() - 1);
    const double seg = cumulative_[i] - cumulative_[i - 1];
    const double t = seg > 0.0 ? (target - cumulative_[i - 1]) / seg : 0.0;
    return {points_[i - 1].x + t * (points_[i].x - points_[i - 1].x),
            points_[i - 1].y + t * (points_[i].y - points_[i - 1].y)};
  }

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

// Three-segment polyline crossing the area with gentle turns.
Street random_street(Rng& rng, double extent) {
  const double half = extent / 2.0;
  Vec2 p{rng.uniform(-half, half), rng.uniform(-half, half)};
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double segment = extent / 3.0;
  std::vector<Vec2> points{p};
  for (int i = 0; i < 3; ++i) {
    heading += rng.uniform(-0.5, 0.5);
    p = {p.x + segment * std::cos(heading), p.y + segment * std::sin(heading)};
    points.push_back(p);
  }
  return Street(std::move(points));
}

GeoPoint to_geo(const GeneratorParams& g, Vec2 v) {
  constexpr double kRadToDeg = 180.0 / std::numbers::pi;
  const double lat = g.center_lat + v.y / kEarthRadiusMeters * kRadToDeg;
  const double lon = g.center_lon + v.x / (kEarthRadiusMeters *
                                           std::cos(g.center_lat / kRadToDeg)) * kRadToDeg;
  return {lat, lon};
}

std::size_t uniform_count(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// k distinct values from 1..n, ascending.
std::vector<std::int64_t> choose_ids(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::int64_t> pool(n);
  std::iota(pool.begin(), pool.end(), 1);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + static_cast<std::size_t>(rng.below(n - i))]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// k distinct values from 1..n drawn sequentially with the given weights
// (weights[i] belongs to value i + 1), ascending.
std::vector<std::int64_t> choose_weighted(Rng& rng, std::vector<double> weights, std::size_t k) {
  std::vector<std::int64_t> out;
  double remaining = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t draw = 0; draw < k && remaining > 0.0; ++draw) {
    double x = rng.unit() * remaining;
    std::size_t pick = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      pick = i;
      if (x < weights[i]) break;
      x -= weights[i];
    }
    out.push_back(static_cast<std::int64_t>(pick + 1));
    remaining -= weights[pick];
    weights[pick] = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_params(const GeneratorParams& g) {
  if (g.users == 0 || g.boards == 0 || g.tags == 0) {
    throw InvalidInput("users, boards and tags must be positive");
  }
  if (g.advertiser_tags_min == 0 || g.advertiser_tags_min > g.advertiser_tags_max) {
    throw InvalidInput("advertiser tag range is empty");
  }
  if (g.records_min == 0 || g.records_min > g.records_max) {
    throw InvalidInput("record count range is empty");
  }
  if (g.user_tags_min > g.user_tags_max) throw InvalidInput("user tag range is empty");
  if (!(g.max_affinity > 0.0 && g.max_affinity <= 0.95)) {
    throw InvalidInput("max affinity must lie in (0, 0.95]");
  }
  if (g.slot_duration <= 0 || g.t2 <= g.t1 || (g.t2 - g.t1) % g.slot_duration != 0) {
    throw InvalidInput("slot duration must be positive and divide t2 - t1");
  }
  if (!(g.dwell_share >= 0.0 && g.dwell_share <= 1.0) || g.dwell_min < 60 ||
      g.dwell_min > g.dwell_max) {
    throw InvalidInput("dwell parameters out of range");
  }
  if (!(g.tag_zipf >= 0.0)) throw InvalidInput("tag popularity exponent must be non-negative");
  if (!(g.gamma > 0.0) || !(g.extent_m > 0.0)) {
    throw InvalidInput("gamma and extent must be positive");
  }
}

}  // namespace

std::size_t advertiser_count(const GeneratorParams& params) {
  if (!(params.alpha > 0.0) || !(params.beta > 0.0)) {
    throw InvalidInput("alpha and beta must be positive");
  }
  if (params.beta > params.alpha) throw InvalidInput("beta must not exceed alpha");
  const auto n = static_cast<std::size_t>(std::llround(params.alpha / params.beta));
  if (n < 1) throw InvalidInput("alpha / beta rounds to zero advertisers");
  return n;
}

void refresh_base_influence(Instance& instance, const InfluenceEngine& engine) {
  for (auto& s : instance.slots) s.base_influence = engine.slot_influence(s.id);
}

void assign_slot_costs(Instance& instance, Rng& rng) {
  for (auto& s : instance.slots) {
    const double tau = rng.uniform(0.9, 1.1);
    const double cents = std::floor(tau * s.base_influence / 10.0 * 100.0);
    s.cost = std::max(1.0, cents) / 100.0;
  }
}

Instance generate_instance(const GeneratorParams& g) {
  check_params(g);
  const std::size_t n_adv = advertiser_count(g);

  Instance in;
  in.horizon = {g.t1, g.t2, g.slot_duration};

  Rng world(derive_seed(g.seed, {kWorld}));
  const std::size_t n_streets = g.streets != 0 ? g.streets : std::max<std::size_t>(3, g.boards / 4);
  std::vector<Street> streets;
  for (std::size_t i = 0; i < n_streets; ++i) streets.push_back(random_street(world, g.extent_m));

  for (std::size_t b = 0; b < g.boards; ++b) {
    const auto& street = streets[b % n_streets];
    in.boards.push_back({BoardId{static_cast<std::int64_t>(b + 1)}, to_geo(g, street.at(world.unit()))});
  }

  std::vector<double> popularity(g.tags);
  for (std::size_t k = 0; k < g.tags; ++k) {
    popularity[k] = std::pow(static_cast<double>(k + 1), -g.tag_zipf);
  }

  const Timestamp max_duration = g.slot_duration;
  for (std::size_t u = 0; u < g.users; ++u) {
    const UserId uid{static_cast<std::int64_t>(u + 1)};
    const std::size_t home = static_cast<std::size_t>(world.below(n_streets));
    const std::size_t other = world.unit() < 0.3
                                  ? static_cast<std::size_t>(world.below(n_streets))
                                  : home;
    const std::size_t records = uniform_count(world, g.records_min, g.records_max);
    for (std::size_t r = 0; r < records; ++r) {
      const auto& street = streets[world.unit() < 0.5 ? home : other];
      Vec2 p = street.at(world.unit());
      p.x += world.uniform(-15.0, 15.0);
      p.y += world.uniform(-15.0, 15.0);
      const bool dwell = world.unit() < g.dwell_share;
      const Timestamp lo = dwell ? g.dwell_min : 60;
      const Timestamp hi = dwell ? g.dwell_max : std::max<Timestamp>(60, max_duration);
      const Timestamp duration =
          lo + static_cast<Timestamp>(world.below(static_cast<std::uint64_t>(hi - lo + 1)));
      const Timestamp span = std::max<Timestamp>(0, (g.t2 - g.t1) - duration);
      const Timestamp start = g.t1 + static_cast<Timestamp>(world.below(static_cast<std::uint64_t>(span + 1)));
      in.trajectories.push_back({uid, to_geo(g, p), {start, std::min(start + duration, g.t2)}});
    }

    const std::size_t n_tags = std::min(uniform_count(world, g.user_tags_min, g.user_tags_max), g.tags);
    for (auto t : choose_weighted(world, popularity, n_tags)) {
      in.affinities.push_back({uid, TagId{t}, world.uniform(0.05, g.max_affinity)});
    }
  }

  in.slots = derive_slots(in.boards, in.horizon);
  const InfluenceEngine engine(in, g.gamma);
  refresh_base_influence(in, engine);
  Rng costs(derive_seed(g.seed, {kCosts}));
  assign_slot_costs(in, costs);

  const double supply = engine.supply();
  if (!(supply > 0.0)) throw InvalidInput("generated world has zero influence supply");

  // Demands and payments are floored on a grid of 1/scale influence units;
  // the grid is refined until individual demands span at least 10 units and
  // the aggregate target at least 100.
  double scale = 1.0;
  while ((supply * g.beta * scale < 10.0 || supply * g.alpha * scale < 100.0) && scale < 1e9) {
    scale *= 10.0;
  }

  Rng adv_rng(derive_seed(g.seed, {kAdvertisers}));
  std::vector<double> psi(n_adv);
  std::vector<double> eta(n_adv);
  std::vector<std::vector<TagId>> tags(n_adv);
  for (std::size_t i = 0; i < n_adv; ++i) {
    psi[i] = adv_rng.uniform(0.8, 1.2);
    eta[i] = adv_rng.uniform(0.9, 1.1);
    const std::size_t count = std::min(
        uniform_count(adv_rng, g.advertiser_tags_min, g.advertiser_tags_max), g.tags);
    for (auto t : choose_ids(adv_rng, g.tags, count)) tags[i].push_back(TagId{t});
  }

  // Demand proportional to psi * supply * beta, rescaled so the total is
  // alpha * supply; leftover units go to the largest fractional parts.
  const double target_units = std::floor(g.alpha * supply * scale);
  const double psi_sum = std::accumulate(psi.begin(), psi.end(), 0.0);
  std::vector<double> units(n_adv);
  std::vector<std::pair<double, std::size_t>> fractions;
  double assigned = 0.0;
  for (std::size_t i = 0; i < n_adv; ++i) {
    const double ideal = psi[i] * target_units / psi_sum;
    units[i] = std::floor(ideal);
    assigned += units[i];
    fractions.emplace_back(ideal - units[i], i);
  }
  std::sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t k = 0; assigned < target_units && k < fractions.size(); ++k) {
    units[fractions[k].second] += 1.0;
    assigned += 1.0;
  }

  for (std::size_t i = 0; i < n_adv; ++i) {
    Advertiser a;
    a.id = AdvertiserId{static_cast<std::int64_t>(i + 1)};
    a.demand = units[i] / scale;
    a.payment = std::max(1.0, std::floor(eta[i] * units[i])) / scale;
    a.tags = std::move(tags[i]);
    in.advertisers.push_back(std::move(a));
  }
  return in;
}

}  // namespace trmoa
