#include <gtest/gtest.h>

#include "support.hpp"
#include "trmoa/error.hpp"
#include "trmoa/model.hpp"

using namespace trmoa;

namespace {

bool has_kind(const ValidationResult& v, const std::string& kind) {
  for (const auto& x : v.violations) {
    if (x.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST(DeriveSlots, TilesHorizonBoardMajor) {
  const std::vector<Billboard> boards = {{BoardId{7}, {1, 2}}, {BoardId{3}, {3, 4}}};
  const auto slots = derive_slots(boards, {100, 400, 100});
  ASSERT_EQ(slots.size(), 6u);
  for (std::size_t k = 0; k < slots.size(); ++k) EXPECT_EQ(slots[k].id.value, static_cast<std::int64_t>(k));
  EXPECT_EQ(slots[0].board, BoardId{7});
  EXPECT_EQ(slots[3].board, BoardId{3});
  EXPECT_EQ(slots[2].window.start, 300);
  EXPECT_EQ(slots[2].window.end, 400);
  EXPECT_EQ(slots[4].location.lat, 3.0);
  EXPECT_EQ(slots[0].cost, 0.0);
}

TEST(DeriveSlots, RejectsUnevenTiling) {
  const std::vector<Billboard> boards = {{BoardId{1}, {0, 0}}};
  EXPECT_THROW(derive_slots(boards, {0, 250, 100}), InvalidInput);
  EXPECT_THROW(derive_slots(boards, {0, 200, 0}), InvalidInput);
  EXPECT_TRUE(derive_slots(boards, {0, 0, 100}).empty());
}

TEST(TimeInterval, ClosedOverlap) {
  EXPECT_TRUE((TimeInterval{0, 10}.overlaps({10, 20})));
  EXPECT_FALSE((TimeInterval{0, 9}.overlaps({10, 20})));
  EXPECT_TRUE((TimeInterval{5, 5}.overlaps({0, 10})));
}

TEST(Validate, FixturesAreClean) {
  EXPECT_TRUE(validate_instance(fixtures::worked_example()).ok());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    EXPECT_TRUE(validate_instance(fixtures::random_micro(seed)).ok()) << seed;
  }
}

TEST(Validate, ReportsEachViolationKind) {
  auto in = fixtures::worked_example();
  in.trajectories.push_back({UserId{1}, {95.0, 0.0}, {0, 10}});
  in.trajectories.push_back({UserId{2}, {0.0, 0.0}, {50, 40}});
  in.trajectories.push_back({UserId{3}, {0.0, 0.0}, {50, 400}});
  in.affinities.push_back({UserId{1}, TagId{1}, 0.3});
  in.affinities.push_back({UserId{999}, TagId{1}, 1.5});
  in.slots[1].cost = -1.0;
  in.slots[2].base_influence = std::numeric_limits<double>::quiet_NaN();
  in.slots[3].window.end += 1;
  in.advertisers.push_back({AdvertiserId{1}, 0.0, 0.0, {}});
  in.advertisers.push_back({AdvertiserId{8}, 1.0, 1.0, {TagId{2}, TagId{2}}});
  const auto v = validate_instance(in);
  for (const char* kind : {"coordinates", "interval", "probability", "duplicate", "dangling", "cost",
                           "influence", "tiling", "demand", "payment", "tags"}) {
    EXPECT_TRUE(has_kind(v, kind)) << kind;
  }
}

TEST(Validate, HorizonAndSlotIds) {
  auto in = fixtures::worked_example();
  in.horizon.slot_duration = 30;
  EXPECT_TRUE(has_kind(validate_instance(in), "horizon"));
  in = fixtures::worked_example();
  std::swap(in.slots[0], in.slots[1]);
  EXPECT_TRUE(has_kind(validate_instance(in), "slot id"));
  in = fixtures::worked_example();
  in.slots[0].board = BoardId{42};
  EXPECT_TRUE(has_kind(validate_instance(in), "dangling"));
}

TEST(Allocation, AssignAndBuckets) {
  Allocation a(2, 4);
  a.assign(0, TagId{5}, SlotId{2});
  a.assign(0, TagId{1}, SlotId{0});
  a.assign(0, TagId{5}, SlotId{3});
  EXPECT_EQ(a.of(0).slots, (std::vector<SlotId>{SlotId{2}, SlotId{0}, SlotId{3}}));
  EXPECT_EQ(a.of(0).buckets.at(TagId{5}), (std::vector<SlotId>{SlotId{2}, SlotId{3}}));
  EXPECT_EQ(a.allocated_count(), 3u);
  EXPECT_EQ(a.unassigned(), std::vector<SlotId>{SlotId{1}});
  EXPECT_THROW(a.assign(1, TagId{1}, SlotId{4}), InvalidInput);
  EXPECT_THROW(a.assign(2, TagId{1}, SlotId{1}), std::out_of_range);
}

TEST(RegretKind, Names) {
  for (auto k : {RegretKind::zero, RegretKind::excessive, RegretKind::unsatisfied}) {
    EXPECT_EQ(regret_kind_from_string(to_string(k)), k);
  }
  EXPECT_FALSE(regret_kind_from_string("bogus").has_value());
}
