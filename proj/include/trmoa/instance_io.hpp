#pragma once

// Synthetic instance generation, CSV ingestion, instance directories and the
// canonical allocation text format.
//
// Instance directory layout (all UTF-8, comma separated, header row):
//
//   trajectories.csv  user_id,lat,lon,t_start,t_end
//   affinities.csv    user_id,tag_id,prob
//   billboards.csv    board_id,lat,lon
//   slots.csv         slot_id,board_id,t_start,t_end,cost,base_influence
//   advertisers.csv   adv_id,demand,payment,tags        (tags joined by ';')
//   manifest.txt      key=value lines; t1, t2 and slot_duration are required

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trmoa/allocators.hpp"
#include "trmoa/influence.hpp"
#include "trmoa/model.hpp"
#include "trmoa/rng.hpp"

namespace trmoa {

struct GeneratorParams {
  // Total demand over total single-slot influence supply.
  double alpha = 1.0;
  // Average single-advertiser demand over supply; advertisers = round(alpha / beta).
  double beta = 0.05;
  std::size_t users = 200;
  std::size_t boards = 30;
  std::size_t tags = 50;
  // Per-advertiser tag count range, clipped to the tag universe.
  std::size_t advertiser_tags_min = 100;
  std::size_t advertiser_tags_max = 500;
  Timestamp t1 = 0;
  Timestamp t2 = 48 * 1800;
  Timestamp slot_duration = 1800;
  double gamma = 100.0;
  std::uint64_t seed = 42;

  // Street geometry around a city centre.
  double center_lat = 40.7580;
  double center_lon = -73.9855;
  double extent_m = 3000.0;
  // Zero picks max(3, boards / 4).
  std::size_t streets = 0;
  std::size_t records_min = 3;
  std::size_t records_max = 8;
  // Share of records that are long stays of dwell_min..dwell_max seconds;
  // the rest last 60 seconds to one slot duration.
  double dwell_share = 0.3;
  Timestamp dwell_min = 3600;
  Timestamp dwell_max = 4 * 3600;
  std::size_t user_tags_min = 3;
  std::size_t user_tags_max = 8;
  double max_affinity = 0.95;
  // User tags are drawn without replacement with weight 1 / rank^tag_zipf,
  // tag 1 being the most popular; zero gives uniform popularity.
  double tag_zipf = 1.0;
};

// round(alpha / beta); throws InvalidInput for infeasible parameters.
std::size_t advertiser_count(const GeneratorParams& params);

// Pure function of params (including the seed). Users, boards and affinities
// depend only on the seed and geometry fields, so sweeping alpha or beta with
// a fixed seed keeps the same world and redraws only the advertisers.
Instance generate_instance(const GeneratorParams& params);

// Recomputes every slot's base influence from the engine.
void refresh_base_influence(Instance& instance, const InfluenceEngine& engine);

// Slot cost floor(tau * influence / 10) with tau ~ U[0.9, 1.1], floored at
// cent resolution and never below 0.01.
void assign_slot_costs(Instance& instance, Rng& rng);

// --- CSV readers; `name` labels parse errors. -------------------------------

std::vector<TrajectoryRecord> read_trajectories(std::istream& in, const std::string& name);
std::vector<TagAffinity> read_affinities(std::istream& in, const std::string& name);
std::vector<Billboard> read_billboards(std::istream& in, const std::string& name);
std::vector<Advertiser> read_advertisers(std::istream& in, const std::string& name);
// Slot locations are filled in from `boards`.
std::vector<BillboardSlot> read_slots(std::istream& in, const std::string& name,
                                      const std::vector<Billboard>& boards);

void write_trajectories(std::ostream& out, const std::vector<TrajectoryRecord>& rows);
void write_affinities(std::ostream& out, const std::vector<TagAffinity>& rows);
void write_billboards(std::ostream& out, const std::vector<Billboard>& rows);
void write_advertisers(std::ostream& out, const std::vector<Advertiser>& rows);
void write_slots(std::ostream& out, const std::vector<BillboardSlot>& rows);

using Manifest = std::map<std::string, std::string>;

void save_instance(const Instance& instance, const std::filesystem::path& dir,
                   const Manifest& extra = {});
Instance load_instance(const std::filesystem::path& dir, Manifest* manifest = nullptr);

Manifest read_manifest(std::istream& in, const std::string& name);
void write_manifest(std::ostream& out, const Manifest& manifest);

struct IngestPaths {
  std::filesystem::path trajectories;
  std::filesystem::path affinities;
  std::filesystem::path billboards;
  std::filesystem::path advertisers;
};

struct IngestOptions {
  // Defaults: earliest record start, and the first tile boundary at or
  // after the latest record end.
  std::optional<Timestamp> t1;
  std::optional<Timestamp> t2;
  Timestamp slot_duration = 3600;
  double gamma = 100.0;
  std::uint64_t seed = 1;
  // Boards with no trajectory point within gamma are dropped unless set.
  bool keep_unseen_boards = false;
};

struct IngestReport {
  Instance instance;
  ValidationResult validation;
  std::size_t dropped_trajectory_rows = 0;
  std::size_t dropped_users = 0;
  std::size_t dropped_affinities = 0;
  std::size_t dropped_boards = 0;
  std::vector<std::string> log;
};

// Throws ParseError naming file and line for malformed rows and id collisions.
IngestReport ingest_csv(const IngestPaths& paths, const IngestOptions& options);

// --- Allocation documents -------------------------------------------------

struct AllocationRow {
  AdvertiserId advertiser;
  TagId tag;
  SlotId slot;

  friend auto operator<=>(const AllocationRow&, const AllocationRow&) = default;
};

struct AdvertiserSummary {
  AdvertiserId advertiser;
  double demand{};
  double payment{};
  double achieved{};
  double regret{};
  RegretKind kind = RegretKind::zero;
};

struct AllocationDocument {
  std::vector<AllocationRow> rows;
  std::vector<SlotId> unassigned;
  std::vector<AdvertiserSummary> advertisers;
  double total_regret{};
  double excessive_regret{};
  double unsatisfied_regret{};
  std::size_t satisfied_advertisers{};
};

AllocationDocument make_document(const Allocation& alloc, const RegretReport& report,
                                 const Instance& instance);
// Deterministic text: rows sorted by (advertiser, tag, slot), doubles in
// shortest round-trip form.
std::string serialize_allocation(const AllocationDocument& doc);
std::string serialize_allocation(const Allocation& alloc, const RegretReport& report,
                                 const Instance& instance);
AllocationDocument parse_allocation(std::string_view text);

// One row per trace event.
void write_trace_csv(std::ostream& out, const RunTrace& trace, const Instance& instance);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace trmoa
