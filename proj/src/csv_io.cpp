#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "trmoa/error.hpp"
#include "trmoa/instance_io.hpp"

namespace trmoa {

namespace {

constexpr std::string_view kManifestFormat = "trmoa-instance-1";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Line-oriented reader that skips blank lines and tracks 1-based numbers.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name, std::vector<std::string_view> header)
      : in_(in), name_(std::move(name)) {
    if (!next_line()) fail("missing header row");
    const auto got = split(line_, ',');
    if (got != header) {
      std::string expected;
      for (std::size_t i = 0; i < header.size(); ++i) {
        expected += (i ? "," : "");
        expected += header[i];
      }
      fail("expected header '" + expected + "'");
    }
    width_ = header.size();
  }

  // False at end of input.
  bool next(std::vector<std::string_view>& fields) {
    if (!next_line()) return false;
    fields = split(line_, ',');
    if (fields.size() != width_) {
      fail("expected " + std::to_string(width_) + " fields, got " + std::to_string(fields.size()));
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(name_, number_, what); }

  std::int64_t integer(std::string_view text, std::string_view field) const {
    std::int64_t v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      fail("invalid integer in " + std::string(field) + ": '" + std::string(text) + "'");
    }
    return v;
  }

  double real(std::string_view text, std::string_view field) const {
    double v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail("invalid number in " + std::string(field) + ": '" + std::string(text) + "'");
    }
    return v;
  }

  std::size_t line_number() const noexcept { return number_; }

 private:
  bool next_line() {
    while (std::getline(in_, line_)) {
      ++number_;
      if (!trim(line_).empty()) return true;
    }
    return false;
  }

  std::istream& in_;
  std::string name_;
  std::string line_;
  std::size_t number_ = 0;
  std::size_t width_ = 0;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <class Reader>
auto read_file(const std::filesystem::path& path, Reader reader) {
  auto in = open_in(path);
  return reader(in, path.string());
}

}  // namespace

std::vector<TrajectoryRecord> read_trajectories(std::istream& in, const std::string& name) {
  CsvReader r(in, name, {"user_id", "lat", "lon", "t_start", "t_end"});
  std::vector<TrajectoryRecord> rows;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    rows.push_back({UserId{r.integer(f[0], "user_id")},
                    {r.real(f[1], "lat"), r.real(f[2], "lon")},
                    {r.integer(f[3], "t_start"), r.integer(f[4], "t_end")}});
  }
  return rows;
}

std::vector<TagAffinity> read_affinities(std::istream& in, const std::string& name) {
  CsvReader r(in, name, {"user_id", "tag_id", "prob"});
  std::vector<TagAffinity> rows;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    const UserId user{r.integer(f[0], "user_id")};
    const TagId tag{r.integer(f[1], "tag_id")};
    const double p = r.real(f[2], "prob");
    if (p < 0.0 || p > 1.0) r.fail("probability out of range: " + std::string(f[2]));
    if (!seen.insert({user.value, tag.value}).second) {
      r.fail("duplicate affinity for user " + std::to_string(user.value) + " tag " +
             std::to_string(tag.value));
    }
    rows.push_back({user, tag, p});
  }
  return rows;
}

std::vector<Billboard> read_billboards(std::istream& in, const std::string& name) {
  CsvReader r(in, name, {"board_id", "lat", "lon"});
  std::vector<Billboard> rows;
  std::unordered_set<BoardId> seen;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    const BoardId id{r.integer(f[0], "board_id")};
    if (!seen.insert(id).second) r.fail("duplicate board id " + std::to_string(id.value));
    rows.push_back({id, {r.real(f[1], "lat"), r.real(f[2], "lon")}});
  }
  return rows;
}

std::vector<Advertiser> read_advertisers(std::istream& in, const std::string& name) {
  CsvReader r(in, name, {"adv_id", "demand", "payment", "tags"});
  std::vector<Advertiser> rows;
  std::unordered_set<AdvertiserId> seen;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    Advertiser a;
    a.id = AdvertiserId{r.integer(f[0], "adv_id")};
    if (!seen.insert(a.id).second) r.fail("duplicate advertiser id " + std::to_string(a.id.value));
    a.demand = r.real(f[1], "demand");
    a.payment = r.real(f[2], "payment");
    if (!f[3].empty()) {
      for (auto t : split(f[3], ';')) a.tags.push_back(TagId{r.integer(t, "tags")});
    }
    rows.push_back(std::move(a));
  }
  return rows;
}

std::vector<BillboardSlot> read_slots(std::istream& in, const std::string& name,
                                      const std::vector<Billboard>& boards) {
  std::unordered_map<BoardId, GeoPoint> where;
  for (const auto& b : boards) where.emplace(b.id, b.location);
  CsvReader r(in, name, {"slot_id", "board_id", "t_start", "t_end", "cost", "base_influence"});
  std::vector<BillboardSlot> rows;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    BillboardSlot s;
    s.id = SlotId{r.integer(f[0], "slot_id")};
    if (s.id.value != static_cast<std::int64_t>(rows.size())) {
      r.fail("slot ids must be dense and ascending from 0");
    }
    s.board = BoardId{r.integer(f[1], "board_id")};
    const auto it = where.find(s.board);
    if (it == where.end()) r.fail("unknown board id " + std::to_string(s.board.value));
    s.location = it->second;
    s.window = {r.integer(f[2], "t_start"), r.integer(f[3], "t_end")};
    s.cost = r.real(f[4], "cost");
    s.base_influence = r.real(f[5], "base_influence");
    rows.push_back(s);
  }
  return rows;
}

void write_trajectories(std::ostream& out, const std::vector<TrajectoryRecord>& rows) {
  out << "user_id,lat,lon,t_start,t_end\n";
  for (const auto& r : rows) {
    out << r.user.value << ',' << format_double(r.location.lat) << ','
        << format_double(r.location.lon) << ',' << r.interval.start << ',' << r.interval.end
        << '\n';
  }
}

void write_affinities(std::ostream& out, const std::vector<TagAffinity>& rows) {
  out << "user_id,tag_id,prob\n";
  for (const auto& r : rows) {
    out << r.user.value << ',' << r.tag.value << ',' << format_double(r.prob) << '\n';
  }
}

void write_billboards(std::ostream& out, const std::vector<Billboard>& rows) {
  out << "board_id,lat,lon\n";
  for (const auto& b : rows) {
    out << b.id.value << ',' << format_double(b.location.lat) << ','
        << format_double(b.location.lon) << '\n';
  }
}

void write_advertisers(std::ostream& out, const std::vector<Advertiser>& rows) {
  out << "adv_id,demand,payment,tags\n";
  for (const auto& a : rows) {
    out << a.id.value << ',' << format_double(a.demand) << ',' << format_double(a.payment) << ',';
    for (std::size_t i = 0; i < a.tags.size(); ++i) out << (i ? ";" : "") << a.tags[i].value;
    out << '\n';
  }
}

void write_slots(std::ostream& out, const std::vector<BillboardSlot>& rows) {
  out << "slot_id,board_id,t_start,t_end,cost,base_influence\n";
  for (const auto& s : rows) {
    out << s.id.value << ',' << s.board.value << ',' << s.window.start << ',' << s.window.end
        << ',' << format_double(s.cost) << ',' << format_double(s.base_influence) << '\n';
  }
}

Manifest read_manifest(std::istream& in, const std::string& name) {
  Manifest m;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(name, number, "expected key=value");
    m[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
  }
  return m;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const auto& [k, v] : manifest) out << k << '=' << v << '\n';
}

void save_instance(const Instance& instance, const std::filesystem::path& dir,
                   const Manifest& extra) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  { auto o = open_out(dir / "trajectories.csv"); write_trajectories(o, instance.trajectories); }
  { auto o = open_out(dir / "affinities.csv"); write_affinities(o, instance.affinities); }
  { auto o = open_out(dir / "billboards.csv"); write_billboards(o, instance.boards); }
  { auto o = open_out(dir / "slots.csv"); write_slots(o, instance.slots); }
  { auto o = open_out(dir / "advertisers.csv"); write_advertisers(o, instance.advertisers); }

  Manifest m = extra;
  m["format"] = std::string(kManifestFormat);
  m["t1"] = std::to_string(instance.horizon.t1);
  m["t2"] = std::to_string(instance.horizon.t2);
  m["slot_duration"] = std::to_string(instance.horizon.slot_duration);
  auto o = open_out(dir / "manifest.txt");
  write_manifest(o, m);
  if (!o) throw IoError("write failed for " + (dir / "manifest.txt").string());
}

Instance load_instance(const std::filesystem::path& dir, Manifest* manifest) {
  const auto mpath = dir / "manifest.txt";
  auto min = open_in(mpath);
  const Manifest m = read_manifest(min, mpath.string());
  auto get = [&](const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw ParseError(mpath.string(), 0, "missing key '" + key + "'");
    std::int64_t v{};
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ParseError(mpath.string(), 0, "invalid integer for '" + key + "'");
    }
    return v;
  };
  if (auto it = m.find("format"); it != m.end() && it->second != kManifestFormat) {
    throw ParseError(mpath.string(), 0, "unsupported format '" + it->second + "'");
  }

  Instance in;
  in.horizon = {get("t1"), get("t2"), get("slot_duration")};
  in.trajectories = read_file(dir / "trajectories.csv", read_trajectories);
  in.affinities = read_file(dir / "affinities.csv", read_affinities);
  in.boards = read_file(dir / "billboards.csv", read_billboards);
  in.advertisers = read_file(dir / "advertisers.csv", read_advertisers);
  const auto spath = dir / "slots.csv";
  if (std::filesystem::exists(spath)) {
    auto sin = open_in(spath);
    in.slots = read_slots(sin, spath.string(), in.boards);
  } else {
    in.slots = derive_slots(in.boards, in.horizon);
  }
  if (manifest) *manifest = m;
  return in;
}

IngestReport ingest_csv(const IngestPaths& paths, const IngestOptions& options) {
  if (options.slot_duration <= 0) throw InvalidInput("slot duration must be positive");
  if (!(options.gamma > 0.0)) throw InvalidInput("gamma must be positive");

  IngestReport rep;
  auto raw_traj = read_file(paths.trajectories, read_trajectories);
  auto raw_aff = read_file(paths.affinities, read_affinities);
  auto boards = read_file(paths.billboards, read_billboards);
  auto advertisers = read_file(paths.advertisers, read_advertisers);

  // Rows that can never expose anyone: bad coordinates or reversed intervals.
  std::vector<TrajectoryRecord> traj;
  std::set<UserId> raw_users;
  for (const auto& r : raw_traj) {
    raw_users.insert(r.user);
    const bool coords = std::abs(r.location.lat) <= 90.0 && std::abs(r.location.lon) <= 180.0;
    if (coords && r.interval.start <= r.interval.end) {
      traj.push_back(r);
    } else {
      ++rep.dropped_trajectory_rows;
    }
  }
  if (traj.empty()) throw InvalidInput("no usable trajectory rows in " + paths.trajectories.string());

  Timestamp lo = traj.front().interval.start;
  Timestamp hi = traj.front().interval.end;
  for (const auto& r : traj) {
    lo = std::min(lo, r.interval.start);
    hi = std::max(hi, r.interval.end);
  }
  const Timestamp d = options.slot_duration;
  const Timestamp t1 = options.t1.value_or(lo);
  Timestamp t2 = options.t2.value_or(0);
  if (!options.t2) {
    t2 = t1 + std::max<Timestamp>(1, (hi - t1 + d - 1) / d) * d;
  }
  if (t2 <= t1 || (t2 - t1) % d != 0) {
    throw InvalidInput("slot duration must divide the horizon [" + std::to_string(t1) + ", " +
                       std::to_string(t2) + "]");
  }

  // Clip to the horizon; rows entirely outside it are dropped.
  std::vector<TrajectoryRecord> kept;
  for (auto r : traj) {
    if (r.interval.end < t1 || r.interval.start > t2) {
      ++rep.dropped_trajectory_rows;
      continue;
    }
    r.interval.start = std::max(r.interval.start, t1);
    r.interval.end = std::min(r.interval.end, t2);
    kept.push_back(r);
  }
  std::set<UserId> users;
  for (const auto& r : kept) users.insert(r.user);
  rep.dropped_users = raw_users.size() - users.size();

  for (const auto& a : raw_aff) {
    if (!users.contains(a.user)) {
      ++rep.dropped_affinities;
      continue;
    }
    rep.instance.affinities.push_back(a);
  }

  if (!options.keep_unseen_boards) {
    std::vector<Billboard> seen;
    for (const auto& b : boards) {
      const bool near = std::any_of(kept.begin(), kept.end(), [&](const TrajectoryRecord& r) {
        return haversine_meters(r.location, b.location) <= options.gamma;
      });
      if (near) {
        seen.push_back(b);
      } else {
        ++rep.dropped_boards;
      }
    }
    boards = std::move(seen);
  }

  rep.instance.horizon = {t1, t2, d};
  rep.instance.trajectories = std::move(kept);
  rep.instance.boards = std::move(boards);
  rep.instance.advertisers = std::move(advertisers);
  rep.instance.slots = derive_slots(rep.instance.boards, rep.instance.horizon);

  const InfluenceEngine engine(rep.instance, options.gamma);
  refresh_base_influence(rep.instance, engine);
  Rng rng(options.seed);
  assign_slot_costs(rep.instance, rng);

  rep.validation = validate_instance(rep.instance);
  auto note = [&](std::string_view what, std::size_t n) {
    if (n) rep.log.push_back("dropped " + std::to_string(n) + " " + std::string(what));
  };
  note("trajectory rows", rep.dropped_trajectory_rows);
  note("users", rep.dropped_users);
  note("affinities", rep.dropped_affinities);
  note("boards", rep.dropped_boards);
  rep.log.push_back("horizon [" + std::to_string(t1) + ", " + std::to_string(t2) + "] in " +
                    std::to_string(rep.instance.horizon.slots_per_board()) + " slots per board");
  return rep;
}

}  // namespace trmoa
