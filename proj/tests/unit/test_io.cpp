#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "trmoa/allocators.hpp"
#include "trmoa/error.hpp"
#include "trmoa/instance_io.hpp"

using namespace trmoa;
namespace fs = std::filesystem;

namespace {

std::size_t parse_line(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Instance small_generated() {
  GeneratorParams g;
  g.users = 40;
  g.boards = 5;
  g.t2 = 6 * 1800;
  g.beta = 0.2;
  g.seed = 77;
  return generate_instance(g);
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e21), "1e+21");
  for (double v : {1.0 / 3.0, 12.0 / 7.0, 123456.789, 5e-324}) {
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(CsvReaders, ParseErrorsCarryLineNumbers) {
  std::istringstream bad_header("user,lat,lon,t_start,t_end\n");
  EXPECT_EQ(parse_line([&] { read_trajectories(bad_header, "t.csv"); }), 1u);

  std::istringstream short_row("user_id,lat,lon,t_start,t_end\n1,2,3,4,5\n1,2,3\n");
  EXPECT_EQ(parse_line([&] { read_trajectories(short_row, "t.csv"); }), 3u);

  std::istringstream bad_number("user_id,tag_id,prob\n1,2,0.5\n1,3,abc\n");
  EXPECT_EQ(parse_line([&] { read_affinities(bad_number, "a.csv"); }), 3u);

  std::istringstream prob("user_id,tag_id,prob\n1,2,1.5\n");
  EXPECT_EQ(parse_line([&] { read_affinities(prob, "a.csv"); }), 2u);

  std::istringstream dup_aff("user_id,tag_id,prob\n1,2,0.5\n1,2,0.4\n");
  EXPECT_EQ(parse_line([&] { read_affinities(dup_aff, "a.csv"); }), 3u);

  std::istringstream dup_board("board_id,lat,lon\n1,0,0\n2,0,0\n1,1,1\n");
  EXPECT_EQ(parse_line([&] { read_billboards(dup_board, "b.csv"); }), 4u);

  std::istringstream dup_adv("adv_id,demand,payment,tags\n1,2,3,4\n1,2,3,5\n");
  EXPECT_EQ(parse_line([&] { read_advertisers(dup_adv, "v.csv"); }), 3u);
}

TEST(CsvReaders, ErrorMessageNamesFile) {
  std::istringstream in("user_id,tag_id,prob\nx,1,0.1\n");
  try {
    read_affinities(in, "aff.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), "aff.csv");
    EXPECT_NE(std::string(e.what()).find("aff.csv:2"), std::string::npos);
  }
}

TEST(CsvReaders, AdvertiserTagsSplitOnSemicolon) {
  std::istringstream in("adv_id,demand,payment,tags\n4,2.5,7,3;1;9\n");
  const auto a = read_advertisers(in, "v.csv");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].tags, (std::vector<TagId>{TagId{3}, TagId{1}, TagId{9}}));
  EXPECT_EQ(a[0].demand, 2.5);
}

TEST(CsvReaders, SlotsMustBeDenseAndKnown) {
  const std::vector<Billboard> boards = {{BoardId{1}, {0, 0}}};
  std::istringstream gap(
      "slot_id,board_id,t_start,t_end,cost,base_influence\n0,1,0,10,1,1\n2,1,10,20,1,1\n");
  EXPECT_EQ(parse_line([&] { read_slots(gap, "s.csv", boards); }), 3u);
  std::istringstream unknown("slot_id,board_id,t_start,t_end,cost,base_influence\n0,5,0,10,1,1\n");
  EXPECT_EQ(parse_line([&] { read_slots(unknown, "s.csv", boards); }), 2u);
}

TEST(Manifest, KeyValueWithComments) {
  std::istringstream in("# comment\nt1=0\n\nformat=trmoa-instance-1\n");
  const auto m = read_manifest(in, "manifest.txt");
  EXPECT_EQ(m.at("t1"), "0");
  EXPECT_EQ(m.size(), 2u);
  std::istringstream bad("t1 0\n");
  EXPECT_EQ(parse_line([&] { read_manifest(bad, "manifest.txt"); }), 1u);
}

TEST(InstanceDir, SaveLoadIsAFixpoint) {
  const fixtures::TempDir a("io_a"), b("io_b");
  const auto in = small_generated();
  save_instance(in, a.path(), {{"source", "test"}});
  Manifest m;
  const auto back = load_instance(a.path(), &m);
  EXPECT_EQ(m.at("source"), "test");
  EXPECT_EQ(back.slots.size(), in.slots.size());
  EXPECT_EQ(back.advertisers.size(), in.advertisers.size());
  save_instance(back, b.path(), m);
  for (const char* f : {"trajectories.csv", "affinities.csv", "billboards.csv", "slots.csv",
                        "advertisers.csv", "manifest.txt"}) {
    EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
  }
  // Solving the reloaded instance gives the same allocation.
  SolverConfig cfg;
  EXPECT_EQ(serialize_allocation(solve(in, cfg).allocation, solve(in, cfg).report, in),
            serialize_allocation(solve(back, cfg).allocation, solve(back, cfg).report, back));
}

TEST(InstanceDir, MissingSlotsAreDerived) {
  const fixtures::TempDir d("io_noslots");
  save_instance(fixtures::worked_example(), d.path());
  fs::remove(d.path() / "slots.csv");
  const auto back = load_instance(d.path());
  EXPECT_EQ(back.slots.size(), 5u);
  EXPECT_EQ(back.slots[0].cost, 0.0);
}

TEST(InstanceDir, MissingManifestKeyIsAnError) {
  const fixtures::TempDir d("io_manifest");
  save_instance(fixtures::worked_example(), d.path());
  write_file(d.path() / "manifest.txt", "format=trmoa-instance-1\nt1=0\n");
  EXPECT_THROW(load_instance(d.path()), ParseError);
  EXPECT_THROW(load_instance(d.path() / "nope"), Error);
}

TEST(AllocationText, SerializeParseFixpoint) {
  const auto in = small_generated();
  for (auto a : {Algorithm::bg, Algorithm::random}) {
    SolverConfig cfg;
    cfg.algorithm = a;
    const auto r = solve(in, cfg);
    const auto text = serialize_allocation(r.allocation, r.report, in);
    const auto doc = parse_allocation(text);
    EXPECT_EQ(serialize_allocation(doc), text);
    EXPECT_EQ(doc.total_regret, r.report.total);
    EXPECT_EQ(doc.rows.size(), r.allocation.allocated_count());
    EXPECT_EQ(doc.unassigned, r.leftover);
    EXPECT_TRUE(std::is_sorted(doc.rows.begin(), doc.rows.end()));
  }
}

TEST(AllocationText, StrictParser) {
  const auto in = fixtures::worked_example();
  const auto r = solve(in, SolverConfig{});
  const auto text = serialize_allocation(r.allocation, r.report, in);
  EXPECT_THROW(parse_allocation("hello\n"), ParseError);
  EXPECT_THROW(parse_allocation(text + "[extra]\n"), ParseError);
  EXPECT_THROW(parse_allocation(text + "bogus=1\n"), ParseError);
  const auto cut = text.substr(0, text.find("satisfied_advertisers"));
  EXPECT_THROW(parse_allocation(cut), ParseError);
}

TEST(TraceCsv, OneRowPerEvent) {
  const auto in = small_generated();
  const auto r = solve(in, SolverConfig{});
  std::ostringstream out;
  write_trace_csv(out, r.trace, in);
  const auto text = out.str();
  EXPECT_EQ(text.rfind("step,kind,adv_id,tag_pointer,tag_id,slot_id,score,remaining_demand\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')),
            r.trace.events.size() + 1);
}

TEST(Ingest, CleansAndDerives) {
  const fixtures::TempDir d("ingest");
  write_file(d.path() / "t.csv",
             "user_id,lat,lon,t_start,t_end\n"
             "1,40.0,-74.0,100,400\n"
             "1,40.0,-74.0,5000,5100\n"
             "2,40.0005,-74.0,3000,3600\n"
             "3,95.0,-74.0,100,200\n"
             "4,40.0,-74.0,900,800\n");
  write_file(d.path() / "a.csv",
             "user_id,tag_id,prob\n1,1,0.5\n2,1,0.25\n3,1,0.9\n9,2,0.1\n");
  write_file(d.path() / "b.csv", "board_id,lat,lon\n10,40.0,-74.0\n11,41.0,-74.0\n");
  write_file(d.path() / "v.csv", "adv_id,demand,payment,tags\n1,0.5,3,1\n");

  IngestOptions opt;
  opt.slot_duration = 1000;
  const auto rep = ingest_csv({d.path() / "t.csv", d.path() / "a.csv", d.path() / "b.csv",
                               d.path() / "v.csv"},
                              opt);
  EXPECT_TRUE(rep.validation.ok());
  EXPECT_EQ(rep.dropped_trajectory_rows, 2u);
  EXPECT_EQ(rep.dropped_users, 2u);
  EXPECT_EQ(rep.dropped_affinities, 2u);
  EXPECT_EQ(rep.dropped_boards, 1u);
  // Earliest start 100; the latest end 5100 rounds up to 100 + 5 * 1000.
  EXPECT_EQ(rep.instance.horizon.t1, 100);
  EXPECT_EQ(rep.instance.horizon.t2, 5100);
  EXPECT_EQ(rep.instance.slots.size(), 5u);
  EXPECT_NEAR(rep.instance.slots[0].base_influence, 0.5, 1e-12);
  for (const auto& s : rep.instance.slots) EXPECT_GE(s.cost, 0.01);
  EXPECT_FALSE(rep.log.empty());

  opt.t1 = 0;
  opt.t2 = 2000;
  opt.keep_unseen_boards = true;
  const auto clipped = ingest_csv({d.path() / "t.csv", d.path() / "a.csv", d.path() / "b.csv",
                                   d.path() / "v.csv"},
                                  opt);
  EXPECT_EQ(clipped.instance.boards.size(), 2u);
  EXPECT_EQ(clipped.instance.slots.size(), 4u);
  for (const auto& r : clipped.instance.trajectories) EXPECT_LE(r.interval.end, 2000);

  opt.t2 = 2500;
  EXPECT_THROW(ingest_csv({d.path() / "t.csv", d.path() / "a.csv", d.path() / "b.csv",
                           d.path() / "v.csv"},
                          opt),
               InvalidInput);
}

TEST(Ingest, MalformedRowNamesFileAndLine) {
  const fixtures::TempDir d("ingest_bad");
  write_file(d.path() / "t.csv", "user_id,lat,lon,t_start,t_end\n1,40,-74,0,10\n2,40,-74,zz,10\n");
  write_file(d.path() / "a.csv", "user_id,tag_id,prob\n");
  write_file(d.path() / "b.csv", "board_id,lat,lon\n");
  write_file(d.path() / "v.csv", "adv_id,demand,payment,tags\n");
  try {
    ingest_csv({d.path() / "t.csv", d.path() / "a.csv", d.path() / "b.csv", d.path() / "v.csv"}, {});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(e.file().find("t.csv"), std::string::npos);
  }
}
