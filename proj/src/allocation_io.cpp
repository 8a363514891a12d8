#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "trmoa/error.hpp"
#include "trmoa/instance_io.hpp"

namespace trmoa {

namespace {

constexpr std::string_view kMagic = "# trmoa allocation v1";

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

class Parser {
 public:
  explicit Parser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("<allocation>", line_, what);
  }

  std::int64_t integer(std::string_view s) const {
    std::int64_t v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
      fail("invalid integer '" + std::string(s) + "'");
    }
    return v;
  }

  double real(std::string_view s) const {
    double v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
      fail("invalid number '" + std::string(s) + "'");
    }
    return v;
  }

 private:
  std::size_t line_;
};

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("cannot format double");
  return std::string(buf, p);
}

AllocationDocument make_document(const Allocation& alloc, const RegretReport& report,
                                 const Instance& instance) {
  if (alloc.advertiser_count() != instance.advertisers.size() ||
      report.per_advertiser.size() != instance.advertisers.size()) {
    throw InvalidInput("allocation and report must cover every advertiser");
  }
  AllocationDocument doc;
  for (std::size_t i = 0; i < alloc.advertiser_count(); ++i) {
    for (const auto& [tag, slots] : alloc.of(i).buckets) {
      for (auto s : slots) doc.rows.push_back({instance.advertisers[i].id, tag, s});
    }
    const auto& adv = instance.advertisers[i];
    const auto& r = report.per_advertiser[i];
    doc.advertisers.push_back({adv.id, adv.demand, adv.payment, r.achieved, r.value, r.kind});
  }
  std::sort(doc.rows.begin(), doc.rows.end());
  std::sort(doc.advertisers.begin(), doc.advertisers.end(),
            [](const auto& a, const auto& b) { return a.advertiser < b.advertiser; });
  doc.unassigned = alloc.unassigned();
  doc.total_regret = report.total;
  doc.excessive_regret = report.excessive;
  doc.unsatisfied_regret = report.unsatisfied;
  doc.satisfied_advertisers = report.satisfied_count;
  return doc;
}

std::string serialize_allocation(const AllocationDocument& doc) {
  std::ostringstream out;
  out << kMagic << "\n[assignments]\nadv_id,tag_id,slot_id\n";
  for (const auto& r : doc.rows) {
    out << r.advertiser.value << ',' << r.tag.value << ',' << r.slot.value << '\n';
  }
  out << "[unassigned]\nslot_id\n";
  for (auto s : doc.unassigned) out << s.value << '\n';
  out << "[advertisers]\nadv_id,demand,payment,achieved,regret,kind\n";
  for (const auto& a : doc.advertisers) {
    out << a.advertiser.value << ',' << format_double(a.demand) << ','
        << format_double(a.payment) << ',' << format_double(a.achieved) << ','
        << format_double(a.regret) << ',' << to_string(a.kind) << '\n';
  }
  out << "[summary]\n"
      << "total_regret=" << format_double(doc.total_regret) << '\n'
      << "excessive_regret=" << format_double(doc.excessive_regret) << '\n'
      << "unsatisfied_regret=" << format_double(doc.unsatisfied_regret) << '\n'
      << "satisfied_advertisers=" << doc.satisfied_advertisers << '\n';
  return out.str();
}

std::string serialize_allocation(const Allocation& alloc, const RegretReport& report,
                                 const Instance& instance) {
  return serialize_allocation(make_document(alloc, report, instance));
}

AllocationDocument parse_allocation(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kMagic) {
    throw ParseError("<allocation>", 1, "missing '" + std::string(kMagic) + "' header");
  }
  AllocationDocument doc;
  std::string section;
  bool expect_header = false;
  bool seen_summary[4] = {};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = lines[i];
    const Parser p(i + 1);
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = std::string(line);
      expect_header = section != "[summary]";
      if (section != "[assignments]" && section != "[unassigned]" &&
          section != "[advertisers]" && section != "[summary]") {
        p.fail("unknown section " + section);
      }
      continue;
    }
    if (expect_header) {
      expect_header = false;
      continue;
    }
    if (section == "[assignments]") {
      const auto f = fields_of(line);
      if (f.size() != 3) p.fail("expected 3 fields");
      doc.rows.push_back({AdvertiserId{p.integer(f[0])}, TagId{p.integer(f[1])},
                          SlotId{p.integer(f[2])}});
    } else if (section == "[unassigned]") {
      doc.unassigned.push_back(SlotId{p.integer(line)});
    } else if (section == "[advertisers]") {
      const auto f = fields_of(line);
      if (f.size() != 6) p.fail("expected 6 fields");
      const auto kind = regret_kind_from_string(f[5]);
      if (!kind) p.fail("unknown regret kind '" + std::string(f[5]) + "'");
      doc.advertisers.push_back({AdvertiserId{p.integer(f[0])}, p.real(f[1]), p.real(f[2]),
                                 p.real(f[3]), p.real(f[4]), *kind});
    } else if (section == "[summary]") {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) p.fail("expected key=value");
      const auto key = line.substr(0, eq);
      const auto value = line.substr(eq + 1);
      if (key == "total_regret") {
        doc.total_regret = p.real(value);
        seen_summary[0] = true;
      } else if (key == "excessive_regret") {
        doc.excessive_regret = p.real(value);
        seen_summary[1] = true;
      } else if (key == "unsatisfied_regret") {
        doc.unsatisfied_regret = p.real(value);
        seen_summary[2] = true;
      } else if (key == "satisfied_advertisers") {
        doc.satisfied_advertisers = static_cast<std::size_t>(p.integer(value));
        seen_summary[3] = true;
      } else {
        p.fail("unknown summary key '" + std::string(key) + "'");
      }
    } else {
      p.fail("content outside any section");
    }
  }
  if (!std::all_of(std::begin(seen_summary), std::end(seen_summary), [](bool b) { return b; })) {
    throw ParseError("<allocation>", lines.size(), "incomplete [summary] section");
  }
  return doc;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, const Instance& instance) {
  out << "step,kind,adv_id,tag_pointer,tag_id,slot_id,score,remaining_demand\n";
  std::size_t step = 0;
  for (const auto& ev : trace.events) {
    out << step++ << ',' << (ev.kind == TraceEvent::Kind::select ? "select" : "skip") << ','
        << instance.advertisers.at(ev.advertiser).id.value << ',' << ev.tag_pointer << ',';
    if (ev.kind == TraceEvent::Kind::select) {
      out << ev.tag.value << ',' << ev.slot.value << ',' << format_double(ev.score);
    } else {
      out << ",,";
    }
    out << ',' << format_double(ev.remaining_demand) << '\n';
  }
}

}  // namespace trmoa
