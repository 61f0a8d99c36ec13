#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "franson/harness.h"

namespace franson::harness {

namespace {

using analysis::TrialRecord;
using detector::ResolvedOutcome;

constexpr const char* kHeader = "index,j,k,a_slot,a_port,b_slot,b_port,reject_reason,n,r,a_clicks,b_clicks";
constexpr std::size_t kFields = 12;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <class T>
T parse_number(std::string_view text, std::size_t line, std::size_t field, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw RecordParseError(line, field, std::string("invalid ") + what + " '" + std::string(text) + "'");
  return value;
}

void write_outcome(std::ostream& out, const ResolvedOutcome& o) {
  if (o.is_click()) out << to_string(time_slot_of(o.slot)) << ',' << to_string(o.port);
  else out << ',';
}

ResolvedOutcome parse_outcome(std::string_view slot, std::string_view port, std::string_view clicks,
                              std::size_t line, std::size_t field) {
  const int n = parse_number<int>(clicks, line, field + 2, "click count");
  if (n < 0) throw RecordParseError(line, field + 2, "negative click count");
  if (slot.empty() != port.empty())
    throw RecordParseError(line, field, "slot and port must both be present or both empty");
  if (slot.empty()) {
    if (n == 0) return ResolvedOutcome::no_click();
    if (n >= 2) return ResolvedOutcome::discarded(n);
    throw RecordParseError(line, field, "a single registered click must be reported");
  }
  if (n < 1) throw RecordParseError(line, field + 2, "click reported with zero click count");
  int s = 0;
  if (slot == "E") s = kEarlySlot;
  else if (slot == "L") s = kLateSlot;
  else throw RecordParseError(line, field, "slot must be E or L, got '" + std::string(slot) + "'");
  Port p = Port::Plus;
  if (port == "+") p = Port::Plus;
  else if (port == "-") p = Port::Minus;
  else throw RecordParseError(line, field + 1, "port must be + or -, got '" + std::string(port) + "'");
  return ResolvedOutcome::click(s, p, n);
}

}  // namespace

RecordParseError::RecordParseError(std::size_t line, std::size_t field, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", field " + std::to_string(field) + ": " +
                         message),
      line_(line),
      field_(field) {}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_records(std::ostream& out, std::span<const TrialRecord> records) {
  out << kRecordSchema << '\n' << kHeader << '\n';
  for (const auto& r : records) {
    out << r.index << ',' << 2 * r.setting_a + 1 << ',' << 2 * r.setting_b + 2 << ',';
    write_outcome(out, r.a);
    out << ',';
    write_outcome(out, r.b);
    out << ',' << analysis::to_string(analysis::postselect(r).reason) << ',';
    if (r.hidden) out << r.hidden->n << ',' << format_double(r.hidden->r);
    else out << ',';
    out << ',' << r.a.multiplicity << ',' << r.b.multiplicity << '\n';
  }
}

std::vector<TrialRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordSchema)
    throw RecordParseError(1, 0, "schema mismatch: expected '" + std::string(kRecordSchema) + "'");
  if (!std::getline(in, line) || line != kHeader)
    throw RecordParseError(2, 0, "unexpected header line");

  std::vector<TrialRecord> records;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kFields)
      throw RecordParseError(line_no, 0, "expected " + std::to_string(kFields) + " fields, got " +
                                             std::to_string(f.size()));
    TrialRecord r;
    r.index = parse_number<std::uint64_t>(f[0], line_no, 1, "index");
    const int j = parse_number<int>(f[1], line_no, 2, "alice setting");
    const int k = parse_number<int>(f[2], line_no, 3, "bob setting");
    if (j < 1 || j % 2 != 1) throw RecordParseError(line_no, 2, "alice setting labels are odd");
    if (k < 2 || k % 2 != 0) throw RecordParseError(line_no, 3, "bob setting labels are even");
    r.setting_a = (j - 1) / 2;
    r.setting_b = (k - 2) / 2;
    r.a = parse_outcome(f[3], f[4], f[10], line_no, 4);
    r.b = parse_outcome(f[5], f[6], f[11], line_no, 6);
    if (f[8].empty() != f[9].empty())
      throw RecordParseError(line_no, 9, "hidden n and r must both be present or both empty");
    if (!f[8].empty()) {
      lhv::HiddenVariable hv{parse_number<int>(f[8], line_no, 9, "hidden n"),
                             parse_number<double>(f[9], line_no, 10, "hidden r")};
      try {
        hv.validate();
      } catch (const std::invalid_argument& e) {
        throw RecordParseError(line_no, 9, e.what());
      }
      r.hidden = hv;
    }
    analysis::RejectReason stated;
    try {
      stated = analysis::parse_reject_reason(f[7]);
    } catch (const std::invalid_argument& e) {
      throw RecordParseError(line_no, 8, e.what());
    }
    if (stated != analysis::postselect(r).reason)
      throw RecordParseError(line_no, 8, "reject reason disagrees with the outcomes");
    records.push_back(r);
  }
  return records;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_records(const std::filesystem::path& path, std::span<const TrialRecord> records) {
  std::ostringstream out;
  write_records(out, records);
  write_file(path, out.str());
}

std::vector<TrialRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open records file " + path.string());
  return read_records(in);
}

void write_summary(std::ostream& out, const Summary& s) {
  out << "scenario,S2,SE,window_sd,click_frac_A,click_frac_B,coinc_frac,eta_A,eta_B,"
         "bound_lhv,bound_fast_switch,bound_quantum\n";
  out << s.scenario << ',';
  if (s.value) out << format_double(s.value->value) << ',' << format_double(s.value->standard_error);
  else out << ',';
  out << ',' << format_double(s.window_sd) << ',';
  if (s.efficiency) {
    const auto& e = *s.efficiency;
    out << format_double(e.click_fraction_a) << ',' << format_double(e.click_fraction_b) << ','
        << format_double(e.coincidence_fraction) << ',' << format_double(e.eta_a) << ','
        << format_double(e.eta_b);
  } else {
    out << ",,,,";
  }
  out << ',' << format_double(s.bounds.lhv) << ',' << format_double(s.bounds.franson_fast_switch)
      << ',' << format_double(s.bounds.quantum) << '\n';
}

void write_series(std::ostream& out, const std::vector<analysis::WindowPoint>& series) {
  out << "window,S2,SE\n";
  for (const auto& p : series) {
    out << p.window << ',';
    if (p.value) out << format_double(p.value->value) << ',' << format_double(p.value->standard_error);
    else out << ',';
    out << '\n';
  }
}

void write_bounds(std::ostream& out, const std::vector<BoundsRow>& rows) {
  out << "N,lhv,fast_switch,quantum,algebraic,visibility_threshold\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.bounds.lhv) << ','
        << format_double(r.bounds.franson_fast_switch) << ',' << format_double(r.bounds.quantum)
        << ',' << format_double(r.bounds.algebraic) << ',' << format_double(r.visibility_threshold)
        << '\n';
  }
}

}  // namespace franson::harness
