#include "wgflow/harness/runlog.hpp"

#include <charconv>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "wgflow/error.hpp"

namespace wgf::harness {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvLog::CsvLog(const std::filesystem::path& path, bool write_header) : path_(path), out_(path) {
  if (!out_) throw InputError("cannot open " + path.string() + " for writing");
  if (write_header) {
    out_ << kCsvHeader << '\n';
    out_.flush();
  }
}

void CsvLog::write(const CsvRow& r) {
  if (r.run_id.find_first_of(",\n") != std::string::npos || r.metric.find_first_of(",\n") != std::string::npos)
    throw InputError("csv: run_id and metric names may not contain commas or newlines");
  out_ << r.run_id << ',' << r.seed << ',' << r.iteration << ',' << r.env_steps << ',' << r.metric << ','
       << format_value(r.value) << '\n';
  out_.flush();
}

namespace {

template <class T>
T parse_field(const std::string& s, std::size_t row, std::size_t col) {
  T v{};
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end)
    throw ParseError("run.csv row " + std::to_string(row) + " column " + std::to_string(col) + ": cannot parse '" + s + "'",
                     row, col);
  return v;
}

double parse_double_field(const std::string& s, std::size_t row, std::size_t col) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return parse_field<double>(s, row, col);
}

}  // namespace

std::vector<CsvRow> read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("run.csv: missing or wrong header", 1, 0);
  std::vector<CsvRow> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6)
      throw ParseError("run.csv row " + std::to_string(row_no) + ": expected 6 fields, got " + std::to_string(f.size()),
                       row_no, 0);
    CsvRow r;
    r.run_id = f[0];
    r.seed = parse_field<std::uint64_t>(f[1], row_no, 2);
    r.iteration = parse_field<long>(f[2], row_no, 3);
    r.env_steps = parse_field<long>(f[3], row_no, 4);
    r.metric = f[4];
    if (r.metric.empty()) throw ParseError("run.csv row " + std::to_string(row_no) + ": empty metric", row_no, 5);
    r.value = parse_double_field(f[5], row_no, 6);
    rows.push_back(std::move(r));
  }
  return rows;
}

bool RunSummary::all_failed() const {
  for (const auto& s : seeds)
    if (s.ok) return false;
  return true;
}

void write_summary(const std::filesystem::path& path, const RunConfig& cfg, const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["experiment"] = summary.experiment;
  j["run_id"] = summary.run_id;
  j["code_version"] = kCodeVersion;
  j["wall_time_seconds"] = summary.wall_time_seconds;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.values()) config[k] = v;
  j["config"] = config;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const auto& s : summary.seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["ok"] = s.ok;
    if (!s.ok) e["error"] = s.error;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.final_metrics) m[k] = v;
    e["final_metrics"] = m;
    seeds.push_back(e);
  }
  j["seeds"] = seeds;
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace wgf::harness
