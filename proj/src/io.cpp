#include "piston/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "piston/errors.hpp"

namespace piston::io {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path.string()), columns_(header.size()) {
  file_ = std::fopen(path_.c_str(), "wb");
  if (!file_) throw SimulationError("cannot write " + path_);
  row(header);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw SimulationError("CSV row width mismatch in " + path_);
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size())
    throw SimulationError("write failed for " + path_);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

std::vector<std::string> slow_header(std::size_t n1, std::size_t n2, SlowMode mode) {
  const std::string tag = mode == SlowMode::HardSpeeds ? "s" : "E";
  std::vector<std::string> h{"X", "W"};
  for (std::size_t j = 0; j < n1; ++j) h.push_back(tag + "1_" + std::to_string(j));
  for (std::size_t j = 0; j < n2; ++j) h.push_back(tag + "2_" + std::to_string(j));
  return h;
}

std::vector<double> slow_row(const SlowState& h) { return h.to_vector(); }

void write_error_table(const std::filesystem::path& path, const harness::ErrorTable& table) {
  CsvWriter csv(path, {"epsilon", "delta", "phase", "sup_error", "first_exit_tau"});
  for (const auto& r : table.rows)
    csv.row(std::vector<std::string>{format_double(r.epsilon), format_double(r.delta),
                                     std::to_string(r.phase), format_double(r.sup_error),
                                     r.first_exit ? format_double(*r.first_exit) : "inf"});
}

void write_timing(const std::filesystem::path& path, const harness::ErrorTable& table) {
  CsvWriter csv(path, {"epsilon", "delta", "phase", "wall_time"});
  for (const auto& r : table.rows)
    csv.row(std::vector<std::string>{format_double(r.epsilon), format_double(r.delta),
                                     std::to_string(r.phase), format_double(r.wall_time)});
}

void write_event_log(const std::filesystem::path& path, const std::vector<hard::EventRecord>& events,
                     std::size_t n1, std::size_t n2) {
  std::vector<std::string> header{"t", "kind", "side", "index"};
  for (const auto& name : slow_header(n1, n2, SlowMode::HardSpeeds)) header.push_back(name);
  CsvWriter csv(path, header);
  for (const auto& ev : events) {
    std::string kind, side, index;
    for (std::size_t i = 0; i < ev.collisions.size(); ++i) {
      const auto& c = ev.collisions[i];
      if (i) {
        kind += '+';
        side += '+';
        index += '+';
      }
      kind += to_string(c.kind);
      side += to_string(c.side);
      index += std::to_string(c.index);
    }
    std::vector<std::string> cells{format_double(ev.time), kind, side, index};
    for (double v : slow_row(ev.post)) cells.push_back(format_double(v));
    csv.row(cells);
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot write " + path.string());
  out << text;
}

std::string gnuplot_script(const std::string& errors_csv, const std::string& title) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'epsilon'\n"
     << "set ylabel 'sup error'\n"
     << "set title '" << title << "'\n"
     << "set key left top\n"
     << "plot '" << errors_csv << "' every ::1 using 1:4 with points pt 7 ps 0.5 title 'runs', \\\n"
     << "     x with lines dt 2 title 'slope 1'\n";
  return os.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimulationError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(buf.str())));
  return hex;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    std::uint64_t seed, const std::string& config_json,
                    const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = seed;
  m["config"] = nlohmann::json::parse(config_json);
  nlohmann::json files = nlohmann::json::object();
  for (const auto& name : outputs) files[name] = "fnv1a:" + fnv1a_file(dir / name);
  m["outputs"] = files;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace piston::io
