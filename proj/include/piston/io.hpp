#pragma once

// Output artifacts: CSV tables ('.' decimal, header row, LF endings), JSON
// documents, gnuplot scripts and a manifest with FNV-1a content hashes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "piston/hardcore.hpp"
#include "piston/harness.hpp"

namespace piston::io {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
  std::size_t columns_ = 0;
};

// Header names for a slow state: X, W, then s1_j / s2_j or E1_j / E2_j.
std::vector<std::string> slow_header(std::size_t n1, std::size_t n2, SlowMode mode);
std::vector<double> slow_row(const SlowState& h);

// Columns (epsilon, delta, phase, sup_error, first_exit_tau); first_exit_tau
// is "inf" when the run never left the compact set.
void write_error_table(const std::filesystem::path& path, const harness::ErrorTable& table);
void write_timing(const std::filesystem::path& path, const harness::ErrorTable& table);

// Columns (t, kind, side, index, X, W, values...) with post-event slow values.
void write_event_log(const std::filesystem::path& path, const std::vector<hard::EventRecord>& events,
                     std::size_t n1, std::size_t n2);

void write_text(const std::filesystem::path& path, const std::string& text);

// Log-log plot of the worst error per epsilon in errors.csv.
std::string gnuplot_script(const std::string& errors_csv, const std::string& title);

std::uint64_t fnv1a(const std::string& bytes);
std::string fnv1a_file(const std::filesystem::path& path);

// manifest.json: command, version, seed, resolved configuration and one hash
// per listed output file (relative to dir).
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    std::uint64_t seed, const std::string& config_json,
                    const std::vector<std::string>& outputs);

}  // namespace piston::io
