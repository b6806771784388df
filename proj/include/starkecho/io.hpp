#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "starkecho/analysis.hpp"
#include "starkecho/dynamics.hpp"
#include "starkecho/trace.hpp"

namespace starkecho::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed 12-significant-digit formatting used by every CSV writer.
std::string format_number(double x);

/// Header: time_us,re12,im12,re13,im13,re23,im23,p11,p22,p33
std::string trace_csv(const TraceSet& traces);

/// time_us then re/im of rho_12 per group, columns named by detuning in kHz.
std::string groups_csv(const TraceSet& traces);

std::string sweep_csv(const SweepResult& sweep);
std::string sweep2d_csv(const std::vector<double>& phis, const std::vector<double>& offsets_mhz,
                        const std::vector<std::vector<double>>& amplitudes);

/// 3x3 comma-separated decay matrix in 1/us.
DecayRates parse_gamma_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// JSON documents, returned as serialized text.
std::string echoes_json(const CompareReport& report, const OraclePrediction& prediction);
std::string oracle_json(const OraclePrediction& prediction);

struct RunManifest {
  std::string sequence_text;
  EnsembleSpec ensemble;
  double raw_coverage = 0.0;
  PropagationConfig config;
  DecayRates gamma;
  bool per_group = false;
  std::string echoes;  // echoes.json contents, embedded
  double wall_seconds = 0.0;
  std::string tool_version = kToolVersion;
};

std::string manifest_json(const RunManifest& manifest);
/// Inverse of manifest_json for the fields needed to replay a run.
RunManifest parse_manifest(const std::string& text);

// --- plotting -------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const;  // -1 if absent
};

CsvTable parse_csv(const std::string& text);

struct PlotOptions {
  std::string x_column;                 // empty: time_us, else phi_rad
  std::vector<std::string> y_columns;   // empty: every other column
  std::vector<std::pair<double, double>> shaded;  // x intervals, e.g. pulses
  std::string title;
  int width = 900;
  int height = 420;
};

/// Standalone SVG line chart; throws std::invalid_argument on a schema mismatch.
std::string plot_svg(const CsvTable& table, const PlotOptions& options);

}  // namespace starkecho::io
