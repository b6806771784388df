#include "starkecho/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace starkecho::io {

using nlohmann::json;

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string trace_csv(const TraceSet& t) {
  std::string out = "time_us,re12,im12,re13,im13,re23,im23,p11,p22,p33\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& m = t.macro[k];
    const double cols[] = {t.times[k],     m(0, 1).real(), m(0, 1).imag(), m(0, 2).real(),
                           m(0, 2).imag(), m(1, 2).real(), m(1, 2).imag(), m(0, 0).real(),
                           m(1, 1).real(), m(2, 2).real()};
    for (std::size_t c = 0; c < std::size(cols); ++c) {
      if (c) out += ',';
      out += format_number(cols[c]);
    }
    out += '\n';
  }
  return out;
}

std::string groups_csv(const TraceSet& t) {
  if (t.per_group.empty()) throw std::invalid_argument("trace set has no per-group data");
  std::string out = "time_us";
  for (double d : t.group_deltas_khz) {
    const std::string tag = format_number(d);
    out += ",re12[" + tag + "kHz],im12[" + tag + "kHz]";
  }
  out += '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    out += format_number(t.times[k]);
    for (const auto& g : t.per_group) out += ',' + format_number(g[k].real()) + ',' + format_number(g[k].imag());
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "phi_rad,amplitude,intensity,amplitude_homogeneous\n";
  for (const auto& r : sweep.rows)
    out += format_number(r.phi) + ',' + format_number(r.amplitude) + ',' + format_number(r.intensity) +
           ',' + format_number(r.amplitude_homogeneous) + '\n';
  return out;
}

std::string sweep2d_csv(const std::vector<double>& phis, const std::vector<double>& offsets_mhz,
                        const std::vector<std::vector<double>>& amplitudes) {
  std::string out = "offset_mhz";
  for (double p : phis) out += ",phi=" + format_number(p);
  out += '\n';
  for (std::size_t i = 0; i < offsets_mhz.size(); ++i) {
    out += format_number(offsets_mhz[i]);
    for (double a : amplitudes.at(i)) out += ',' + format_number(a);
    out += '\n';
  }
  return out;
}

DecayRates parse_gamma_csv(const std::string& text) {
  DecayRates g;
  std::istringstream in(text);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (row == 3) throw std::invalid_argument("decay matrix has more than 3 rows");
    std::istringstream cells(line);
    std::string cell;
    int col = 0;
    while (std::getline(cells, cell, ',')) {
      if (col == 3) throw std::invalid_argument("decay matrix row " + std::to_string(row + 1) + " has more than 3 columns");
      std::size_t used = 0;
      try {
        g.gamma(row, col) = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad decay rate '" + cell + "'");
      }
      ++col;
    }
    if (col != 3) throw std::invalid_argument("decay matrix row " + std::to_string(row + 1) + " needs 3 columns");
    ++row;
  }
  if (row != 3) throw std::invalid_argument("decay matrix needs 3 rows");
  g.check();
  return g;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

namespace {

json echo_json(const PredictedEcho& e) {
  return {{"label", e.label},
          {"nominal_time_us", e.nominal_time_us},
          {"effective_time_us", e.effective_time_us},
          {"coherence", {e.coherence.real(), e.coherence.imag()}},
          {"quadrature", to_string(e.quadrature)},
          {"character", to_string(e.character)},
          {"relative_amplitude", e.relative_amplitude}};
}

}  // namespace

std::string echoes_json(const CompareReport& report, const OraclePrediction& prediction) {
  json doc;
  doc["echoes"] = json::array();
  for (const auto& c : report.checks) {
    doc["echoes"].push_back({{"label", c.predicted.label},
                             {"echo_time_us", c.simulated.echo_time_us},
                             {"amplitude", c.simulated.amplitude},
                             {"peak_im", c.simulated.peak_im},
                             {"character", to_string(c.simulated.character)},
                             {"reference_sign", c.simulated.reference_sign},
                             {"silence_threshold", c.simulated.silence_threshold},
                             {"window_us", {c.window.center_us - c.window.halfwidth_us,
                                            c.window.center_us + c.window.halfwidth_us}},
                             {"predicted", echo_json(c.predicted)},
                             {"time_ok", c.time_ok},
                             {"character_ok", c.character_ok},
                             {"passed", c.passed()}});
  }
  doc["notes"] = report.notes;
  doc["passed"] = report.passed();
  doc["predicted_echoes"] = prediction.echoes.size();
  return doc.dump(2) + "\n";
}

std::string oracle_json(const OraclePrediction& prediction) {
  json doc;
  doc["echoes"] = json::array();
  for (const auto& e : prediction.echoes) doc["echoes"].push_back(echo_json(e));
  doc["ledger"] = json::array();
  for (const auto& l : prediction.ledger)
    doc["ledger"].push_back({{"pulse", l.pulse},
                             {"role", to_string(l.role)},
                             {"time_us", l.time_us},
                             {"transform", l.transform},
                             {"coherence", {l.coherence.real(), l.coherence.imag()}},
                             {"notation", l.notation}});
  return doc.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  json gamma = json::array();
  for (int i = 0; i < 3; ++i) gamma.push_back({m.gamma.gamma(i, 0), m.gamma.gamma(i, 1), m.gamma.gamma(i, 2)});
  json doc = {
      {"tool", "stark-echo"},
      {"tool_version", m.tool_version},
      {"sequence", m.sequence_text},
      {"ensemble",
       {{"fwhm_khz", m.ensemble.fwhm_khz},
        {"spacing_khz", m.ensemble.spacing_khz},
        {"group_count", m.ensemble.group_count},
        {"raw_coverage", m.raw_coverage}}},
      {"config",
       {{"dt_us", m.config.dt_us},
        {"t_end_us", m.config.t_end_us},
        {"method", to_string(m.config.method)},
        {"control_detuning", m.config.control_detuning}}},
      {"gamma", gamma},
      {"per_group", m.per_group},
      {"wall_clock_seconds", m.wall_seconds},
  };
  doc["echoes"] = m.echoes.empty() ? json(nullptr) : json::parse(m.echoes);
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  RunManifest m;
  try {
    const json doc = json::parse(text);
    m.sequence_text = doc.at("sequence").get<std::string>();
    const auto& e = doc.at("ensemble");
    m.ensemble.fwhm_khz = e.at("fwhm_khz").get<double>();
    m.ensemble.spacing_khz = e.at("spacing_khz").get<double>();
    m.ensemble.group_count = e.at("group_count").get<int>();
    m.raw_coverage = e.value("raw_coverage", 0.0);
    const auto& c = doc.at("config");
    m.config.dt_us = c.at("dt_us").get<double>();
    m.config.t_end_us = c.at("t_end_us").get<double>();
    m.config.method = parse_method(c.at("method").get<std::string>());
    m.config.control_detuning = c.value("control_detuning", false);
    const auto& g = doc.at("gamma");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m.gamma.gamma(i, j) = g.at(i).at(j).get<double>();
    m.per_group = doc.value("per_group", false);
    m.tool_version = doc.value("tool_version", "");
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("bad manifest: ") + ex.what());
  }
  return m;
}

}  // namespace starkecho::io
