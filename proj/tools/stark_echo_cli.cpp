// stark-echo: run, sweep, oracle, plot, compare and preset subcommands.
//
//   stark-echo run --preset fig4a --out out/
//   stark-echo sweep --preset fig1b --phi 0:pi:33 --out out/
//   stark-echo compare my.seq

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "starkecho/analysis.hpp"
#include "starkecho/io.hpp"
#include "starkecho/units.hpp"

namespace fs = std::filesystem;
using namespace starkecho;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string sequence_file;
  std::string preset_name;
  std::string out_dir = ".";
  std::optional<double> dt;
  std::string method = "exact";
  bool per_group = false;
  std::string gamma_file;
  unsigned threads = 0;
  bool control_detuning = false;

  std::string manifest_file;      // run replay, plot shading
  std::string phi_grid = "0:pi:33";
  bool two_d = false;
  std::string offsets = "-1:1:9";
  bool json = false;
  std::string csv_file;
  std::vector<std::string> columns;
  std::string title;
};

PulseSequence load_sequence(const Options& o) {
  if (!o.preset_name.empty() && !o.sequence_file.empty())
    throw UsageError("give either a sequence file or --preset, not both");
  PulseSequence seq;
  if (!o.preset_name.empty()) {
    try {
      seq = preset(o.preset_name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else if (!o.sequence_file.empty()) {
    std::string text;
    try {
      text = io::read_file(o.sequence_file);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    try {
      seq = parse_sequence(text);
    } catch (const ParseError& e) {
      throw UsageError(o.sequence_file + ":" + e.what());
    }
  } else {
    throw UsageError("no sequence: give a file or --preset NAME");
  }
  if (o.dt) {
    seq.dt_us = *o.dt;
    require_valid(seq);
  }
  return seq;
}

Simulation make_simulation(const PulseSequence& seq, const Options& o) {
  Simulation sim = Simulation::from(seq);
  try {
    sim.config.method = parse_method(o.method);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  sim.config.threads = o.threads;
  sim.config.control_detuning = o.control_detuning;
  if (!o.gamma_file.empty()) {
    try {
      sim.gamma = io::parse_gamma_csv(io::read_file(o.gamma_file));
    } catch (const std::exception& e) {
      throw UsageError(o.gamma_file + ": " + e.what());
    }
    // The eigen-propagator is unitary only; decay needs the integrator.
    if (!sim.gamma.is_zero()) sim.config.method = Method::rk4;
  }
  sim.config.check();
  return sim;
}

// "pi", "2pi", "3*pi/2", "0.25", "-1.5"
double parse_expr(std::string s) {
  std::erase(s, ' ');
  if (s.empty()) throw UsageError("empty number in grid");
  double denom = 1.0;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    denom = std::stod(s.substr(slash + 1));
    s.resize(slash);
  }
  double value;
  if (auto p = s.find("pi"); p != std::string::npos) {
    if (p + 2 != s.size()) throw UsageError("bad grid value '" + s + "'");
    std::string coef = s.substr(0, p);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    value = (coef.empty() ? 1.0 : coef == "-" ? -1.0 : std::stod(coef)) * kPi;
  } else {
    value = std::stod(s);
  }
  return value / denom;
}

// "start:stop:count", both ends included.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw UsageError("grid must be start:stop:count, got '" + spec + "'");
  try {
    const double a = parse_expr(parts[0]);
    const double b = parse_expr(parts[1]);
    const int n = std::stoi(parts[2]);
    if (n < 1) throw UsageError("grid count must be >= 1");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return out;
  } catch (const std::logic_error&) {
    throw UsageError("bad grid '" + spec + "'");
  }
}

void write_out(const Options& o, const std::string& name, const std::string& contents) {
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  io::write_file_atomic(dir / name, contents);
  std::cout << "wrote " << (dir / name).string() << "\n";
}

void print_report(const CompareReport& report) {
  for (const auto& c : report.checks) {
    std::printf("%-4s predicted %-10s @ %.3f us (nominal %.3f)  simulated %-10s @ %.3f us  |Im|=%.4g  %s\n",
                c.predicted.label.c_str(), std::string(to_string(c.predicted.character)).c_str(),
                c.predicted.effective_time_us, c.predicted.nominal_time_us,
                std::string(to_string(c.simulated.character)).c_str(), c.simulated.echo_time_us,
                c.simulated.amplitude, c.passed() ? "ok" : "FAILED");
  }
  for (const auto& n : report.notes) std::cout << n << "\n";
}

int cmd_run(const Options& o) {
  PulseSequence seq;
  Simulation sim;
  bool per_group = o.per_group;
  if (!o.manifest_file.empty()) {
    if (!o.sequence_file.empty() || !o.preset_name.empty())
      throw UsageError("--manifest replaces the sequence input");
    io::RunManifest m;
    try {
      m = io::parse_manifest(io::read_file(o.manifest_file));
      seq = parse_sequence(m.sequence_text);
    } catch (const std::exception& e) {
      throw UsageError(o.manifest_file + ": " + e.what());
    }
    sim = Simulation::from(seq);
    sim.config = m.config;
    sim.config.threads = o.threads;
    sim.gamma = m.gamma;
    per_group = m.per_group;
  } else {
    seq = load_sequence(o);
    sim = make_simulation(seq, o);
  }

  const auto start = std::chrono::steady_clock::now();
  EchoAnalysis a;
  try {
    a = analyze(seq, sim, per_group);
  } catch (const OracleError& e) {
    // Not an echo sequence: still propagate, but report no echoes.
    a.traces = sim.run(seq, per_group);
    a.report.notes.push_back(std::string("oracle: pulse ") + e.pulse() + ": " + e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string echoes = io::echoes_json(a.report, a.prediction);
  write_out(o, "trace.csv", io::trace_csv(a.traces));
  if (per_group) write_out(o, "groups.csv", io::groups_csv(a.traces));
  write_out(o, "echoes.json", echoes);

  io::RunManifest m;
  m.sequence_text = serialize_sequence(seq);
  m.ensemble = sim.ensemble.spec;
  m.raw_coverage = sim.ensemble.raw_coverage;
  m.config = sim.config;
  m.gamma = sim.gamma;
  m.per_group = per_group;
  m.echoes = echoes;
  m.wall_seconds = wall;
  write_out(o, "manifest.json", io::manifest_json(m));
  print_report(a.report);
  return kOk;
}

int cmd_sweep(const Options& o) {
  const PulseSequence seq = load_sequence(o);
  const Simulation sim = make_simulation(seq, o);
  const std::vector<double> phis = parse_grid(o.phi_grid);
  const SweepResult r = efficiency_sweep(seq, phis, sim);
  write_out(o, "sweep.csv", io::sweep_csv(r));
  std::printf("stark pulse %s, Omega' = %.6g MHz, window %.3f +- %.3f us\n", r.stark_pulse.c_str(),
              r.generalized_rabi_mhz, r.window.center_us, r.window.halfwidth_us);
  std::printf("bare e1 amplitude %.6g, silence threshold %.6g\n", r.bare_amplitude, r.silence_threshold);
  if (o.two_d) {
    const std::vector<double> offsets = parse_grid(o.offsets);
    write_out(o, "sweep2d.csv", io::sweep2d_csv(phis, offsets, sweep_2d(seq, phis, offsets, sim)));
  }
  return kOk;
}

int cmd_oracle(const Options& o) {
  const PulseSequence seq = load_sequence(o);
  const OraclePrediction p = oracle_predict(seq);
  if (o.json) {
    std::cout << io::oracle_json(p);
    return kOk;
  }
  std::cout << "ledger:\n";
  for (const auto& l : p.ledger)
    std::printf("  %-6s %-10s t=%7.3f us  %-28s %s\n", l.pulse.c_str(), std::string(to_string(l.role)).c_str(),
                l.time_us, l.transform.c_str(), l.notation.c_str());
  std::cout << "echoes:\n";
  for (const auto& e : p.echoes)
    std::printf("  %-4s %-10s @ %.3f us (effective %.3f us), %s quadrature, coherence %+.3f%+.3fi\n",
                e.label.c_str(), std::string(to_string(e.character)).c_str(), e.nominal_time_us,
                e.effective_time_us, std::string(to_string(e.quadrature)).c_str(), e.coherence.real(),
                e.coherence.imag());
  return kOk;
}

int cmd_plot(const Options& o) {
  io::CsvTable table;
  try {
    table = io::parse_csv(io::read_file(o.csv_file));
  } catch (const std::exception& e) {
    throw UsageError(o.csv_file + ": " + e.what());
  }
  io::PlotOptions opt;
  opt.y_columns = o.columns;
  opt.title = o.title;
  if (!o.manifest_file.empty()) {
    try {
      const auto m = io::parse_manifest(io::read_file(o.manifest_file));
      for (const auto& p : parse_sequence(m.sequence_text).pulses) opt.shaded.emplace_back(p.t_on_us, p.t_off_us());
    } catch (const std::exception& e) {
      throw UsageError(o.manifest_file + ": " + e.what());
    }
  }
  std::string svg;
  try {
    svg = io::plot_svg(table, opt);
  } catch (const std::invalid_argument& e) {
    throw UsageError(o.csv_file + ": " + e.what());
  }
  Options out = o;
  if (out.out_dir == ".") out.out_dir = fs::path(o.csv_file).parent_path().string();
  if (out.out_dir.empty()) out.out_dir = ".";
  write_out(out, fs::path(o.csv_file).stem().string() + ".svg", svg);
  return kOk;
}

int cmd_compare(const Options& o) {
  const PulseSequence seq = load_sequence(o);
  const Simulation sim = make_simulation(seq, o);
  const EchoAnalysis a = analyze(seq, sim);
  print_report(a.report);
  if (a.report.passed()) {
    std::cout << "compare: all " << a.report.checks.size() << " echoes agree\n";
    return kOk;
  }
  for (const auto& c : a.report.checks)
    if (!c.passed())
      std::cout << "compare: " << c.predicted.label << " failed ("
                << (c.time_ok ? "character" : c.character_ok ? "time" : "time, character") << ")\n";
  return kVerifyFailed;
}

int cmd_preset(const Options& o, bool list) {
  if (list) {
    for (const auto& n : preset_names()) std::cout << n << "\n";
    return kOk;
  }
  if (o.preset_name.empty()) throw UsageError("preset: give a NAME or --list");
  try {
    std::cout << serialize_sequence(preset(o.preset_name));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stark-echo photon echo simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolVersion);
  Options o;

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("sequence", o.sequence_file, "Sequence file");
    sub->add_option("--preset", o.preset_name, "Built-in sequence");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--dt", o.dt, "Output step in us");
    sub->add_option("--method", o.method, "exact or rk4")->check(CLI::IsMember({"exact", "exact_piecewise", "rk4"}));
    sub->add_option("--gamma", o.gamma_file, "3x3 CSV of decay rates in 1/us");
    sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
    sub->add_flag("--control-detuning", o.control_detuning, "Keep the atom detuning on |2> during control pulses");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out_dir, "Output directory"); };

  auto* run = app.add_subcommand("run", "Propagate a sequence and write traces");
  add_input(run);
  add_sim(run);
  add_out(run);
  run->add_flag("--per-group", o.per_group, "Also write groups.csv");
  run->add_option("--manifest", o.manifest_file, "Replay a previous run");

  auto* sweep = app.add_subcommand("sweep", "e1 amplitude versus Stark phase");
  add_input(sweep);
  add_sim(sweep);
  add_out(sweep);
  sweep->add_option("--phi", o.phi_grid, "start:stop:count, e.g. 0:pi:33");
  sweep->add_flag("--2d", o.two_d, "Also sweep the Stark detuning offset");
  sweep->add_option("--offsets", o.offsets, "Detuning offsets in MHz, start:stop:count");

  auto* oracle = app.add_subcommand("oracle", "Predicted echoes and phase ledger");
  add_input(oracle);
  oracle->add_flag("--json", o.json, "JSON output");

  auto* plot = app.add_subcommand("plot", "Render a CSV as SVG");
  plot->add_option("csv", o.csv_file, "trace.csv or sweep.csv")->required();
  plot->add_option("--columns", o.columns, "Columns to draw")->delimiter(',');
  plot->add_option("--manifest", o.manifest_file, "Shade the pulses of this run");
  plot->add_option("--title", o.title, "Plot title");
  add_out(plot);

  auto* compare = app.add_subcommand("compare", "Check simulated echoes against the oracle");
  add_input(compare);
  add_sim(compare);

  auto* preset_cmd = app.add_subcommand("preset", "Print a preset's canonical text");
  preset_cmd->add_option("name", o.preset_name, "Preset name");
  bool list = false;
  preset_cmd->add_flag("--list", list, "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (oracle->parsed()) return cmd_oracle(o);
    if (plot->parsed()) return cmd_plot(o);
    if (compare->parsed()) return cmd_compare(o);
    if (preset_cmd->parsed()) return cmd_preset(o, list);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const OracleError& e) {
    std::cerr << "error: pulse " << e.pulse() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const SequenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << to_string(v.code) << ": " << v.message << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
  return kUsage;
}
