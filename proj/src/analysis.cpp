#include "starkecho/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "starkecho/units.hpp"

namespace starkecho {

namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kReferenceDelay = 0.05;  // us after the data pulse
constexpr double kSilenceFraction = 0.05;

std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

std::string_view to_string(EchoCharacter c) {
  switch (c) {
    case EchoCharacter::emissive: return "emissive";
    case EchoCharacter::absorptive: return "absorptive";
    case EchoCharacter::silent: return "silent";
  }
  return "unknown";
}

const Pulse* data_pulse(const PulseSequence& sequence) {
  const Pulse* best = nullptr;
  for (const auto& p : sequence.pulses) {
    if (p.channel != Channel::probe || p.detune_mhz != 0.0 || p.rabi_mhz <= 0.0) continue;
    if (best == nullptr || p.t_on_us < best->t_on_us) best = &p;
  }
  return best;
}

int reference_sign(const TraceSet& traces, const PulseSequence& sequence) {
  const Pulse* d = data_pulse(sequence);
  if (d == nullptr) throw AnalysisError("sequence has no data pulse");
  const double im = traces.im12(traces.index_of(d->t_off_us() + kReferenceDelay));
  return (im > 0.0) - (im < 0.0);
}

EchoWindow clear_window(const PulseSequence& sequence, double t_end_us, double center_us,
                        double max_halfwidth_us) {
  double lo = std::max(0.0, center_us - max_halfwidth_us);
  double hi = std::min(t_end_us, center_us + max_halfwidth_us);
  for (const auto& p : sequence.pulses) {
    if (p.t_off_us() <= lo || p.t_on_us >= hi) continue;
    if (p.t_off_us() <= center_us) {
      lo = std::max(lo, p.t_off_us());
    } else if (p.t_on_us >= center_us) {
      hi = std::min(hi, p.t_on_us);
    } else {
      throw AnalysisError("pulse '" + p.name + "' is on at t=" + fixed(center_us) + " us");
    }
  }
  const double half = std::min(center_us - lo, hi - center_us);
  if (!(half > 0.0)) throw AnalysisError("no pulse-free window around t=" + fixed(center_us) + " us");
  return {center_us, half};
}

namespace {

std::pair<std::size_t, std::size_t> window_indices(const TraceSet& traces, EchoWindow w) {
  const double lo = w.center_us - w.halfwidth_us;
  const double hi = w.center_us + w.halfwidth_us;
  if (traces.times.empty() || lo < -kTimeTol || hi > traces.times.back() + kTimeTol)
    throw AnalysisError("echo window [" + fixed(lo) + ", " + fixed(hi) + "] us is outside the grid");
  const auto first = static_cast<std::size_t>(std::ceil(lo / traces.dt_us - 1e-9));
  const auto last = std::min(static_cast<std::size_t>(std::floor(hi / traces.dt_us + 1e-9)),
                             traces.times.size() - 1);
  if (first > last) throw AnalysisError("echo window contains no grid points");
  return {first, last};
}

}  // namespace

double window_peak(const TraceSet& traces, EchoWindow window) {
  auto [first, last] = window_indices(traces, window);
  double peak = 0.0;
  for (std::size_t k = first; k <= last; ++k) peak = std::max(peak, std::abs(traces.im12(k)));
  return peak;
}

double silence_threshold(const TraceSet& bare, EchoWindow window) {
  return kSilenceFraction * window_peak(bare, window);
}

EchoReport detect_echo(const TraceSet& traces, const PulseSequence& sequence, EchoWindow window,
                       double threshold) {
  if (!(window.halfwidth_us > 0.0)) throw AnalysisError("echo window needs a positive half-width");
  const double lo = window.center_us - window.halfwidth_us;
  const double hi = window.center_us + window.halfwidth_us;
  for (const auto& p : sequence.pulses)
    if (p.t_on_us < hi - kTimeTol && p.t_off_us() > lo + kTimeTol)
      throw AnalysisError("echo window [" + fixed(lo) + ", " + fixed(hi) + "] us overlaps pulse '" +
                          p.name + "'");
  auto [first, last] = window_indices(traces, window);

  EchoReport r;
  r.silence_threshold = threshold;
  std::size_t best = first;
  for (std::size_t k = first; k <= last; ++k) {
    if (std::abs(traces.im12(k)) > r.amplitude) {
      r.amplitude = std::abs(traces.im12(k));
      best = k;
    }
  }
  r.echo_time_us = traces.times[best];
  r.peak_im = traces.im12(best);
  r.reference_sign = reference_sign(traces, sequence);
  const int peak_sign = (r.peak_im > 0.0) - (r.peak_im < 0.0);
  if (r.amplitude < threshold || peak_sign == 0) {
    r.character = EchoCharacter::silent;
  } else {
    r.character = peak_sign == r.reference_sign ? EchoCharacter::absorptive : EchoCharacter::emissive;
  }
  return r;
}

PulseSequence bare_reference(const PulseSequence& sequence) {
  PulseSequence out = sequence;
  std::erase_if(out.pulses, [](const Pulse& p) { return is_stark(p) || p.channel == Channel::control; });
  return out;
}

Simulation Simulation::from(const PulseSequence& sequence) {
  return {build_ensemble(sequence.ensemble), DecayRates{}, PropagationConfig::from(sequence)};
}

TraceSet Simulation::run(const PulseSequence& sequence, bool keep_groups) const {
  return propagate_ensemble(sequence, ensemble, gamma, config, keep_groups);
}

double relative_linf(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_linf: length mismatch");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

std::vector<std::complex<double>> rho12_series(const TraceSet& traces, double t0_us, double t1_us) {
  std::vector<std::complex<double>> out;
  for (std::size_t k = traces.index_of(t0_us); k <= traces.index_of(t1_us); ++k)
    out.push_back(traces.rho12(k));
  return out;
}

// --- efficiency sweep ----------------------------------------------------

namespace {

const Pulse& first_rephasing_after(const PulseSequence& seq, const Pulse& data) {
  const Pulse* best = nullptr;
  for (const auto& p : seq.pulses) {
    if (&p == &data || p.channel != Channel::probe || p.detune_mhz != 0.0) continue;
    if (p.t_on_us < data.t_off_us() - kTimeTol) continue;
    if (best == nullptr || p.t_on_us < best->t_on_us) best = &p;
  }
  if (best == nullptr) throw AnalysisError("sequence has no rephasing pulse after the data pulse");
  return *best;
}

struct SweepSetup {
  std::string stark;
  EchoWindow window;
  double threshold = 0.0;
  double bare_amplitude = 0.0;
  double bare_homogeneous = 0.0;
  Simulation homogeneous;
};

SweepSetup prepare_sweep(const PulseSequence& base, const Simulation& sim) {
  SweepSetup s;
  s.stark = sweep_stark_pulse(base).name;
  const PulseSequence bare = bare_reference(base);
  const OraclePrediction bare_prediction = oracle_predict(bare);
  if (bare_prediction.echoes.empty()) throw AnalysisError("base sequence forms no echo");
  s.window = clear_window(bare, sim.config.t_end_us, bare_prediction.echoes.front().effective_time_us);
  const TraceSet bare_traces = sim.run(bare);
  s.threshold = silence_threshold(bare_traces, s.window);
  s.bare_amplitude = window_peak(bare_traces, s.window);
  s.homogeneous = sim;
  s.homogeneous.ensemble = resonant_only(sim.ensemble);
  s.bare_homogeneous = window_peak(s.homogeneous.run(bare), s.window);
  return s;
}

PulseSequence with_stark(const PulseSequence& base, const std::string& name, double phi,
                         double offset_mhz) {
  PulseSequence out = base;
  auto it = std::find_if(out.pulses.begin(), out.pulses.end(),
                         [&](const Pulse& p) { return p.name == name; });
  if (phi == 0.0) {
    out.pulses.erase(it);
    return out;
  }
  it->duration_us = duration_for_phase(*it, phi);
  it->detune_mhz += offset_mhz;
  require_valid(out);
  return out;
}

EchoReport e1_report(const PulseSequence& variant, const Simulation& sim, const SweepSetup& setup) {
  return detect_echo(sim.run(variant), variant, setup.window, setup.threshold);
}

}  // namespace

const Pulse& sweep_stark_pulse(const PulseSequence& base) {
  const Pulse* data = data_pulse(base);
  if (data == nullptr) throw AnalysisError("sequence has no data pulse");
  const Pulse& r1 = first_rephasing_after(base, *data);
  const Pulse* found = nullptr;
  int count = 0;
  for (const auto& p : base.pulses) {
    if (!is_stark(p)) continue;
    if (p.t_on_us >= data->t_off_us() - kTimeTol && p.t_on_us < r1.t_on_us) {
      found = &p;
      ++count;
    }
  }
  if (count != 1)
    throw AnalysisError("expected exactly one Stark pulse before " + r1.name + ", found " +
                        std::to_string(count));
  return *found;
}

SweepResult efficiency_sweep(const PulseSequence& base, std::span<const double> phis,
                             const Simulation& sim) {
  require_valid(base);
  const SweepSetup setup = prepare_sweep(base, sim);

  SweepResult out;
  out.stark_pulse = setup.stark;
  out.generalized_rabi_mhz = generalized_rabi_mhz(*base.find(setup.stark));
  out.silence_threshold = setup.threshold;
  out.bare_amplitude = setup.bare_amplitude;
  out.bare_amplitude_homogeneous = setup.bare_homogeneous;
  out.window = setup.window;
  for (double phi : phis) {
    if (!(phi >= 0.0)) throw AnalysisError("Stark phases must be non-negative");
    const PulseSequence variant = with_stark(base, setup.stark, phi, 0.0);
    const EchoReport r = e1_report(variant, sim, setup);
    const EchoReport h = e1_report(variant, setup.homogeneous, setup);
    out.rows.push_back({phi, r.amplitude, r.amplitude * r.amplitude, r.signed_amplitude(), h.amplitude});
  }
  return out;
}

std::vector<std::vector<double>> sweep_2d(const PulseSequence& base, std::span<const double> phis,
                                          std::span<const double> offsets_mhz, const Simulation& sim) {
  require_valid(base);
  const SweepSetup setup = prepare_sweep(base, sim);
  std::vector<std::vector<double>> out;
  for (double offset : offsets_mhz) {
    auto& row = out.emplace_back();
    for (double phi : phis) {
      if (!(phi >= 0.0)) throw AnalysisError("Stark phases must be non-negative");
      row.push_back(e1_report(with_stark(base, setup.stark, phi, offset), sim, setup).amplitude);
    }
  }
  return out;
}

// --- simulation vs oracle ------------------------------------------------

bool CompareReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const EchoCheck& c) { return c.passed(); });
}

CompareReport compare(const TraceSet& traces, const TraceSet& bare, const PulseSequence& sequence,
                      const OraclePrediction& prediction) {
  CompareReport out;
  const double t_end = traces.times.empty() ? 0.0 : traces.times.back();
  for (const auto& echo : prediction.echoes) {
    EchoCheck c;
    c.predicted = echo;
    c.window = clear_window(sequence, t_end, echo.effective_time_us);
    c.simulated = detect_echo(traces, sequence, c.window, silence_threshold(bare, c.window));
    c.character_ok = c.simulated.character == echo.character;
    c.time_ok = echo.character == EchoCharacter::silent ||
                std::abs(c.simulated.echo_time_us - echo.effective_time_us) <= traces.dt_us + kTimeTol;
    out.checks.push_back(std::move(c));
  }

  // Compare against the bare run once the last Stark pulse is over.
  double last_stark = -1.0;
  for (const auto& p : sequence.pulses)
    if (is_stark(p)) last_stark = std::max(last_stark, p.t_off_us());
  if (last_stark >= 0.0 && bare.size() == traces.size() && !prediction.echoes.empty()) {
    const OraclePrediction bare_prediction = oracle_predict(bare_reference(sequence));
    bool same = bare_prediction.echoes.size() == prediction.echoes.size();
    for (std::size_t i = 0; same && i < prediction.echoes.size(); ++i)
      same = bare_prediction.echoes[i].character == prediction.echoes[i].character;
    const double linf = relative_linf(rho12_series(traces, last_stark, t_end),
                                      rho12_series(bare, last_stark, t_end));
    out.notes.push_back(std::string(same ? "balanced: matches bare" : "unbalanced: differs from bare") +
                        " (macroscopic rho12 relative L-inf after t=" + fixed(last_stark, 2) +
                        " us: " + fixed(linf) + ")");
  }
  return out;
}

EchoAnalysis analyze(const PulseSequence& sequence, const Simulation& sim, bool keep_groups) {
  require_valid(sequence);
  EchoAnalysis a;
  a.prediction = oracle_predict(sequence);
  a.traces = sim.run(sequence, keep_groups);
  const PulseSequence bare = bare_reference(sequence);
  a.bare = bare.pulses.size() == sequence.pulses.size() ? a.traces : sim.run(bare);
  a.report = compare(a.traces, a.bare, sequence, a.prediction);
  return a;
}

}  // namespace starkecho
