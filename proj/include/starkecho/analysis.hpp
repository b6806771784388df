#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "starkecho/dynamics.hpp"
#include "starkecho/ensemble.hpp"
#include "starkecho/sequence.hpp"
#include "starkecho/trace.hpp"

namespace starkecho {

enum class EchoCharacter { emissive, absorptive, silent };
std::string_view to_string(EchoCharacter c);

/// Search interval [center - halfwidth, center + halfwidth] in us.
struct EchoWindow {
  double center_us = 0.0;
  double halfwidth_us = 1.0;
};

struct EchoReport {
  double echo_time_us = 0.0;
  double amplitude = 0.0;  // peak |Im rho_12| in the window
  double peak_im = 0.0;    // signed Im rho_12 at the peak
  EchoCharacter character = EchoCharacter::silent;
  int reference_sign = 0;  // sign of Im rho_12 just after the data pulse
  double silence_threshold = 0.0;

  /// Peak Im rho_12 relative to the post-data sign: positive for emissive echoes.
  double signed_amplitude() const { return -reference_sign * peak_im; }
};

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// First resonant probe pulse, or nullptr.
const Pulse* data_pulse(const PulseSequence& sequence);

/// Sign of macroscopic Im rho_12 sampled 0.05 us after the data pulse ends.
int reference_sign(const TraceSet& traces, const PulseSequence& sequence);

/// Largest window around `center` (up to `max_halfwidth`) that stays inside
/// the grid and clear of every pulse.
EchoWindow clear_window(const PulseSequence& sequence, double t_end_us, double center_us,
                        double max_halfwidth_us = 1.0);

/// max |Im rho_12| over the window.
double window_peak(const TraceSet& traces, EchoWindow window);

/// Silence threshold: 5% of the same-window peak of the bare reference run.
double silence_threshold(const TraceSet& bare, EchoWindow window);

/// Throws AnalysisError if the window leaves the grid or overlaps a pulse.
EchoReport detect_echo(const TraceSet& traces, const PulseSequence& sequence, EchoWindow window,
                       double threshold);

/// The sequence with every Stark and control-channel pulse removed.
PulseSequence bare_reference(const PulseSequence& sequence);

/// Everything needed to run a sequence besides the sequence itself.
struct Simulation {
  Ensemble ensemble;
  DecayRates gamma;
  PropagationConfig config;

  static Simulation from(const PulseSequence& sequence);
  TraceSet run(const PulseSequence& sequence, bool keep_groups = false) const;
};

double relative_linf(std::span<const std::complex<double>> a,
                     std::span<const std::complex<double>> b);

/// Macroscopic rho_12 series over [t0, t1] (grid points inclusive).
std::vector<std::complex<double>> rho12_series(const TraceSet& traces, double t0_us, double t1_us);

// --- efficiency sweep ----------------------------------------------------

struct SweepRow {
  double phi = 0.0;
  double amplitude = 0.0;
  double intensity = 0.0;
  double signed_amplitude = 0.0;
  double amplitude_homogeneous = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string stark_pulse;
  double generalized_rabi_mhz = 0.0;
  double silence_threshold = 0.0;
  double bare_amplitude = 0.0;
  double bare_amplitude_homogeneous = 0.0;
  EchoWindow window;
};

/// The single Stark pulse between the data pulse and the first rephasing
/// pulse; throws AnalysisError on zero or several.
const Pulse& sweep_stark_pulse(const PulseSequence& base);

/// e1 amplitude vs Stark phase. Each phi is reached by rescaling the Stark
/// pulse duration at fixed Omega'; phi = 0 drops the pulse.
SweepResult efficiency_sweep(const PulseSequence& base, std::span<const double> phis,
                             const Simulation& sim);

/// e1 amplitude per (detuning offset, phi). Row i is offsets[i], column j is
/// phis[j]. The offset (MHz) shifts the Stark detuning while the duration
/// stays at the value that gives phi for the unshifted pulse.
std::vector<std::vector<double>> sweep_2d(const PulseSequence& base, std::span<const double> phis,
                                          std::span<const double> offsets_mhz,
                                          const Simulation& sim);

// --- analytic phase oracle -------------------------------------------------

enum class PulseRole { data, rephasing, stark, control, nutation };
std::string_view to_string(PulseRole role);

enum class Quadrature { imaginary, real };
std::string_view to_string(Quadrature q);

struct LedgerEntry {
  std::string pulse;
  PulseRole role;
  double time_us;                 // end of the pulse
  std::string transform;          // what the pulse does to e^{+-i delta t}
  std::complex<double> coherence; // common coherence factor after the pulse
  std::string notation;           // e.g. "[r rho(t_R1)]*"
};

struct PredictedEcho {
  std::string label;               // e1, e2, ...
  double nominal_time_us;          // arrival-time law 2 t_R - t_prev
  double effective_time_us;        // corrected for finite square pulses
  std::complex<double> coherence;  // common factor at the echo, data pulse -> i
  Quadrature quadrature;
  EchoCharacter character;
  double relative_amplitude;       // |Im coherence|
};

struct OraclePrediction {
  std::vector<PredictedEcho> echoes;
  std::vector<LedgerEntry> ledger;

  std::vector<double> echo_times() const;
  const PredictedEcho* find(std::string_view label) const;
};

class OracleError : public std::invalid_argument {
 public:
  OracleError(const std::string& pulse, const std::string& what)
      : std::invalid_argument(what), pulse_(pulse) {}
  const std::string& pulse() const { return pulse_; }

 private:
  std::string pulse_;
};

/// Role of each pulse from channel, detuning and area (10% tolerance).
PulseRole classify(const Pulse& pulse, bool is_first_resonant_probe);

OraclePrediction oracle_predict(const PulseSequence& sequence);

// --- simulation vs oracle ------------------------------------------------

struct EchoCheck {
  PredictedEcho predicted;
  EchoReport simulated;
  EchoWindow window;
  bool time_ok = false;
  bool character_ok = false;
  bool passed() const { return time_ok && character_ok; }
};

struct CompareReport {
  std::vector<EchoCheck> checks;
  std::vector<std::string> notes;
  bool passed() const;
};

/// Checks every predicted echo against the simulated traces: peak within dt
/// of the effective time (not required for silent echoes) and same character.
CompareReport compare(const TraceSet& traces, const TraceSet& bare, const PulseSequence& sequence,
                      const OraclePrediction& prediction);

/// Runs the sequence, its bare reference, the oracle and the comparison.
struct EchoAnalysis {
  TraceSet traces;
  TraceSet bare;
  OraclePrediction prediction;
  CompareReport report;
};

EchoAnalysis analyze(const PulseSequence& sequence, const Simulation& sim, bool keep_groups = false);

}  // namespace starkecho
