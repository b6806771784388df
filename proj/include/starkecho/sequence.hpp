#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "starkecho/ensemble.hpp"

namespace starkecho {

/// Coupling channel of a pulse: probe drives |1>-|2>, control drives |3>-|2>.
enum class Channel { probe, control };

std::string_view to_string(Channel channel);

/// Square optical pulse, active on [t_on, t_on + duration).
///
/// `rabi_mhz` is the Hamiltonian off-diagonal element in linear units, so a
/// resonant pulse rotates the Bloch vector by 2 * (2 pi rabi) * duration.
/// `detune_mhz` is added to the atom detuning on the pulse's channel; it is
/// nonzero only for ac Stark pulses.
struct Pulse {
  std::string name;
  Channel channel = Channel::probe;
  double t_on_us = 0.0;
  double duration_us = 0.1;
  double rabi_mhz = 0.0;
  double detune_mhz = 0.0;

  double t_off_us() const { return t_on_us + duration_us; }
  bool active_at(double t_us) const { return t_us >= t_on_us && t_us < t_off_us(); }
};

struct PulseSequence {
  std::vector<Pulse> pulses;
  double t_end_us = 25.0;
  double dt_us = 0.01;
  EnsembleSpec ensemble;

  const Pulse* find(std::string_view name) const;
};

/// Field-wise equality; times compare at 1e-9 us, frequencies at 1e-12 relative.
bool equivalent(const Pulse& a, const Pulse& b);
bool equivalent(const PulseSequence& a, const PulseSequence& b);

enum class ViolationCode { overlap, out_of_range, bad_pulse, duplicate_name, bad_grid, bad_ensemble };

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::vector<std::string> pulses;
  std::string message;
};

/// Empty iff the sequence is runnable.
std::vector<Violation> validate(const PulseSequence& sequence);

/// Thrown when an operation needs a valid sequence and gets an invalid one.
class SequenceError : public std::invalid_argument {
 public:
  SequenceError(const std::string& what, std::vector<Violation> violations = {})
      : std::invalid_argument(what), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

void require_valid(const PulseSequence& sequence);

/// Resonant rotation angle in radians.
double pulse_area(const Pulse& pulse);

/// A probe pulse with nonzero detuning.
bool is_stark(const Pulse& pulse);

/// Generalized Rabi frequency Omega' = sqrt(Omega^2 + Delta^2) in MHz, where
/// Omega = 2 * rabi is the population-oscillation frequency.
double generalized_rabi_mhz(const Pulse& pulse);

/// Phase added to the atomic coherence by an ac Stark pulse,
/// Phi = 2 pi Omega' tau. Throws std::invalid_argument for non-Stark pulses.
double stark_phase(const Pulse& pulse);

/// Duration that gives `phi` at the pulse's fixed Omega'.
double duration_for_phase(const Pulse& pulse, double phi);

// --- presets ------------------------------------------------------------

/// Names accepted by preset(); "figS2_detuned:<k>" selects Delta = sqrt(k) Omega.
std::vector<std::string> preset_names();

/// Throws std::invalid_argument for an unknown name.
PulseSequence preset(std::string_view name);

// --- text format --------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

/// Parses and validates the line-oriented pulse-program format.
PulseSequence parse_sequence(std::string_view text);

/// Canonical text: header directives, then pulses sorted by (t_on, channel, name).
std::string serialize_sequence(const PulseSequence& sequence);

}  // namespace starkecho
