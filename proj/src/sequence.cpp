#include "starkecho/sequence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "starkecho/units.hpp"

namespace starkecho {

std::string_view to_string(Channel channel) {
  return channel == Channel::probe ? "probe" : "control";
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::overlap: return "overlap";
    case ViolationCode::out_of_range: return "out-of-range";
    case ViolationCode::bad_pulse: return "bad-pulse";
    case ViolationCode::duplicate_name: return "duplicate-name";
    case ViolationCode::bad_grid: return "bad-grid";
    case ViolationCode::bad_ensemble: return "bad-ensemble";
  }
  return "unknown";
}

const Pulse* PulseSequence::find(std::string_view name) const {
  for (const auto& p : pulses)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

constexpr double kTimeTol = 1e-9;

bool close_time(double a, double b) { return std::abs(a - b) <= kTimeTol; }

bool close_value(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool equivalent(const Pulse& a, const Pulse& b) {
  return a.name == b.name && a.channel == b.channel && close_time(a.t_on_us, b.t_on_us) &&
         close_time(a.duration_us, b.duration_us) && close_value(a.rabi_mhz, b.rabi_mhz) &&
         close_value(a.detune_mhz, b.detune_mhz);
}

bool equivalent(const PulseSequence& a, const PulseSequence& b) {
  if (a.pulses.size() != b.pulses.size()) return false;
  if (!close_time(a.t_end_us, b.t_end_us) || !close_time(a.dt_us, b.dt_us)) return false;
  if (!(a.ensemble == b.ensemble)) return false;
  // Pulse order is not part of the value.
  for (const auto& p : a.pulses) {
    const Pulse* q = b.find(p.name);
    if (q == nullptr || !equivalent(p, *q)) return false;
  }
  return true;
}

std::vector<Violation> validate(const PulseSequence& seq) {
  std::vector<Violation> out;

  if (!(seq.dt_us > 0.0) || !(seq.t_end_us > 0.0)) {
    out.push_back({ViolationCode::bad_grid, {}, "dt and end must be positive"});
  } else if (seq.t_end_us / seq.dt_us > 1e7) {
    out.push_back({ViolationCode::bad_grid, {}, "more than 1e7 time steps"});
  }

  try {
    check_spec(seq.ensemble);
  } catch (const EnsembleError& e) {
    out.push_back({ViolationCode::bad_ensemble, {}, e.what()});
  }

  std::set<std::string> seen;
  for (const auto& p : seq.pulses) {
    if (!seen.insert(p.name).second)
      out.push_back({ViolationCode::duplicate_name, {p.name}, "pulse name used twice"});
    if (p.name.empty())
      out.push_back({ViolationCode::bad_pulse, {p.name}, "pulse name is empty"});
    if (!(p.duration_us > 0.0))
      out.push_back({ViolationCode::bad_pulse, {p.name}, "duration must be positive"});
    if (!(p.rabi_mhz >= 0.0))
      out.push_back({ViolationCode::bad_pulse, {p.name}, "rabi must be non-negative"});
    if (!std::isfinite(p.detune_mhz))
      out.push_back({ViolationCode::bad_pulse, {p.name}, "detune must be finite"});
    if (!(p.t_on_us >= 0.0))
      out.push_back({ViolationCode::out_of_range, {p.name}, "pulse starts before t=0"});
    if (p.t_off_us() > seq.t_end_us + kTimeTol)
      out.push_back({ViolationCode::out_of_range, {p.name}, "pulse ends after end time"});
  }

  for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.pulses.size(); ++j) {
      const Pulse& a = seq.pulses[i];
      const Pulse& b = seq.pulses[j];
      if (a.channel != b.channel) continue;
      const double start = std::max(a.t_on_us, b.t_on_us);
      const double stop = std::min(a.t_off_us(), b.t_off_us());
      if (stop - start > kTimeTol)
        out.push_back({ViolationCode::overlap, {a.name, b.name},
                       "pulses overlap on the " + std::string(to_string(a.channel)) + " channel"});
    }
  }
  return out;
}

void require_valid(const PulseSequence& seq) {
  auto violations = validate(seq);
  if (violations.empty()) return;
  std::string what = "invalid sequence:";
  for (const auto& v : violations) {
    what += " [" + std::string(to_string(v.code));
    for (const auto& n : v.pulses) what += " " + n;
    what += ": " + v.message + "]";
  }
  throw SequenceError(what, std::move(violations));
}

double pulse_area(const Pulse& p) { return 2.0 * angular_from_mhz(p.rabi_mhz) * p.duration_us; }

bool is_stark(const Pulse& p) { return p.channel == Channel::probe && p.detune_mhz != 0.0; }

double generalized_rabi_mhz(const Pulse& p) {
  return std::hypot(2.0 * p.rabi_mhz, p.detune_mhz);
}

double stark_phase(const Pulse& p) {
  if (!is_stark(p))
    throw std::invalid_argument("pulse '" + p.name + "' is not an ac Stark pulse");
  return angular_from_mhz(generalized_rabi_mhz(p)) * p.duration_us;
}

double duration_for_phase(const Pulse& p, double phi) {
  if (!is_stark(p))
    throw std::invalid_argument("pulse '" + p.name + "' is not an ac Stark pulse");
  return phi / angular_from_mhz(generalized_rabi_mhz(p));
}

// --- presets ------------------------------------------------------------

namespace {

// Data pi/2, rephasing pi, control 2pi under the 2 * Omega * tau area rule.
constexpr double kDataRabi = 1.25;
constexpr double kRephaseRabi = 2.5;
constexpr double kControlRabi = 2.5;
constexpr double kPulseDuration = 0.1;
constexpr double kControlDuration = 0.2;

// ac Stark pulse with Delta = sqrt(15) Omega and Omega' tau = 1/4 cycle,
// i.e. Phi = pi/2 at tau = 0.1 us (Omega' = 2.5 MHz, Omega = 0.625 MHz).
constexpr double kStarkOscillation = 0.625;
constexpr double kStarkRabi = kStarkOscillation / 2.0;
const double kStarkDetune = std::sqrt(15.0) * kStarkOscillation;

Pulse probe(std::string name, double t_on, double rabi, double detune = 0.0,
            double duration = kPulseDuration) {
  return {std::move(name), Channel::probe, t_on, duration, rabi, detune};
}

PulseSequence double_rephasing() {
  PulseSequence s;
  s.pulses = {probe("D", 1.0, kDataRabi), probe("R1", 7.0, kRephaseRabi),
              probe("R2", 17.0, kRephaseRabi)};
  return s;
}

PulseSequence unbalanced(double ac2_time) {
  PulseSequence s = double_rephasing();
  s.pulses.push_back(probe("AC1", 3.0, kStarkRabi, kStarkDetune));
  s.pulses.push_back(probe("AC2", ac2_time, kStarkRabi, kStarkDetune));
  return s;
}

PulseSequence rabi_demo(Pulse pulse) {
  PulseSequence s;
  s.t_end_us = 5.0;
  s.pulses = {std::move(pulse)};
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1b", "fig3a", "fig3b", "fig4a", "figS1a", "figS2_resonant", "figS2_detuned:3"};
}

PulseSequence preset(std::string_view name) {
  if (name == "figS1a") return double_rephasing();
  if (name == "fig1b") {
    PulseSequence s = double_rephasing();
    s.pulses.push_back(probe("AC", 3.0, kStarkRabi, kStarkDetune));
    return s;
  }
  if (name == "fig3a") return unbalanced(15.0);
  if (name == "fig3b") return unbalanced(10.0);
  if (name == "fig4a") {
    PulseSequence s = unbalanced(15.0);
    s.pulses.push_back({"C", Channel::control, 17.1, kControlDuration, kControlRabi, 0.0});
    return s;
  }
  if (name == "figS2_resonant") return rabi_demo(probe("D", 1.0, 5.0));

  constexpr std::string_view detuned = "figS2_detuned";
  if (name.substr(0, detuned.size()) == detuned) {
    double k = 3.0;
    auto rest = name.substr(detuned.size());
    if (!rest.empty()) {
      if (rest.front() != ':') throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
      rest.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
      if (ec != std::errc() || ptr != rest.data() + rest.size() || !(k > 0.0))
        throw std::invalid_argument("bad detuning ratio in preset '" + std::string(name) + "'");
    }
    // Population oscillation at 2 * 1.25 MHz, detuned by sqrt(k) times that.
    return rabi_demo(probe("AC", 1.0, 1.25, std::sqrt(k) * 2.5, 1.0));
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace starkecho
