// Symbolic phase bookkeeping for the common coherence factor of the
// e^{+-i delta_j t} terms. The data pulse leaves i*rho; a Stark pulse
// multiplies by e^{i Phi}; a rephasing pi pulse conjugates; a control 2pi
// pulse flips the sign. Echo times follow t_e = 2 t_R - t_prev.

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "starkecho/analysis.hpp"
#include "starkecho/units.hpp"

namespace starkecho {

namespace {

constexpr double kAreaTol = 0.10;
constexpr double kSilentLevel = 0.05;
constexpr std::complex<double> kI{0.0, 1.0};

bool near_area(double area, double nominal) { return std::abs(area - nominal) <= kAreaTol * nominal; }

std::string angle_text(double phi) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g pi", phi / kPi);
  return buf;
}

Quadrature quadrature_of(std::complex<double> a) {
  return std::abs(a.imag()) >= std::abs(a.real()) ? Quadrature::imaginary : Quadrature::real;
}

// "i rho(t_X)", "-r rho(t_X)", "[r rho(t_X)]*" ...
std::string notation(std::complex<double> a, bool conjugated, const std::string& pulse) {
  if (std::abs(a) < 1e-12) return "0";
  const std::complex<double> inner = conjugated ? std::conj(a) : a;
  const bool imaginary = quadrature_of(inner) == Quadrature::imaginary;
  const double lead = imaginary ? inner.imag() : inner.real();
  std::string body = std::string(lead < 0.0 ? "-" : "") + (imaginary ? "i" : "r") + " rho(t_" + pulse + ")";
  return conjugated ? "[" + body + "]*" : body;
}

EchoCharacter character_of(std::complex<double> a) {
  if (std::abs(a.imag()) < kSilentLevel) return EchoCharacter::silent;
  // Data pulse reference is +i: same sign absorbs, opposite sign radiates.
  return a.imag() > 0.0 ? EchoCharacter::absorptive : EchoCharacter::emissive;
}

// Time origin of the free-induction phase after a square pulse of area theta,
// to first order in the atom detuning.
double effective_origin(const Pulse& p) {
  const double theta = pulse_area(p);
  return p.t_off_us() - p.duration_us * std::tan(0.5 * theta) / theta;
}

}  // namespace

std::string_view to_string(PulseRole role) {
  switch (role) {
    case PulseRole::data: return "data";
    case PulseRole::rephasing: return "rephasing";
    case PulseRole::stark: return "stark";
    case PulseRole::control: return "control";
    case PulseRole::nutation: return "nutation";
  }
  return "unknown";
}

std::string_view to_string(Quadrature q) { return q == Quadrature::imaginary ? "imaginary" : "real"; }

std::vector<double> OraclePrediction::echo_times() const {
  std::vector<double> out;
  for (const auto& e : echoes) out.push_back(e.nominal_time_us);
  return out;
}

const PredictedEcho* OraclePrediction::find(std::string_view label) const {
  for (const auto& e : echoes)
    if (e.label == label) return &e;
  return nullptr;
}

PulseRole classify(const Pulse& p, bool is_first_resonant_probe) {
  const double area = pulse_area(p);
  if (p.channel == Channel::control) {
    if (p.detune_mhz == 0.0 && near_area(area, 2.0 * kPi)) return PulseRole::control;
    throw OracleError(p.name, "pulse '" + p.name + "': control pulse with area " + angle_text(area) +
                                  " is not a 2pi pulse");
  }
  if (is_stark(p)) return PulseRole::stark;
  if (near_area(area, 2.0 * kPi)) return PulseRole::nutation;
  if (is_first_resonant_probe && near_area(area, 0.5 * kPi)) return PulseRole::data;
  if (!is_first_resonant_probe && near_area(area, kPi)) return PulseRole::rephasing;
  throw OracleError(p.name, "pulse '" + p.name + "': probe pulse with area " + angle_text(area) +
                                " is neither pi/2 data, pi rephasing nor 2pi");
}

OraclePrediction oracle_predict(const PulseSequence& sequence) {
  std::vector<const Pulse*> order;
  for (const auto& p : sequence.pulses) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(),
                   [](const Pulse* a, const Pulse* b) { return a->t_on_us < b->t_on_us; });

  OraclePrediction out;
  std::complex<double> coherence = 0.0;
  bool conjugated = false;
  bool first_resonant = true;
  bool have_data = false;

  // Reference instant of the last (possibly virtual) echo.
  double ref_nominal = 0.0;
  double ref_effective = 0.0;
  bool pending = false;
  double pending_nominal = 0.0;
  double pending_effective = 0.0;

  auto emit_pending = [&] {
    if (!pending) return;
    pending = false;
    if (pending_nominal > sequence.t_end_us) return;
    PredictedEcho e;
    e.label = "e" + std::to_string(out.echoes.size() + 1);
    e.nominal_time_us = pending_nominal;
    e.effective_time_us = pending_effective;
    e.coherence = coherence;
    e.quadrature = quadrature_of(coherence);
    e.character = character_of(coherence);
    e.relative_amplitude = std::abs(coherence.imag());
    out.echoes.push_back(e);
  };

  for (const Pulse* p : order) {
    if (pending && p->t_on_us >= pending_nominal) emit_pending();

    const bool resonant_probe = p->channel == Channel::probe && !is_stark(*p);
    const PulseRole role = classify(*p, resonant_probe && first_resonant);
    if (resonant_probe) first_resonant = false;

    LedgerEntry entry{p->name, role, p->t_off_us(), "", 0.0, ""};
    switch (role) {
      case PulseRole::data:
        coherence = kI;
        have_data = true;
        ref_nominal = p->t_on_us;
        ref_effective = effective_origin(*p);
        entry.transform = "creates coherence i rho, phase exp(+-i d t)";
        break;
      case PulseRole::stark: {
        const double phi = stark_phase(*p);
        coherence *= std::exp(kI * phi);
        entry.transform = "exp(+-i d t) -> exp(+-i d t + i Phi), Phi = " + angle_text(phi);
        break;
      }
      case PulseRole::rephasing:
        if (have_data) {
          // A rephasing pulse before the pending echo cancels it; the law
          // still runs from that virtual echo time.
          if (pending) {
            ref_nominal = pending_nominal;
            ref_effective = pending_effective;
            pending = false;
          }
          coherence = std::conj(coherence);
          conjugated = !conjugated;
          pending = true;
          pending_nominal = 2.0 * p->t_on_us - ref_nominal;
          pending_effective = 2.0 * (p->t_on_us + 0.5 * p->duration_us) - ref_effective;
          ref_nominal = pending_nominal;
          ref_effective = pending_effective;
        }
        entry.transform = "conjugate: exp(+-i d t) -> exp(-+i d t)";
        break;
      case PulseRole::control:
        coherence = -coherence;
        entry.transform = "invert: rho12 -> -rho12";
        break;
      case PulseRole::nutation:
        entry.transform = "identity (full Rabi cycle)";
        break;
    }
    if (!have_data) entry.transform += " [no coherence yet]";
    entry.coherence = coherence;
    entry.notation = notation(coherence, conjugated, p->name);
    out.ledger.push_back(std::move(entry));
  }
  emit_pending();
  return out;
}

}  // namespace starkecho
