#include <cmath>

#include <doctest.h>

#include "starkecho/analysis.hpp"
#include "starkecho/units.hpp"
#include "support.hpp"

using namespace starkecho;

namespace {

EchoReport detect(const std::string& name, double center) {
  const auto seq = preset(name);
  const auto& bare = testing::preset_run("figS1a");
  const EchoWindow w{center, 1.0};
  return detect_echo(testing::preset_run(name), seq, w, silence_threshold(bare, w));
}

double echo_time(const OraclePrediction& p, const char* label) {
  const auto* e = p.find(label);
  REQUIRE(e != nullptr);
  return e->nominal_time_us;
}

}  // namespace

TEST_CASE("reference sign after the data pulse") {
  const auto& t = testing::preset_run("figS1a");
  const auto seq = preset("figS1a");
  const int s = reference_sign(t, seq);
  CHECK(std::abs(s) == 1);
  CHECK(s == (t.im12(t.index_of(1.15)) > 0 ? 1 : -1));
  CHECK(data_pulse(seq)->name == "D");
}

TEST_CASE("detect_echo classifies the bare and erased echoes") {
  const auto e1 = detect("figS1a", 13.0);
  CHECK(e1.character == EchoCharacter::emissive);
  // Finite square pulses delay the peak slightly past 13 us.
  CHECK(e1.echo_time_us == doctest::Approx(13.0).epsilon(0.1 / 13));
  CHECK(e1.signed_amplitude() > 0.0);
  CHECK(e1.silence_threshold == doctest::Approx(0.05 * e1.amplitude));

  const auto e2 = detect("figS1a", 21.0);
  CHECK(e2.character == EchoCharacter::absorptive);
  CHECK(e2.echo_time_us == doctest::Approx(21.0).epsilon(0.1 / 21));
  CHECK(e2.signed_amplitude() < 0.0);

  const auto silent = detect("fig1b", 13.0);
  CHECK(silent.character == EchoCharacter::silent);
  CHECK(silent.amplitude < silent.silence_threshold);
}

TEST_CASE("detect_echo rejects bad windows") {
  const auto seq = preset("figS1a");
  const auto& t = testing::preset_run("figS1a");
  CHECK_THROWS_AS(detect_echo(t, seq, {7.0, 1.0}, 0.01), AnalysisError);
  CHECK_THROWS_AS(detect_echo(t, seq, {24.5, 1.0}, 0.01), AnalysisError);
  CHECK_THROWS_AS(detect_echo(t, seq, {13.0, 0.0}, 0.01), AnalysisError);
  const auto w = clear_window(seq, 25.0, 7.5, 1.0);
  CHECK(w.center_us == 7.5);
  CHECK(w.halfwidth_us == doctest::Approx(0.4));
  CHECK_NOTHROW(detect_echo(t, seq, w, 0.01));
}

TEST_CASE("bare_reference strips Stark and control pulses") {
  const auto bare = bare_reference(preset("fig4a"));
  CHECK(equivalent(bare, preset("figS1a")));
}

TEST_CASE("oracle: bare double rephasing") {
  const auto p = oracle_predict(preset("figS1a"));
  REQUIRE(p.echoes.size() == 2);
  CHECK(echo_time(p, "e1") == doctest::Approx(13.0));
  CHECK(echo_time(p, "e2") == doctest::Approx(21.0));
  CHECK(p.find("e1")->character == EchoCharacter::emissive);
  CHECK(p.find("e1")->quadrature == Quadrature::imaginary);
  CHECK(p.find("e2")->character == EchoCharacter::absorptive);
  CHECK(p.ledger.size() == 3);
  CHECK(p.ledger[0].role == PulseRole::data);
  CHECK(p.ledger[1].role == PulseRole::rephasing);
  CHECK(std::abs(p.ledger[0].coherence - std::complex<double>(0, 1)) < 1e-12);
}

TEST_CASE("oracle: unbalanced Stark pair silences e1, e2 absorptive") {
  const auto p = oracle_predict(preset("fig3a"));
  CHECK(p.find("e1")->quadrature == Quadrature::real);
  CHECK(p.find("e1")->character == EchoCharacter::silent);
  CHECK(p.find("e2")->character == EchoCharacter::absorptive);
  CHECK(echo_time(p, "e2") == doctest::Approx(21.0));
  CHECK(p.ledger[1].role == PulseRole::stark);
  CHECK(p.ledger[1].notation == "-r rho(t_AC1)");
}

TEST_CASE("oracle: balanced Stark pair behaves like the bare sequence") {
  const auto a = oracle_predict(preset("fig3b"));
  const auto b = oracle_predict(preset("figS1a"));
  REQUIRE(a.echoes.size() == b.echoes.size());
  for (std::size_t i = 0; i < a.echoes.size(); ++i) {
    CHECK(a.echoes[i].character == b.echoes[i].character);
    CHECK(a.echoes[i].nominal_time_us == doctest::Approx(b.echoes[i].nominal_time_us));
    CHECK(std::abs(a.echoes[i].coherence - b.echoes[i].coherence) < 1e-12);
  }
}

TEST_CASE("oracle: control 2pi pulse makes e2 emissive") {
  const auto p = oracle_predict(preset("fig4a"));
  CHECK(p.find("e1")->character == EchoCharacter::silent);
  CHECK(p.find("e2")->character == EchoCharacter::emissive);
  CHECK(echo_time(p, "e2") == doctest::Approx(21.0));
  CHECK(p.ledger.back().role == PulseRole::control);
}

TEST_CASE("oracle: fig1b erases both echoes") {
  const auto p = oracle_predict(preset("fig1b"));
  CHECK(p.find("e1")->character == EchoCharacter::silent);
  CHECK(p.find("e1")->relative_amplitude == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("oracle: unclassifiable pulse names the pulse") {
  PulseSequence s = preset("figS1a");
  s.pulses[1].rabi_mhz = 2.5 * 0.7;  // 0.7 pi
  try {
    oracle_predict(s);
    FAIL("expected an OracleError");
  } catch (const OracleError& e) {
    CHECK(e.pulse() == "R1");
  }
  Pulse odd{"C", Channel::control, 17.1, 0.2, 1.25, 0.0};  // pi on the control channel
  CHECK_THROWS_AS(classify(odd, false), OracleError);
  CHECK(classify({"n", Channel::probe, 0, 0.1, 5.0, 0.0}, true) == PulseRole::nutation);
  CHECK(classify({"r", Channel::probe, 0, 0.1, 2.6, 0.0}, false) == PulseRole::rephasing);
}

TEST_CASE("oracle: arrival law for other timings") {
  PulseSequence s = preset("figS1a");
  s.pulses[1].t_on_us = 5.0;   // R1
  s.pulses[2].t_on_us = 12.0;  // R2
  const auto p = oracle_predict(s);
  CHECK(echo_time(p, "e1") == doctest::Approx(9.0));
  CHECK(echo_time(p, "e2") == doctest::Approx(15.0));
}

TEST_CASE("compare: presets agree with the oracle") {
  for (const char* name : {"figS1a", "fig1b", "fig3a", "fig3b", "fig4a"}) {
    CAPTURE(name);
    const auto seq = preset(name);
    const auto r = compare(testing::preset_run(name), testing::preset_run("figS1a"), seq, oracle_predict(seq));
    CHECK(r.passed());
    CHECK(r.checks.size() == 2);
  }
  const auto seq = preset("fig3b");
  const auto r = compare(testing::preset_run("fig3b"), testing::preset_run("figS1a"), seq, oracle_predict(seq));
  REQUIRE(!r.notes.empty());
  CHECK(r.notes[0].rfind("balanced: matches bare", 0) == 0);
}

TEST_CASE("compare: a wrong prediction fails and names the echo") {
  const auto seq = preset("figS1a");
  auto p = oracle_predict(seq);
  p.echoes[1].character = EchoCharacter::emissive;
  const auto r = compare(testing::preset_run("figS1a"), testing::preset_run("figS1a"), seq, p);
  CHECK_FALSE(r.passed());
  CHECK(r.checks[0].passed());
  CHECK_FALSE(r.checks[1].passed());
  CHECK(r.checks[1].predicted.label == "e2");
}

TEST_CASE("symmetric pairs rephase at e1") {
  const auto seq = preset("figS1a");
  const auto& t = testing::preset_run("figS1a");
  const double te = oracle_predict(seq).find("e1")->effective_time_us;
  const std::size_t plus = 115, minus = 85;  // +-150 kHz
  REQUIRE(t.group_deltas_khz[plus] == -t.group_deltas_khz[minus]);
  double best = 0.0, at = 0.0;
  for (std::size_t k = t.index_of(12.0); k <= t.index_of(14.0); ++k) {
    const double v = std::abs((t.per_group[plus][k] + t.per_group[minus][k]).imag());
    if (v > best) {
      best = v;
      at = t.times[k];
    }
  }
  CHECK(std::abs(at - te) <= t.dt_us + 1e-9);
}

TEST_CASE("populations: no inversion at e2, Stark pulse barely moves rho22") {
  for (const char* name : {"figS1a", "fig3a", "fig4a"}) {
    const auto& t = testing::preset_run(name);
    const auto k = t.index_of(21.0);
    CHECK(t.population(k, 1) < t.population(k, 0));
  }
  const auto& t = testing::preset_run("fig1b");
  CHECK(std::abs(t.population(t.index_of(3.1), 1) - t.population(t.index_of(3.0), 1)) < 0.07);
}

TEST_CASE("efficiency sweep") {
  const auto base = preset("fig1b");
  const auto sim = Simulation::from(base);
  const std::vector<double> phis = {0.0, kPi / 4, kPi / 2, kPi, 3 * kPi / 2, kTwoPi};
  const auto r = efficiency_sweep(base, phis, sim);
  REQUIRE(r.rows.size() == phis.size());
  CHECK(r.stark_pulse == "AC");

  // phi = 0 is the bare sequence.
  const auto bare = detect("figS1a", 13.0);
  CHECK(r.rows[0].amplitude == doctest::Approx(bare.amplitude).epsilon(0.01));
  CHECK(r.rows[0].intensity == doctest::Approx(r.rows[0].amplitude * r.rows[0].amplitude));
  CHECK(r.rows[2].amplitude <= r.silence_threshold);
  CHECK(r.rows[4].amplitude <= r.silence_threshold);
  CHECK(r.rows[3].signed_amplitude < 0.0);

  // One resonant atom: amplitude(phi) / amplitude(0) = |cos phi|.
  for (const auto& row : r.rows)
    CHECK(std::abs(row.amplitude_homogeneous / r.bare_amplitude_homogeneous - std::abs(std::cos(row.phi))) < 1e-3);

  CHECK_THROWS_AS(efficiency_sweep(preset("figS1a"), phis, sim), AnalysisError);
  PulseSequence two = base;
  two.pulses.push_back(two.pulses.back());
  two.pulses.back().name = "AC9";
  two.pulses.back().t_on_us = 4.0;
  CHECK_THROWS_AS(sweep_stark_pulse(two), AnalysisError);
  CHECK(sweep_stark_pulse(preset("fig3a")).name == "AC1");
}

TEST_CASE("2d sweep shares the 1d code path") {
  const auto base = preset("fig1b");
  const auto sim = Simulation::from(base);
  const std::vector<double> phis = {kPi / 2};
  const std::vector<double> zero = {0.0};
  const auto one = sweep_2d(base, phis, zero, sim);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].size() == 1);
  CHECK(std::abs(one[0][0] - efficiency_sweep(base, phis, sim).rows[0].amplitude) < 1e-12);

  const std::vector<double> grid = {0.0, kPi / 3, kPi};
  const std::vector<double> offsets = {-0.5, 0.0};
  const auto m = sweep_2d(base, grid, offsets, sim);
  REQUIRE(m.size() == 2);
  for (const auto& row : m) CHECK(row.size() == 3);
  const auto line = efficiency_sweep(base, grid, sim);
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(std::abs(m[1][j] - line.rows[j].amplitude) < 1e-12);
}
