#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "starkecho/sequence.hpp"
#include "starkecho/units.hpp"

using namespace starkecho;

namespace {

const std::string kHeader = "dt 0.01us\nend 25us\n";

bool has(const std::vector<Violation>& vs, ViolationCode code, std::vector<std::string> names = {}) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) {
    if (v.code != code) return false;
    for (const auto& n : names)
      if (std::find(v.pulses.begin(), v.pulses.end(), n) == v.pulses.end()) return false;
    return true;
  });
}

int error_line(const std::string& text) {
  try {
    parse_sequence(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(preset("fig4a")).empty());
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    CHECK(validate(preset(name)).empty());
  }

  PulseSequence s;
  s.pulses = {{"D", Channel::probe, 1.0, 0.2, 1.25, 0.0}, {"X", Channel::probe, 1.1, 0.1, 2.5, 0.0}};
  auto v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(has(v, ViolationCode::overlap, {"D", "X"}));

  // Different channels may overlap.
  s.pulses[1].channel = Channel::control;
  CHECK(validate(s).empty());

  // Touching pulses on one channel do not overlap.
  s.pulses = {{"D", Channel::probe, 1.0, 0.1, 1.25, 0.0}, {"X", Channel::probe, 1.1, 0.1, 2.5, 0.0}};
  CHECK(validate(s).empty());

  s.pulses = {{"late", Channel::probe, 24.95, 0.1, 1.0, 0.0}};
  CHECK(has(validate(s), ViolationCode::out_of_range, {"late"}));

  s.pulses = {{"neg", Channel::probe, -1.0, 0.1, 1.0, 0.0}};
  CHECK(has(validate(s), ViolationCode::out_of_range, {"neg"}));

  s.pulses = {{"z", Channel::probe, 1.0, 0.0, 1.0, 0.0}};
  CHECK(has(validate(s), ViolationCode::bad_pulse, {"z"}));

  s.pulses = {};
  s.ensemble.group_count = 200;
  CHECK(has(validate(s), ViolationCode::bad_ensemble));

  s = PulseSequence{};
  s.dt_us = 0.0;
  CHECK(has(validate(s), ViolationCode::bad_grid));
  CHECK_THROWS_AS(require_valid(s), SequenceError);
}

TEST_CASE("pulse_area") {
  CHECK(pulse_area({"a", Channel::probe, 0, 0.1, 5.0, 0}) == doctest::Approx(kTwoPi));
  CHECK(pulse_area({"a", Channel::probe, 0, 0.1, 2.5, 0}) == doctest::Approx(kPi));
  CHECK(pulse_area({"a", Channel::probe, 0, 0.1, 1.25, 0}) == doctest::Approx(kPi / 2));
  CHECK(pulse_area({"a", Channel::probe, 0, 0.7, 0.0, 0}) == 0.0);
  // Linear in duration.
  CHECK(pulse_area({"a", Channel::probe, 0, 0.3, 2.5, 0}) == doctest::Approx(3 * kPi));
}

TEST_CASE("stark_phase") {
  const double detune = std::sqrt(15.0) * 0.625;
  const Pulse ac{"AC", Channel::probe, 3, 0.1, 0.3125, detune};
  CHECK(generalized_rabi_mhz(ac) == doctest::Approx(2.5));
  CHECK(stark_phase(ac) == doctest::Approx(kPi / 2));

  Pulse twice = ac;
  twice.duration_us = 0.2;
  CHECK(stark_phase(twice) == doctest::Approx(kPi));

  // Degree-1 homogeneous in (rabi, detune).
  Pulse scaled = ac;
  scaled.rabi_mhz *= 3;
  scaled.detune_mhz *= 3;
  CHECK(stark_phase(scaled) == doctest::Approx(3 * stark_phase(ac)));

  CHECK(duration_for_phase(ac, kPi / 4) == doctest::Approx(0.05));
  CHECK(duration_for_phase(ac, kPi) == doctest::Approx(0.2));

  CHECK_THROWS_AS(stark_phase({"R", Channel::probe, 0, 0.1, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(stark_phase({"C", Channel::control, 0, 0.1, 1.0, 1.0}), std::invalid_argument);
  CHECK_FALSE(is_stark({"C", Channel::control, 0, 0.1, 1.0, 1.0}));
}

TEST_CASE("presets") {
  const auto fig1b = preset("fig1b");
  CHECK(fig1b.pulses.size() == 4);
  REQUIRE(fig1b.find("AC") != nullptr);
  CHECK(stark_phase(*fig1b.find("AC")) == doctest::Approx(kPi / 2));
  CHECK(fig1b.find("AC")->t_on_us == 3.0);

  const auto s1 = preset("figS1a");
  REQUIRE(s1.pulses.size() == 3);
  for (const auto& p : s1.pulses) CHECK(p.detune_mhz == 0.0);
  CHECK(s1.find("D")->t_on_us == 1.0);
  CHECK(s1.find("R1")->t_on_us == 7.0);
  CHECK(s1.find("R2")->t_on_us == 17.0);
  CHECK(pulse_area(*s1.find("D")) == doctest::Approx(kPi / 2));
  CHECK(pulse_area(*s1.find("R1")) == doctest::Approx(kPi));

  const auto f4 = preset("fig4a");
  CHECK(f4.pulses.size() == 6);
  CHECK(std::count_if(f4.pulses.begin(), f4.pulses.end(),
                      [](const Pulse& p) { return p.channel == Channel::control; }) == 1);
  CHECK(pulse_area(*f4.find("C")) == doctest::Approx(kTwoPi));
  CHECK(f4.find("C")->t_on_us == doctest::Approx(17.1));
  CHECK(f4.find("C")->duration_us == doctest::Approx(0.2));

  CHECK(preset("fig3a").find("AC2")->t_on_us == 15.0);
  CHECK(preset("fig3b").find("AC2")->t_on_us == 10.0);

  for (const auto& name : {"figS1a", "fig1b", "fig3a", "fig3b", "fig4a"}) {
    const auto s = preset(name);
    CHECK(s.dt_us == 0.01);
    CHECK(s.t_end_us == 25.0);
    CHECK(s.ensemble == EnsembleSpec{850, 10, 201});
    for (const auto& p : s.pulses)
      if (p.channel == Channel::probe) CHECK(p.duration_us == 0.1);
  }

  CHECK(pulse_area(*preset("figS2_resonant").find("D")) == doctest::Approx(kTwoPi));
  const auto d15 = preset("figS2_detuned:15");
  CHECK(d15.find("AC")->detune_mhz == doctest::Approx(std::sqrt(15.0) * 2.5));

  CHECK_THROWS_AS(preset("fig9"), std::invalid_argument);
  CHECK_THROWS_AS(preset("figS2_detuned:x"), std::invalid_argument);
}

TEST_CASE("parse a pulse line") {
  const auto s = parse_sequence(kHeader + "pulse name=D channel=probe at=1us dur=0.1us rabi=1.25MHz detune=0MHz\n");
  REQUIRE(s.pulses.size() == 1);
  const Pulse& p = s.pulses[0];
  CHECK(p.name == "D");
  CHECK(p.channel == Channel::probe);
  CHECK(p.t_on_us == 1.0);
  CHECK(p.duration_us == 0.1);
  CHECK(p.rabi_mhz == 1.25);
  CHECK(p.detune_mhz == 0.0);
  CHECK(s.dt_us == 0.01);
  CHECK(s.t_end_us == 25.0);
  CHECK(s.ensemble == EnsembleSpec{});
}

TEST_CASE("parse units, comments and ensemble") {
  const auto s = parse_sequence(
      "# a comment\n"
      "dt 10ns\n"
      "end 0.025ms\n"
      "ensemble fwhm=0.85MHz spacing=20kHz groups=101   # trailing\n"
      "\n"
      "pulse name=AC channel=probe at=3000ns dur=0.1us rabi=312.5kHz detune=-2MHz\n");
  CHECK(s.dt_us == doctest::Approx(0.01));
  CHECK(s.t_end_us == doctest::Approx(25.0));
  CHECK(s.ensemble.fwhm_khz == doctest::Approx(850));
  CHECK(s.ensemble.spacing_khz == 20);
  CHECK(s.ensemble.group_count == 101);
  CHECK(s.pulses[0].t_on_us == doctest::Approx(3.0));
  CHECK(s.pulses[0].rabi_mhz == doctest::Approx(0.3125));
  CHECK(s.pulses[0].detune_mhz == -2.0);
}

TEST_CASE("parse errors carry the line") {
  const std::string good = "pulse name=D channel=probe at=1us dur=0.1us rabi=1.25MHz\n";
  CHECK(error_line(kHeader + "pulse name=D channel=sideways at=1us dur=0.1us rabi=1.25MHz\n") == 3);
  try {
    parse_sequence(kHeader + "pulse name=D channel=sideways at=1us dur=0.1us rabi=1.25MHz\n");
  } catch (const ParseError& e) {
    CHECK(e.message().find("channel") != std::string::npos);
    CHECK(e.column() == 22);
  }
  CHECK(error_line(kHeader + "pulse name=D channel=probe at=1us dur=0.1us rabi=1.25MHz colour=red\n") == 3);
  CHECK(error_line(kHeader + "pulse name=D channel=probe at=1furlong dur=0.1us rabi=1.25MHz\n") == 3);
  CHECK(error_line(kHeader + "pulse name=D channel=probe at=1 dur=0.1us rabi=1.25MHz\n") == 3);
  CHECK(error_line(kHeader + "pulse name=D channel=probe at=1us dur=0.1us rabi=1.25us\n") == 3);
  CHECK(error_line(kHeader + good + "\n" + good) == 5);
  CHECK(error_line(kHeader + "wiggle 3\n") == 3);
  CHECK(error_line("end 25us\n" + good) > 0);
  CHECK(error_line(kHeader + "pulse name=D channel=probe at=1us dur=0.1us\n") == 3);
  CHECK(error_line(kHeader + good + good.substr(0, good.size() - 1) + " rabi=2MHz\n") == 4);
}

TEST_CASE("parse validates") {
  CHECK_THROWS_AS(parse_sequence(kHeader + "pulse name=D channel=probe at=1us dur=0.2us rabi=1MHz\n"
                                           "pulse name=X channel=probe at=1.1us dur=0.1us rabi=1MHz\n"),
                  SequenceError);
  CHECK_THROWS_AS(parse_sequence(kHeader + "pulse name=D channel=probe at=24.95us dur=0.1us rabi=1MHz\n"),
                  SequenceError);
}

TEST_CASE("serialize round trip") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto s = preset(name);
    const std::string text = serialize_sequence(s);
    const auto back = parse_sequence(text);
    CHECK(equivalent(back, s));
    CHECK(serialize_sequence(back) == text);
  }
}

TEST_CASE("serialize sorts and uses canonical units") {
  PulseSequence s = preset("fig4a");
  std::reverse(s.pulses.begin(), s.pulses.end());
  const std::string text = serialize_sequence(s);
  CHECK(text == serialize_sequence(preset("fig4a")));
  CHECK(text.find("name=D ") < text.find("name=AC1 "));
  CHECK(text.find("name=R2 ") < text.find("name=C "));
  CHECK(text.find("dt 0.01us\n") == 0);

  PulseSequence empty;
  const std::string header = serialize_sequence(empty);
  CHECK(header == "dt 0.01us\nend 25us\nensemble fwhm=850kHz spacing=10kHz groups=201\n");
  CHECK(parse_sequence(header).pulses.empty());
}

TEST_CASE("equivalent ignores pulse order but not values") {
  PulseSequence a = preset("fig3a");
  PulseSequence b = a;
  std::swap(b.pulses[0], b.pulses[2]);
  CHECK(equivalent(a, b));
  b.pulses[0].t_on_us += 1e-6;
  CHECK_FALSE(equivalent(a, b));
}
