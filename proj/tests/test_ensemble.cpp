#include <cmath>

#include <doctest.h>

#include "starkecho/analysis.hpp"
#include "starkecho/ensemble.hpp"
#include "support.hpp"

using namespace starkecho;

TEST_CASE("sigma puts half maximum at fwhm/2") {
  const double s = gaussian_sigma(850.0);
  CHECK(std::exp(-425.0 * 425.0 / (2 * s * s)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s == doctest::Approx(360.96).epsilon(1e-4));
  CHECK(build_ensemble({}).sigma_khz() == s);
}

TEST_CASE("default ensemble: 201 groups on a uniform grid spanning +-1000 kHz") {
  const Ensemble e = build_ensemble({850, 10, 201});
  REQUIRE(e.size() == 201);
  CHECK(e.groups.front().delta_khz == -1000.0);
  CHECK(e.groups.back().delta_khz == 1000.0);
  CHECK(e.groups[100].delta_khz == 0.0);
  for (std::size_t j = 1; j < e.size(); ++j)
    CHECK(e.groups[j].delta_khz - e.groups[j - 1].delta_khz == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("raw coverage matches the Gaussian mass of the grid") {
  const Ensemble e = build_ensemble({850, 10, 201});
  CHECK(e.raw_coverage >= 0.9940);
  CHECK(e.raw_coverage <= 0.9960);
  // Midpoint sum over 201 bins approximates the mass over +-1005 kHz.
  const double mass = std::erf(1005.0 / (e.sigma_khz() * std::sqrt(2.0)));
  CHECK(e.raw_coverage == doctest::Approx(mass).epsilon(1e-4));

  const Ensemble b = build_ensemble({850, 10, 201}, BinRule::bin_integral);
  CHECK(b.raw_coverage == doctest::Approx(mass).epsilon(1e-12));
}

TEST_CASE("weights are normalized, positive and symmetric") {
  for (auto rule : {BinRule::midpoint, BinRule::bin_integral})
    for (EnsembleSpec spec : {EnsembleSpec{850, 10, 201}, EnsembleSpec{850, 5, 401}, EnsembleSpec{300, 50, 7}}) {
      const Ensemble e = build_ensemble(spec, rule);
      double sum = 0.0;
      for (const auto& g : e.groups) {
        CHECK(g.weight > 0.0);
        sum += g.weight;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      for (std::size_t j = 0; j < e.size(); ++j) CHECK(e.groups[j].weight == e.groups[e.size() - 1 - j].weight);
      CHECK(e.raw_coverage > 0.0);
      CHECK(e.raw_coverage <= 1.0);
    }
}

TEST_CASE("single group ensemble") {
  const Ensemble e = build_ensemble({850, 10, 1});
  REQUIRE(e.size() == 1);
  CHECK(e.groups[0].delta_khz == 0.0);
  CHECK(e.groups[0].weight == 1.0);
}

TEST_CASE("bad specs are rejected") {
  CHECK_THROWS_AS(build_ensemble({0, 10, 201}), EnsembleError);
  CHECK_THROWS_AS(build_ensemble({-850, 10, 201}), EnsembleError);
  CHECK_THROWS_AS(build_ensemble({850, 0, 201}), EnsembleError);
  CHECK_THROWS_AS(build_ensemble({850, 10, 200}), EnsembleError);
  CHECK_THROWS_AS(build_ensemble({850, 10, 0}), EnsembleError);
  CHECK_THROWS_AS(build_ensemble({NAN, 10, 201}), EnsembleError);
}

TEST_CASE("resonant_only") {
  const Ensemble full = build_ensemble({});
  const Ensemble r = resonant_only(full);
  REQUIRE(r.size() == 1);
  CHECK(r.groups[0].delta_khz == 0.0);
  CHECK(r.groups[0].weight == 1.0);
  CHECK(r.raw_coverage > 0.0);
  CHECK(r.raw_coverage <= 1.0);
  const Ensemble again = resonant_only(r);
  REQUIRE(again.size() == 1);
  CHECK(again.groups[0].delta_khz == 0.0);
  CHECK(again.groups[0].weight == 1.0);
}

TEST_CASE("bin rule and grid refinement move the macroscopic trace by under 1%") {
  const PulseSequence seq = preset("figS1a");
  const auto& base = testing::preset_run("figS1a");
  const auto ref = rho12_series(base, 0.0, seq.t_end_us);

  SUBCASE("bin integral weights") {
    Simulation sim = Simulation::from(seq);
    sim.ensemble = build_ensemble(seq.ensemble, BinRule::bin_integral);
    const auto t = sim.run(seq);
    CHECK(relative_linf(rho12_series(t, 0.0, seq.t_end_us), ref) < 0.01);
  }
  SUBCASE("half spacing, doubled span") {
    PulseSequence fine = seq;
    fine.ensemble = {850, 5, 401};
    const auto t = Simulation::from(fine).run(fine);
    CHECK(relative_linf(rho12_series(t, 0.0, seq.t_end_us), ref) < 0.01);
  }
}
