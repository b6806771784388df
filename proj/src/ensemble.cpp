#include "starkecho/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace starkecho {

double gaussian_sigma(double fwhm) {
  return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

double Ensemble::sigma_khz() const { return gaussian_sigma(spec.fwhm_khz); }

void check_spec(const EnsembleSpec& spec) {
  if (!(spec.fwhm_khz > 0.0) || !std::isfinite(spec.fwhm_khz))
    throw EnsembleError("ensemble fwhm must be positive, got " + std::to_string(spec.fwhm_khz));
  if (!(spec.spacing_khz > 0.0) || !std::isfinite(spec.spacing_khz))
    throw EnsembleError("ensemble spacing must be positive, got " +
                        std::to_string(spec.spacing_khz));
  if (spec.group_count < 1 || spec.group_count % 2 == 0)
    throw EnsembleError("ensemble group count must be a positive odd integer, got " +
                        std::to_string(spec.group_count));
}

namespace {

double unnormalized_mass(double delta, double sigma, double spacing, BinRule rule) {
  if (rule == BinRule::midpoint) {
    const double z = delta / sigma;
    return spacing * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  }
  const double scale = 1.0 / (sigma * std::numbers::sqrt2);
  const double lo = (delta - 0.5 * spacing) * scale;
  const double hi = (delta + 0.5 * spacing) * scale;
  // erfc on the far side keeps tail bins accurate.
  if (lo >= 0.0) return 0.5 * (std::erfc(lo) - std::erfc(hi));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi) - std::erfc(-lo));
  return 0.5 * (std::erf(hi) - std::erf(lo));
}

}  // namespace

Ensemble build_ensemble(const EnsembleSpec& spec, BinRule rule) {
  check_spec(spec);
  const double sigma = gaussian_sigma(spec.fwhm_khz);
  const int half = (spec.group_count - 1) / 2;

  // Masses are computed once per |j| so the +-j pair is bitwise symmetric.
  std::vector<double> mass(half + 1);
  for (int j = 0; j <= half; ++j)
    mass[j] = unnormalized_mass(j * spec.spacing_khz, sigma, spec.spacing_khz, rule);

  double total = mass[0];
  for (int j = half; j >= 1; --j) total += 2.0 * mass[j];

  Ensemble out;
  out.spec = spec;
  out.raw_coverage = std::min(total, 1.0);
  out.groups.reserve(spec.group_count);
  for (int j = -half; j <= half; ++j) {
    const int a = j < 0 ? -j : j;
    out.groups.push_back({j * spec.spacing_khz, mass[a] / total});
  }
  return out;
}

Ensemble resonant_only(const Ensemble& ensemble) {
  EnsembleSpec spec = ensemble.spec;
  spec.group_count = 1;
  Ensemble out;
  out.spec = spec;
  out.groups = {{0.0, 1.0}};
  // Same bookkeeping as build_ensemble for a single midpoint bin.
  const double sigma = gaussian_sigma(spec.fwhm_khz);
  out.raw_coverage =
      std::min(1.0, spec.spacing_khz / (sigma * std::sqrt(2.0 * std::numbers::pi)));
  return out;
}

}  // namespace starkecho
