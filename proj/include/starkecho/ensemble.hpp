#pragma once

#include <stdexcept>
#include <vector>

namespace starkecho {

/// Gaussian inhomogeneous line sampled on a symmetric uniform grid.
struct EnsembleSpec {
  double fwhm_khz = 850.0;
  double spacing_khz = 10.0;
  int group_count = 201;  // odd, so one group sits at line center

  bool operator==(const EnsembleSpec&) const = default;
};

struct AtomGroup {
  double delta_khz = 0.0;
  double weight = 1.0;
};

/// How an unnormalized group weight is computed before renormalization.
enum class BinRule {
  midpoint,      // density at delta_j times spacing
  bin_integral,  // exact Gaussian mass over [delta_j - s/2, delta_j + s/2]
};

struct Ensemble {
  EnsembleSpec spec;
  std::vector<AtomGroup> groups;  // ascending delta
  double raw_coverage = 1.0;      // Gaussian mass covered before renormalization

  double sigma_khz() const;
  std::size_t size() const { return groups.size(); }
};

class EnsembleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Standard deviation of a Gaussian with the given full width at half maximum.
double gaussian_sigma(double fwhm);

/// Throws EnsembleError if the spec is not usable.
void check_spec(const EnsembleSpec& spec);

Ensemble build_ensemble(const EnsembleSpec& spec, BinRule rule = BinRule::midpoint);

/// One-group ensemble at line center with unit weight (the homogeneous reference).
Ensemble resonant_only(const Ensemble& ensemble);

}  // namespace starkecho
