#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace starkecho {

/// Time-gridded ensemble output. `macro[k]` is the weighted density matrix
/// at `times[k]`; `per_group` holds rho_12 per group when requested.
struct TraceSet {
  double dt_us = 0.0;
  std::vector<double> times;
  std::vector<Eigen::Matrix3cd> macro;
  std::vector<double> group_deltas_khz;
  std::vector<double> group_weights;
  std::vector<std::vector<std::complex<double>>> per_group;

  std::size_t size() const { return times.size(); }
  std::complex<double> rho12(std::size_t k) const { return macro[k](0, 1); }
  double im12(std::size_t k) const { return macro[k](0, 1).imag(); }
  double re12(std::size_t k) const { return macro[k](0, 1).real(); }
  double population(std::size_t k, int level) const { return macro[k](level, level).real(); }

  /// Nearest grid index to t (clamped).
  std::size_t index_of(double t_us) const;
};

}  // namespace starkecho
