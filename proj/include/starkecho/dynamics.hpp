#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "starkecho/ensemble.hpp"
#include "starkecho/sequence.hpp"
#include "starkecho/trace.hpp"

namespace starkecho {

using Complex = std::complex<double>;

/// 3x3 density matrix over (|1> ground, |2> excited, |3> auxiliary ground).
struct DensityMatrix {
  Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();

  static DensityMatrix ground();
  Complex operator()(int i, int j) const { return rho(i, j); }
  double population(int i) const { return rho(i, i).real(); }
  double trace() const { return rho.trace().real(); }
  /// max |rho_ij - conj(rho_ji)|
  double hermiticity_error() const;
};

/// Piecewise-constant RWA Hamiltonian in rad/us:
///
///   [ delta1  omega1  0      ]
///   [ omega1  delta2  omega2 ]
///   [ 0       omega2  0      ]
struct HamiltonianFrame {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;

  Eigen::Matrix3d matrix() const;
  bool operator==(const HamiltonianFrame&) const = default;
};

/// Decay matrix gamma_ij in 1/us, entering as -1/2 (gamma rho + rho gamma).
struct DecayRates {
  Eigen::Matrix3d gamma = Eigen::Matrix3d::Zero();

  bool is_zero() const { return gamma.isZero(0.0); }
  /// Throws std::invalid_argument on negative or non-finite entries.
  void check() const;
};

enum class Method { exact_piecewise, rk4 };

std::string_view to_string(Method method);
/// Accepts "exact", "exact_piecewise" and "rk4".
Method parse_method(std::string_view name);

struct PropagationConfig {
  double dt_us = 0.01;
  double t_end_us = 25.0;
  Method method = Method::exact_piecewise;
  /// Apply the group detuning to delta2 while a control pulse is on.
  bool control_detuning = false;
  /// Worker threads for ensemble runs; 0 picks hardware concurrency.
  unsigned threads = 0;

  static PropagationConfig from(const PulseSequence& sequence);
  void check() const;
};

HamiltonianFrame frame_at(double t_us, const PulseSequence& sequence, const AtomGroup& group,
                          bool control_detuning = false);

/// One propagation step of length dt over a constant frame.
DensityMatrix step(const DensityMatrix& rho, const HamiltonianFrame& frame, const DecayRates& gamma,
                   double dt_us, Method method = Method::exact_piecewise);

struct GroupTrace {
  double delta_khz = 0.0;
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

/// Evolves one group from rho_11 = 1 on the config grid, splitting steps at pulse edges.
GroupTrace propagate_group(const PulseSequence& sequence, const AtomGroup& group,
                           const DecayRates& gamma, const PropagationConfig& config);

/// Weighted ensemble average, reduced in ascending-delta order.
TraceSet propagate_ensemble(const PulseSequence& sequence, const Ensemble& ensemble,
                            const DecayRates& gamma, const PropagationConfig& config,
                            bool keep_groups = false);

}  // namespace starkecho
