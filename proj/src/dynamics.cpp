#include "starkecho/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "starkecho/units.hpp"

namespace starkecho {

namespace {

constexpr double kEdgeTol = 1e-9;  // us
constexpr Complex kI{0.0, 1.0};

}  // namespace

DensityMatrix DensityMatrix::ground() {
  DensityMatrix d;
  d.rho(0, 0) = 1.0;
  return d;
}

double DensityMatrix::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::Matrix3d HamiltonianFrame::matrix() const {
  Eigen::Matrix3d h;
  h << delta1, omega1, 0.0,
       omega1, delta2, omega2,
       0.0,    omega2, 0.0;
  return h;
}

void DecayRates::check() const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!(gamma(i, j) >= 0.0) || !std::isfinite(gamma(i, j)))
        throw std::invalid_argument("decay rates must be finite and non-negative");
}

std::string_view to_string(Method method) {
  return method == Method::rk4 ? "rk4" : "exact_piecewise";
}

Method parse_method(std::string_view name) {
  if (name == "exact" || name == "exact_piecewise") return Method::exact_piecewise;
  if (name == "rk4") return Method::rk4;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected exact or rk4)");
}

PropagationConfig PropagationConfig::from(const PulseSequence& sequence) {
  PropagationConfig c;
  c.dt_us = sequence.dt_us;
  c.t_end_us = sequence.t_end_us;
  return c;
}

void PropagationConfig::check() const {
  if (!(dt_us > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end_us > 0.0)) throw std::invalid_argument("end time must be positive");
  if (t_end_us / dt_us > 1e7) throw std::invalid_argument("more than 1e7 time steps");
}

HamiltonianFrame frame_at(double t_us, const PulseSequence& sequence, const AtomGroup& group,
                          bool control_detuning) {
  const double atom = angular_from_mhz(mhz_from_khz(group.delta_khz));
  HamiltonianFrame f;
  f.delta1 = atom;
  for (const Pulse& p : sequence.pulses) {
    if (!p.active_at(t_us)) continue;
    if (p.channel == Channel::probe) {
      f.omega1 = angular_from_mhz(p.rabi_mhz);
      f.delta1 = atom + angular_from_mhz(p.detune_mhz);
    } else {
      f.omega2 = angular_from_mhz(p.rabi_mhz);
      f.delta2 = (control_detuning ? atom : 0.0) + angular_from_mhz(p.detune_mhz);
    }
  }
  return f;
}

namespace {

Eigen::Matrix3cd unitary(const HamiltonianFrame& frame, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(frame.matrix());
  const Eigen::Matrix3cd v = es.eigenvectors().cast<Complex>();
  Eigen::Vector3cd phases;
  for (int i = 0; i < 3; ++i) phases(i) = std::exp(-kI * es.eigenvalues()(i) * dt);
  return v * phases.asDiagonal() * v.transpose();
}

Eigen::Matrix3cd rhs(const Eigen::Matrix3cd& rho, const Eigen::Matrix3cd& h,
                     const Eigen::Matrix3cd& g, bool decay) {
  Eigen::Matrix3cd out = -kI * (h * rho - rho * h);
  if (decay) out -= 0.5 * (g * rho + rho * g);
  return out;
}

void hermitize(Eigen::Matrix3cd& rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
}

Eigen::Matrix3cd rk4_step(const Eigen::Matrix3cd& rho, const HamiltonianFrame& frame,
                          const DecayRates& gamma, double dt) {
  const Eigen::Matrix3cd h = frame.matrix().cast<Complex>();
  const Eigen::Matrix3cd g = gamma.gamma.cast<Complex>();
  const bool decay = !gamma.is_zero();
  const Eigen::Matrix3cd k1 = rhs(rho, h, g, decay);
  const Eigen::Matrix3cd k2 = rhs(rho + 0.5 * dt * k1, h, g, decay);
  const Eigen::Matrix3cd k3 = rhs(rho + 0.5 * dt * k2, h, g, decay);
  const Eigen::Matrix3cd k4 = rhs(rho + dt * k3, h, g, decay);
  Eigen::Matrix3cd out = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  hermitize(out);
  return out;
}

void check_step(const DecayRates& gamma, double dt, Method method) {
  if (!(dt > 0.0)) throw std::invalid_argument("step length must be positive");
  if (method == Method::exact_piecewise && !gamma.is_zero())
    throw std::invalid_argument("exact_piecewise needs zero decay rates; use rk4");
}

// Reuses U while the frame and step length repeat, which is almost always.
class Stepper {
 public:
  Stepper(const DecayRates& gamma, Method method) : gamma_(gamma), method_(method) {}

  void advance(Eigen::Matrix3cd& rho, const HamiltonianFrame& frame, double dt) {
    if (method_ == Method::rk4) {
      rho = rk4_step(rho, frame, gamma_, dt);
      return;
    }
    if (!cached_ || !(frame == frame_) || dt != dt_) {
      u_ = unitary(frame, dt);
      frame_ = frame;
      dt_ = dt;
      cached_ = true;
    }
    rho = (u_ * rho * u_.adjoint()).eval();
    hermitize(rho);
  }

 private:
  const DecayRates& gamma_;
  Method method_;
  bool cached_ = false;
  HamiltonianFrame frame_;
  double dt_ = 0.0;
  Eigen::Matrix3cd u_;
};

std::size_t step_count(const PropagationConfig& config) {
  const double ratio = config.t_end_us / config.dt_us;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) * config.dt_us <= kEdgeTol) return static_cast<std::size_t>(n);
  return static_cast<std::size_t>(std::floor(ratio));
}

std::vector<double> pulse_edges(const PulseSequence& sequence) {
  std::vector<double> edges;
  for (const auto& p : sequence.pulses) {
    edges.push_back(p.t_on_us);
    edges.push_back(p.t_off_us());
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) <= kEdgeTol; }),
              edges.end());
  return edges;
}

}  // namespace

DensityMatrix step(const DensityMatrix& rho, const HamiltonianFrame& frame, const DecayRates& gamma,
                   double dt_us, Method method) {
  check_step(gamma, dt_us, method);
  DensityMatrix out = rho;
  Stepper(gamma, method).advance(out.rho, frame, dt_us);
  return out;
}

GroupTrace propagate_group(const PulseSequence& sequence, const AtomGroup& group,
                           const DecayRates& gamma, const PropagationConfig& config) {
  config.check();
  gamma.check();
  check_step(gamma, config.dt_us, config.method);

  const std::size_t n = step_count(config);
  const std::vector<double> edges = pulse_edges(sequence);

  GroupTrace out;
  out.delta_khz = group.delta_khz;
  out.times.resize(n + 1);
  out.states.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.times[k] = static_cast<double>(k) * config.dt_us;

  Stepper stepper(gamma, config.method);
  Eigen::Matrix3cd rho = DensityMatrix::ground().rho;
  out.states[0].rho = rho;

  std::size_t next_edge = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = out.times[k];
    const double b = out.times[k + 1];
    while (next_edge < edges.size() && edges[next_edge] <= a + kEdgeTol) ++next_edge;

    double from = a;
    while (next_edge < edges.size() && edges[next_edge] < b - kEdgeTol) {
      const double cut = edges[next_edge++];
      stepper.advance(rho, frame_at(0.5 * (from + cut), sequence, group, config.control_detuning),
                      cut - from);
      from = cut;
    }
    const double h = from == a ? config.dt_us : b - from;
    stepper.advance(rho, frame_at(0.5 * (from + b), sequence, group, config.control_detuning), h);
    out.states[k + 1].rho = rho;
  }
  return out;
}

TraceSet propagate_ensemble(const PulseSequence& sequence, const Ensemble& ensemble,
                            const DecayRates& gamma, const PropagationConfig& config,
                            bool keep_groups) {
  config.check();
  gamma.check();
  check_step(gamma, config.dt_us, config.method);

  const std::size_t groups = ensemble.groups.size();
  const std::size_t n = step_count(config);

  TraceSet out;
  out.dt_us = config.dt_us;
  out.times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.times[k] = static_cast<double>(k) * config.dt_us;
  out.macro.assign(n + 1, Eigen::Matrix3cd::Zero());
  for (const auto& g : ensemble.groups) {
    out.group_deltas_khz.push_back(g.delta_khz);
    out.group_weights.push_back(g.weight);
  }
  if (keep_groups) out.per_group.resize(groups);

  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(groups)));

  // Groups are computed in chunks (possibly concurrently) and always summed
  // in ascending-delta order, so the result does not depend on `threads`.
  const std::size_t chunk = std::max<std::size_t>(1, 4 * threads);
  std::vector<GroupTrace> results(chunk);
  for (std::size_t base = 0; base < groups; base += chunk) {
    const std::size_t count = std::min(chunk, groups - base);
    if (threads == 1) {
      for (std::size_t i = 0; i < count; ++i)
        results[i] = propagate_group(sequence, ensemble.groups[base + i], gamma, config);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < count; i = next++)
              results[i] = propagate_group(sequence, ensemble.groups[base + i], gamma, config);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      pool.clear();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t i = 0; i < count; ++i) {
      const double w = ensemble.groups[base + i].weight;
      const auto& states = results[i].states;
      for (std::size_t k = 0; k <= n; ++k) out.macro[k] += w * states[k].rho;
      if (keep_groups) {
        auto& series = out.per_group[base + i];
        series.resize(n + 1);
        for (std::size_t k = 0; k <= n; ++k) series[k] = states[k].rho(0, 1);
      }
    }
  }
  return out;
}

std::size_t TraceSet::index_of(double t_us) const {
  if (times.empty()) return 0;
  const double k = std::round(t_us / dt_us);
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), times.size() - 1);
}

}  // namespace starkecho
