// Local decoherence models and two independent propagators: the exact
// composition of commuting single-qubit channels, and a fixed-step RK4
// integrator for the full generator. Operators act on individual qubits via
// index arithmetic; no full-dimension superoperator is ever materialized.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qent/state.hpp"

namespace qent {

enum class EnvironmentKind { ZeroTemperature, InfiniteTemperature, Dephasing };

inline const char* to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::ZeroTemperature: return "zero-t";
    case EnvironmentKind::InfiniteTemperature: return "infinite-t";
    case EnvironmentKind::Dephasing: return "dephasing";
  }
  return "?";
}

// One of the three decoherence models together with the reservoir rate.
struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::Dephasing;
  double gamma = 1.0;

  EnvironmentSpec() = default;
  EnvironmentSpec(EnvironmentKind k, double g) : kind(k), gamma(g) {
    if (!(gamma > 0.0)) {
      throw std::invalid_argument("EnvironmentSpec: rate must be positive");
    }
  }
};

// Exact single-qubit solution at a fixed time, in Kraus form.
struct SingleQubitChannel {
  std::vector<Eigen::Matrix2cd> kraus;
  double time = 0.0;

  SingleQubitChannel(std::vector<Eigen::Matrix2cd> ops, double t)
      : kraus(std::move(ops)), time(t) {
    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    for (const auto& k : kraus) sum += k.adjoint() * k;
    const double dev = (sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    if (dev > 1e-12) {
      throw std::invalid_argument("SingleQubitChannel: Kraus completeness deviation " +
                                  std::to_string(dev));
    }
  }
};

enum class PropagatorMethod { ExactChannel, RungeKutta4 };

inline const char* to_string(PropagatorMethod method) {
  switch (method) {
    case PropagatorMethod::ExactChannel: return "exact";
    case PropagatorMethod::RungeKutta4: return "rk4";
  }
  return "?";
}

struct PropagatorConfig {
  PropagatorMethod method = PropagatorMethod::ExactChannel;
  double dt = 0.01;
  double t_max = 5.0;
  int sample_every = 1;

  void check() const {
    if (!(dt > 0.0) || !(t_max > 0.0) || dt > t_max) {
      throw std::invalid_argument("PropagatorConfig: require 0 < dt <= t_max");
    }
    if (sample_every < 1) {
      throw std::invalid_argument("PropagatorConfig: sample_every must be >= 1");
    }
  }
};

// Density-matrix samples along one evolution.
struct StateTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

namespace detail {

// out = (A acting on qubit k) * in
inline Matrix local_left(const Eigen::Matrix2cd& a, const Matrix& in, int n, int k) {
  const std::int64_t d = in.rows();
  const std::int64_t stride = std::int64_t{1} << qubit_bit_position(n, k);
  Matrix out(d, d);
  for (std::int64_t c = 0; c < d; ++c) {
    for (std::int64_t base = 0; base < d; base += 2 * stride) {
      for (std::int64_t off = 0; off < stride; ++off) {
        const std::int64_t r0 = base + off;
        const std::int64_t r1 = r0 + stride;
        const Complex x0 = in(r0, c);
        const Complex x1 = in(r1, c);
        out(r0, c) = a(0, 0) * x0 + a(0, 1) * x1;
        out(r1, c) = a(1, 0) * x0 + a(1, 1) * x1;
      }
    }
  }
  return out;
}

// out = in * (B acting on qubit k)
inline Matrix local_right(const Matrix& in, const Eigen::Matrix2cd& b, int n, int k) {
  const std::int64_t d = in.rows();
  const std::int64_t stride = std::int64_t{1} << qubit_bit_position(n, k);
  Matrix out(d, d);
  for (std::int64_t base = 0; base < d; base += 2 * stride) {
    for (std::int64_t off = 0; off < stride; ++off) {
      const std::int64_t c0 = base + off;
      const std::int64_t c1 = c0 + stride;
      out.col(c0) = in.col(c0) * b(0, 0) + in.col(c1) * b(1, 0);
      out.col(c1) = in.col(c0) * b(0, 1) + in.col(c1) * b(1, 1);
    }
  }
  return out;
}

// sigma_minus = |0><1| lowers the excited state.
inline Eigen::Matrix2cd sigma_minus() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = 1.0;
  return m;
}

inline Eigen::Matrix2cd sigma_plus() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(1, 0) = 1.0;
  return m;
}

inline Eigen::Matrix2cd excited_projector() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(1, 1) = 1.0;
  return m;
}

inline std::vector<Eigen::Matrix2cd> coupling_operators(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::ZeroTemperature: return {sigma_minus()};
    case EnvironmentKind::InfiniteTemperature: return {sigma_minus(), sigma_plus()};
    case EnvironmentKind::Dephasing: return {excited_projector()};
  }
  throw std::logic_error("coupling_operators: unknown kind");
}

inline Matrix apply_generator_raw(const Matrix& rho, const EnvironmentSpec& env, int n) {
  const auto couplings = coupling_operators(env.kind);
  Matrix deriv = Matrix::Zero(rho.rows(), rho.cols());
  for (int k = 0; k < n; ++k) {
    for (const auto& c : couplings) {
      const Eigen::Matrix2cd cdc = c.adjoint() * c;
      deriv += env.gamma * local_left(c, local_right(rho, c.adjoint(), n, k), n, k);
      deriv -= 0.5 * env.gamma * local_left(cdc, rho, n, k);
      deriv -= 0.5 * env.gamma * local_right(rho, cdc, n, k);
    }
  }
  return deriv;
}

inline Matrix apply_channel_to_qubit(const Matrix& rho, const SingleQubitChannel& ch,
                                     int n, int k) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& kr : ch.kraus) {
    out += local_left(kr, local_right(rho, kr.adjoint(), n, k), n, k);
  }
  return out;
}

}  // namespace detail

// Time derivative of rho under the sum of identical single-qubit generators,
// one per qubit. The result is traceless and Hermitian, not a density matrix.
inline Matrix apply_generator(const DensityMatrix& rho, const EnvironmentSpec& env) {
  return detail::apply_generator_raw(rho.matrix(), env, rho.num_qubits());
}

// Exact single-qubit solution at time t. Excited population decays as
// e^{-gamma t} (zero temperature), relaxes to 1/2 as e^{-2 gamma t}
// (infinite temperature), or stays fixed (dephasing); coherences pick up
// e^{-gamma t/2}, e^{-gamma t} and e^{-gamma t/2} respectively.
inline SingleQubitChannel single_qubit_channel(const EnvironmentSpec& env, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("single_qubit_channel: time must be nonnegative");
  }
  if (t == 0.0) {
    return SingleQubitChannel({Eigen::Matrix2cd::Identity()}, 0.0);
  }
  std::vector<Eigen::Matrix2cd> ops;
  switch (env.kind) {
    case EnvironmentKind::ZeroTemperature: {
      const double p = 1.0 - std::exp(-env.gamma * t);
      Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero();
      k0(0, 0) = 1.0;
      k0(1, 1) = std::sqrt(1.0 - p);
      Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
      k1(0, 1) = std::sqrt(p);
      ops = {k0, k1};
      break;
    }
    case EnvironmentKind::Dephasing: {
      const double q = 1.0 - std::exp(-env.gamma * t);
      Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero();
      k0(0, 0) = 1.0;
      k0(1, 1) = std::sqrt(1.0 - q);
      Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
      k1(1, 1) = std::sqrt(q);
      ops = {k0, k1};
      break;
    }
    case EnvironmentKind::InfiniteTemperature: {
      // Both couplings carry the full rate, so populations relax twice as
      // fast as coherences decay.
      const double eta = 1.0 - std::exp(-2.0 * env.gamma * t);
      const double amp = std::sqrt(0.5);
      Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero();
      k0(0, 0) = amp;
      k0(1, 1) = amp * std::sqrt(1.0 - eta);
      Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
      k1(0, 1) = amp * std::sqrt(eta);
      Eigen::Matrix2cd k2 = Eigen::Matrix2cd::Zero();
      k2(0, 0) = amp * std::sqrt(1.0 - eta);
      k2(1, 1) = amp;
      Eigen::Matrix2cd k3 = Eigen::Matrix2cd::Zero();
      k3(1, 0) = amp * std::sqrt(eta);
      ops = {k0, k1, k2, k3};
      break;
    }
  }
  return SingleQubitChannel(std::move(ops), t);
}

// Propagate by applying the exact single-qubit channel to every qubit.
// Exact for all t; the per-qubit channels commute.
inline DensityMatrix evolve_exact(const DensityMatrix& rho0, const EnvironmentSpec& env,
                                  double t) {
  const int n = rho0.num_qubits();
  const SingleQubitChannel ch = single_qubit_channel(env, t);
  Matrix rho = rho0.matrix();
  for (int k = 0; k < n; ++k) {
    rho = detail::apply_channel_to_qubit(rho, ch, n, k);
  }
  return DensityMatrix(n, std::move(rho));
}

// Exact-channel samples on the grid t_j = j * dt * sample_every.
inline StateTrajectory propagate_exact(const DensityMatrix& rho0,
                                       const EnvironmentSpec& env,
                                       const PropagatorConfig& cfg) {
  cfg.check();
  StateTrajectory traj;
  const double step = cfg.dt * cfg.sample_every;
  const auto nsamples = static_cast<std::int64_t>(std::floor(cfg.t_max / step + 1e-9));
  for (std::int64_t j = 0; j <= nsamples; ++j) {
    const double t = static_cast<double>(j) * step;
    traj.times.push_back(t);
    traj.states.push_back(evolve_exact(rho0, env, t));
  }
  return traj;
}

// Classic fixed-step fourth-order integration of the generator. Every stored
// sample is validated as a density matrix.
inline StateTrajectory evolve_ode(const DensityMatrix& rho0, const EnvironmentSpec& env,
                                  const PropagatorConfig& cfg) {
  cfg.check();
  if (env.gamma * cfg.dt > 0.05 + 1e-12) {
    throw std::invalid_argument("evolve_ode: gamma*dt exceeds the 0.05 step guard");
  }
  const int n = rho0.num_qubits();
  const auto nsteps = static_cast<std::int64_t>(std::floor(cfg.t_max / cfg.dt + 1e-9));
  StateTrajectory traj;
  Matrix rho = rho0.matrix();
  traj.times.push_back(0.0);
  traj.states.push_back(rho0);
  for (std::int64_t step = 1; step <= nsteps; ++step) {
    const Matrix k1 = detail::apply_generator_raw(rho, env, n);
    const Matrix k2 = detail::apply_generator_raw(rho + 0.5 * cfg.dt * k1, env, n);
    const Matrix k3 = detail::apply_generator_raw(rho + 0.5 * cfg.dt * k2, env, n);
    const Matrix k4 = detail::apply_generator_raw(rho + cfg.dt * k3, env, n);
    rho += (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (step % cfg.sample_every == 0) {
      try {
        traj.states.emplace_back(n, rho);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error("evolve_ode: integration diverged at step " +
                                 std::to_string(step) + ": " + e.what());
      }
      traj.times.push_back(static_cast<double>(step) * cfg.dt);
    }
  }
  return traj;
}

}  // namespace qent
