#include "abode/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abode/error.hpp"

namespace abode::ode {

namespace {

template <typename T, typename F>
T euler_step(F& f, double t, double h, const T& z) {
  return z + h * f(t, z);
}

template <typename T, typename F>
T heun_step(F& f, double t, double h, const T& z) {
  const T k1 = f(t, z);
  const T k2 = f(t + h, z + h * k1);
  return z + (0.5 * h) * (k1 + k2);
}

template <typename T, typename F>
T rk4_step(F& f, double t, double h, const T& z) {
  const T k1 = f(t, z);
  const T k2 = f(t + 0.5 * h, z + (0.5 * h) * k1);
  const T k3 = f(t + 0.5 * h, z + (0.5 * h) * k2);
  const T k4 = f(t + h, z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename T, typename F>
T fixed_step(Method method, F& f, double t, double h, const T& z) {
  switch (method) {
    case Method::HeunFixed: return heun_step(f, t, h, z);
    case Method::Rk4Fixed: return rk4_step(f, t, h, z);
    case Method::EulerFixed: return euler_step(f, t, h, z);
    case Method::HeunAdaptive: break;
  }
  throw SolverError("fixed_step: adaptive method");
}

void check_finite(const Array& z, double t) {
  if (z.all_finite()) return;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
      if (!std::isfinite(z(r, c))) {
        throw NonFiniteError("non-finite state at node " + std::to_string(r) + ", component " + std::to_string(c) +
                             ", t = " + std::to_string(t));
      }
    }
  }
}

double inf_norm(const Array& a) { return a.max_abs(); }

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::HeunFixed: return "heun_fixed";
    case Method::Rk4Fixed: return "rk4_fixed";
    case Method::HeunAdaptive: return "heun_adaptive";
    case Method::EulerFixed: return "euler_fixed";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "heun_fixed") return Method::HeunFixed;
  if (name == "rk4_fixed") return Method::Rk4Fixed;
  if (name == "heun_adaptive") return Method::HeunAdaptive;
  if (name == "euler_fixed") return Method::EulerFixed;
  throw ConfigError("unknown solver method '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("solver t_end must be positive");
  if (steps == 0) throw ConfigError("solver steps must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (max_steps == 0) throw ConfigError("solver max_steps must be positive");
}

Trajectory integrate(const Rhs& f, const Array& z0, const SolverConfig& config, double t0) {
  config.validate();
  if (!(config.t_end > t0)) throw ConfigError("integrate: t_end must exceed the start time");
  check_finite(z0, t0);
  Trajectory traj;
  traj.t.push_back(t0);
  traj.z.push_back(z0);
  const double span = config.t_end - t0;

  if (config.method != Method::HeunAdaptive) {
    const double h = span / static_cast<double>(config.steps);
    Array z = z0;
    for (std::size_t k = 0; k < config.steps; ++k) {
      const double t = t0 + static_cast<double>(k) * h;
      z = fixed_step(config.method, f, t, h, z);
      const double t_next = k + 1 == config.steps ? config.t_end : t0 + static_cast<double>(k + 1) * h;
      check_finite(z, t_next);
      traj.t.push_back(t_next);
      traj.z.push_back(z);
    }
    return traj;
  }

  double t = t0;
  double h = span / static_cast<double>(config.steps);
  Array z = z0;
  std::size_t attempts = 0;
  while (t < config.t_end) {
    if (++attempts > config.max_steps) {
      throw SolverError("adaptive Heun exceeded " + std::to_string(config.max_steps) + " steps at t = " +
                        std::to_string(t));
    }
    const bool last = t + h >= config.t_end;
    const double step = last ? config.t_end - t : h;
    const Array k1 = f(t, z);
    const Array euler = z + step * k1;
    const Array k2 = f(t + step, euler);
    const Array heun = z + (0.5 * step) * (k1 + k2);
    check_finite(heun, t + step);
    const double err = inf_norm(heun - euler);
    const double tol = config.atol + config.rtol * inf_norm(z);
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::sqrt(tol / err), 0.2, 5.0);
    if (err <= tol) {
      t = last ? config.t_end : t + step;
      z = heun;
      traj.accepted.push_back({t, step, err, tol});
      traj.t.push_back(t);
      traj.z.push_back(z);
    } else {
      ++traj.rejected;
    }
    h = step * factor;
  }
  return traj;
}

Var integrate_on_tape(const TapeRhs& f, Var z0, const SolverConfig& config, double t0) {
  config.validate();
  if (config.method == Method::HeunAdaptive) {
    throw SolverError("gradients need a fixed-step method; heun_adaptive is only available without gradients");
  }
  const double h = (config.t_end - t0) / static_cast<double>(config.steps);
  Var z = z0;
  for (std::size_t k = 0; k < config.steps; ++k) {
    z = fixed_step(config.method, f, t0 + static_cast<double>(k) * h, h, z);
  }
  return z;
}

GradResult integrate_with_grad(const RhsFactory& factory, const Array& z0, std::span<const Array> params,
                               const SolverConfig& config, const TapeLoss& loss) {
  if (config.method == Method::HeunAdaptive) {
    throw SolverError("gradients need a fixed-step method; heun_adaptive is only available without gradients");
  }
  ad::Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Array& p : params) leaves.push_back(tape.leaf(p));
  const Var start = tape.leaf(z0);
  const TapeRhs f = factory(tape, leaves);
  const Var end = integrate_on_tape(f, start, config);
  const Var value = loss(tape, end);
  const ad::Gradients g = tape.backward(value);
  GradResult out;
  out.loss = value.value().item();
  for (const Var& leaf : leaves) out.params.push_back(g[leaf]);
  out.z0 = g[start];
  out.z_end = end.value();
  return out;
}

double convergence_order(const Rhs& f, const Array& z0, const Array& exact_end, Method method, double t_end,
                         std::size_t steps) {
  if (method == Method::HeunAdaptive) throw ConfigError("convergence_order needs a fixed-step method");
  SolverConfig cfg;
  cfg.method = method;
  cfg.t_end = t_end;
  cfg.steps = steps;
  const double coarse = inf_norm(integrate(f, z0, cfg).final_state() - exact_end);
  cfg.steps = 2 * steps;
  const double fine = inf_norm(integrate(f, z0, cfg).final_state() - exact_end);
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, inf_norm(exact_end));
  if (fine < noise || coarse < noise) throw SolverError("convergence_order: error is at machine-noise level");
  return std::log2(coarse / fine);
}

}  // namespace abode::ode
