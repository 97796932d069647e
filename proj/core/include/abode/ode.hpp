#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "abode/ad/tape.hpp"

namespace abode::ode {

using ad::Array;
using ad::Var;

enum class Method { HeunFixed, Rk4Fixed, HeunAdaptive, EulerFixed };

const char* method_name(Method method);
/// Accepts "heun_fixed", "rk4_fixed", "heun_adaptive", "euler_fixed".
Method parse_method(const std::string& name);

struct SolverConfig {
  Method method = Method::HeunFixed;
  double t_end = 200.0;
  std::size_t steps = 40;
  double rtol = 1e-3;
  double atol = 1e-4;
  std::size_t max_steps = 1000;

  void validate() const;
};

/// Accepted step of an adaptive run: the estimate and the bound it met.
struct StepRecord {
  double t = 0.0;
  double h = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Array> z;
  std::vector<StepRecord> accepted;
  std::size_t rejected = 0;

  const Array& final_state() const { return z.back(); }
};

using Rhs = std::function<Array(double t, const Array& z)>;

/// Integrates dz/dt = f(t, z) from t0 to config.t_end.
Trajectory integrate(const Rhs& f, const Array& z0, const SolverConfig& config, double t0 = 0.0);

/// Right-hand side recorded on a tape.
using TapeRhs = std::function<Var(double t, Var z)>;

/// Records every stage of a fixed-step scheme and returns z(t_end).
Var integrate_on_tape(const TapeRhs& f, Var z0, const SolverConfig& config, double t0 = 0.0);

/// Builds a tape right-hand side once the parameter leaves exist.
using RhsFactory = std::function<TapeRhs(ad::Tape& tape, std::span<const Var> params)>;
using TapeLoss = std::function<Var(ad::Tape& tape, Var z_end)>;

struct GradResult {
  double loss = 0.0;
  std::vector<Array> params;
  Array z0;
  Array z_end;
};

/// Loss of the discrete solution and its exact gradients with respect to the
/// parameters and the initial state. Adaptive methods are rejected.
GradResult integrate_with_grad(const RhsFactory& factory, const Array& z0, std::span<const Array> params,
                               const SolverConfig& config, const TapeLoss& loss);

/// log2(err(h) / err(h/2)) at `steps` and 2 * `steps` against a closed-form solution.
double convergence_order(const Rhs& f, const Array& z0, const Array& exact_end, Method method, double t_end,
                         std::size_t steps);

}  // namespace abode::ode
