#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "abode/ad/tape.hpp"

namespace abode::ad {

/// Scalar-valued function recorded on a tape, one leaf per input array.
using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckOptions {
  double step = 1e-5;
  /// Entries compared per input array; 0 compares every entry.
  std::size_t entries_per_array = 0;
  /// With a per-array budget, compare the entries with the largest analytic
  /// adjoint (the ones where a central difference is well above round-off).
  bool largest_first = true;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_array = 0;
  std::size_t worst_entry = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
  /// Worst relative error per input array.
  std::vector<double> per_array;
};

/// Evaluates f once with reverse mode and compares against central differences.
/// Relative error uses the denominator max(|analytic|, |numeric|, 1e-8).
GradCheckReport grad_check(const ScalarFunction& f, std::span<const Array> point,
                           const GradCheckOptions& options = {});

/// Value and reverse-mode gradient of f at `point`.
double value_and_grad(const ScalarFunction& f, std::span<const Array> point, std::vector<Array>* grads);

}  // namespace abode::ad
