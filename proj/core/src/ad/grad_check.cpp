#include "abode/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abode/error.hpp"

namespace abode::ad {

double value_and_grad(const ScalarFunction& f, std::span<const Array> point, std::vector<Array>* grads) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const Array& a : point) leaves.push_back(tape.leaf(a));
  const Var out = f(tape, leaves);
  const double value = out.value().item();
  if (grads != nullptr) {
    const Gradients g = tape.backward(out);
    grads->clear();
    for (const Var& leaf : leaves) grads->push_back(g[leaf]);
  }
  return value;
}

GradCheckReport grad_check(const ScalarFunction& f, std::span<const Array> point, const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw ConfigError("grad_check: step must be positive");
  std::vector<Array> analytic;
  value_and_grad(f, point, &analytic);

  std::vector<Array> work(point.begin(), point.end());
  auto evaluate = [&]() { return value_and_grad(f, work, nullptr); };

  GradCheckReport report;
  report.per_array.assign(point.size(), 0.0);
  for (std::size_t a = 0; a < point.size(); ++a) {
    std::vector<std::size_t> entries(point[a].size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.entries_per_array > 0 && entries.size() > options.entries_per_array) {
      if (options.largest_first) {
        const Array& g = analytic[a];
        std::stable_sort(entries.begin(), entries.end(),
                         [&](std::size_t x, std::size_t y) { return std::abs(g[x]) > std::abs(g[y]); });
      }
      entries.resize(options.entries_per_array);
    }
    for (std::size_t e : entries) {
      const double original = work[a][e];
      work[a][e] = original + options.step;
      const double plus = evaluate();
      work[a][e] = original - options.step;
      const double minus = evaluate();
      work[a][e] = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double exact = analytic[a][e];
      if (!std::isfinite(numeric)) throw NonFiniteError("grad_check: non-finite central difference");
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double err = std::abs(exact - numeric) / denom;
      ++report.entries_checked;
      report.per_array[a] = std::max(report.per_array[a], err);
      if (err > report.max_relative_error || report.entries_checked == 1) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        report.worst_array = a;
        report.worst_entry = e;
        report.analytic = exact;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace abode::ad
