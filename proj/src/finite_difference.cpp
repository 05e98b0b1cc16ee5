#include "inspire/finite_difference.hpp"

#include <algorithm>
#include <cmath>

#include "inspire/errors.hpp"

namespace inspire {

std::vector<double> finite_difference_gradient(const ScalarField& f, std::span<const double> z, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_difference_gradient: h must be positive");
  std::vector<double> probe(z.begin(), z.end());
  std::vector<double> grad(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_difference_gradient: non-finite function value");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradCheckReport check_gradient(const ScalarField& f, std::span<const double> analytic,
                               std::span<const double> z, double h) {
  const auto numeric = finite_difference_gradient(f, z, h);
  GradCheckReport report;
  report.probe_count = 1;
  double diff2 = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    report.max_abs_error = std::max(report.max_abs_error, std::abs(d));
    diff2 += d * d;
    ref2 += numeric[i] * numeric[i];
  }
  report.rel_error_l2 = std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-300);
  if (diff2 == 0.0) report.rel_error_l2 = 0.0;
  return report;
}

void merge(GradCheckReport& into, const GradCheckReport& probe) {
  into.max_abs_error = std::max(into.max_abs_error, probe.max_abs_error);
  into.rel_error_l2 = std::max(into.rel_error_l2, probe.rel_error_l2);
  into.probe_count += probe.probe_count;
}

}  // namespace inspire
