#pragma once

#include <functional>
#include <span>
#include <vector>

namespace inspire {

using ScalarField = std::function<double(std::span<const double>)>;

// Central differences (f(z + h e_i) - f(z - h e_i)) / 2h per coordinate.
// Throws NumericError if f returns a non-finite value.
std::vector<double> finite_difference_gradient(const ScalarField& f, std::span<const double> z,
                                               double h = 1e-4);

struct GradCheckReport {
  double max_abs_error = 0.0;
  // ||analytic - numeric|| / max(||numeric||, tiny)
  double rel_error_l2 = 0.0;
  int probe_count = 0;
};

// Compares an analytic gradient to central differences at z.
GradCheckReport check_gradient(const ScalarField& f, std::span<const double> analytic,
                               std::span<const double> z, double h = 1e-4);

// Folds a later probe into a running report (max of both errors).
void merge(GradCheckReport& into, const GradCheckReport& probe);

}  // namespace inspire
