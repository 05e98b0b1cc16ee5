#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "inspire/errors.hpp"
#include "inspire/optimizers.hpp"

namespace inspire::detail {

// Charges the ledger, appends trace points and remembers the best point.
class RunRecorder {
 public:
  RunRecorder(const Objective& problem, std::int64_t budget, std::int64_t surcharge, std::uint64_t seed,
              std::string name)
      : problem_(problem), ledger_(budget, surcharge) {
    trace_.seed = seed;
    trace_.optimizer_name = std::move(name);
  }

  BudgetLedger& ledger() { return ledger_; }
  const Vector& best_x() const { return best_x_; }
  double best_loss() const { return best_loss_; }

  double evaluate(std::span<const double> x) {
    ledger_.charge(1);
    return record(x, problem_.value(x));
  }

  double evaluate_with_gradient(std::span<const double> x, std::span<double> grad) {
    ledger_.charge(ledger_.gradient_surcharge());
    return record(x, problem_.value_and_gradient(x, grad));
  }

  RunTrace finish() {
    trace_.best_latent = problem_.to_latent_point(best_x_);
    return std::move(trace_);
  }

 private:
  double record(std::span<const double> x, double loss) {
    if (std::isnan(loss)) throw NumericError(trace_.optimizer_name + ": objective returned NaN");
    if (trace_.points.empty() || loss < best_loss_) {
      best_loss_ = loss;
      best_x_.assign(x.begin(), x.end());
    }
    trace_.points.push_back({ledger_.spent_units(), loss, best_loss_});
    return loss;
  }

  const Objective& problem_;
  BudgetLedger ledger_;
  RunTrace trace_;
  Vector best_x_;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

// Anchor values on frozen coordinates, standard normals elsewhere.
inline Vector sample_free_normal(const Objective& problem, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x = problem.anchor();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!problem.is_frozen(i)) x[i] = normal(rng);
  return x;
}

}  // namespace inspire::detail
