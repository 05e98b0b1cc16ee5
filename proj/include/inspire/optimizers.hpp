#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "inspire/generators.hpp"

namespace inspire {

using Vector = std::vector<double>;
using Rng = std::mt19937_64;

// Something to minimise. Optimizers only ever move the coordinates that are
// not frozen; frozen coordinates hold the anchor's values.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual bool differentiable() const { return false; }
  // Throws CapabilityError unless differentiable().
  virtual double value_and_gradient(std::span<const double> x, std::span<double> grad) const;
  virtual LatentPoint to_latent_point(std::span<const double> x) const;

  const std::vector<bool>& frozen_mask() const { return frozen_; }
  const Vector& anchor() const { return anchor_; }
  bool is_frozen(std::size_t i) const { return !frozen_.empty() && frozen_[i]; }
  std::vector<std::size_t> free_coordinates() const;

  // Pins every coordinate with mask[i] == true to anchor[i].
  void set_constraints(std::vector<bool> mask, Vector anchor);

 private:
  std::vector<bool> frozen_;
  Vector anchor_;
};

// Objective from plain callables. Used for test functions like the sphere.
class FunctionObjective final : public Objective {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

  FunctionObjective(std::size_t dim, ValueFn value, GradFn grad = {});
  std::size_t dimension() const override { return dim_; }
  double value(std::span<const double> x) const override { return value_(x); }
  bool differentiable() const override { return static_cast<bool>(grad_); }
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const override;

 private:
  std::size_t dim_;
  ValueFn value_;
  GradFn grad_;
};

// ---------------------------------------------------------------------------
// Budget accounting and traces

// Costs are counted in generator calls: a plain evaluation is 1 unit, a
// gradient iteration `gradient_surcharge` units.
class BudgetLedger {
 public:
  explicit BudgetLedger(std::int64_t budget_units, std::int64_t gradient_surcharge = 5);
  std::int64_t budget_units() const { return budget_; }
  std::int64_t spent_units() const { return spent_; }
  std::int64_t remaining() const { return budget_ - spent_; }
  std::int64_t gradient_surcharge() const { return surcharge_; }
  bool can_afford(std::int64_t units) const { return spent_ + units <= budget_; }
  void charge(std::int64_t units);  // throws Error past the budget

 private:
  std::int64_t budget_;
  std::int64_t surcharge_;
  std::int64_t spent_ = 0;
};

struct TracePoint {
  std::int64_t spent_units = 0;
  double current_loss = 0.0;
  double best_loss = 0.0;
  bool operator==(const TracePoint&) const = default;
};

struct RunTrace {
  std::vector<TracePoint> points;
  LatentPoint best_latent;
  std::uint64_t seed = 0;
  std::string optimizer_name;

  double best_loss() const;  // +inf when empty
  bool operator==(const RunTrace&) const = default;
};

// ---------------------------------------------------------------------------
// Random search

RunTrace run_random_search(const Objective& problem, std::int64_t budget, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gradient methods

enum class GradientMethod { adam, nesterov, lbfgs };
std::string to_string(GradientMethod m);

struct GradientMethodConfig {
  GradientMethod method = GradientMethod::lbfgs;
  double base_step = 1.0;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  double nesterov_momentum = 0.9;
  std::size_t lbfgs_memory = 10;
  double lbfgs_curvature_eps = 1e-10;
  std::vector<double> decay_points{1.0 / 3.0, 2.0 / 3.0};
  double decay_factor = 10.0;
  std::int64_t gradient_surcharge = 5;
  void validate() const;
};

struct CurvaturePair {
  Vector s, y;
  double rho = 0.0;  // 1 / s^T y
};

// Optimizer memory. An empty state is what every schedule reset restores.
struct GradientState {
  // adam
  Vector first_moment, second_moment;
  std::int64_t adam_steps = 0;
  // nesterov
  Vector velocity;
  // lbfgs
  std::deque<CurvaturePair> history;
  Vector previous_z, previous_grad;
};

struct GradientUpdate {
  Vector z;
  GradientState state;
};

// One step of the configured method. Frozen coordinates (mask may be empty)
// get zero effective update. Throws NumericError on a non-finite gradient.
GradientUpdate gradient_update(const GradientMethodConfig& cfg, const GradientState& state,
                               std::span<const double> z, std::span<const double> grad, double step,
                               const std::vector<bool>& frozen = {});

// Per-iteration view of a gradient run, reported before the update.
struct IterationEvent {
  std::int64_t iteration = 0;
  double step = 0.0;
  std::span<const double> z;
  double loss = 0.0;
};
using IterationObserver = std::function<void(const IterationEvent&)>;

// T = budget / surcharge iterations. At each decay point floor(f * T) the
// step is divided by decay_factor, z is reset to the best iterate so far and
// the optimizer state is cleared. Start point: standard normal on free
// coordinates drawn from `seed`.
RunTrace run_gradient_method(const Objective& problem, const GradientMethodConfig& cfg, std::int64_t budget,
                             std::uint64_t seed, const IterationObserver& observer = {});

// Iteration indices at which the schedule decays, for T iterations.
std::vector<std::int64_t> decay_iterations(const GradientMethodConfig& cfg, std::int64_t iterations);

// ---------------------------------------------------------------------------
// Evolution strategies

struct EsConfig {
  std::size_t mu = 1;
  std::size_t lambda = 1;
  std::optional<double> mutation_rate;  // default 1 / (number of free coordinates)
  void validate() const;
};

// Each free coordinate is replaced by a fresh standard normal with
// probability `rate`; the whole draw repeats until at least one coordinate
// changed. Throws ValidationError if every coordinate is frozen.
Vector mutate_coordinates(std::span<const double> z, double rate, Rng& rng, const std::vector<bool>& frozen = {});

// Random stream for generation `generation` of a run seeded with `seed`.
// Shared by run_es and interactive sessions so that both replay identically.
Rng generation_rng(std::uint64_t seed, std::uint64_t generation);

// (mu/mu + lambda): parents start at the anchor (zero vector on free
// coordinates), offspring clone parents round-robin and mutate, the mu best
// of parents + offspring survive (stable: earlier evaluations win ties).
RunTrace run_es(const Objective& problem, const EsConfig& cfg, std::int64_t budget, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Differential evolution

enum class Crossover { two_point, rate_1_over_d };

struct DeConfig {
  std::size_t population = 30;
  double differential_weight = 0.8;
  Crossover crossover = Crossover::two_point;
  void validate() const;
};

// Child takes mutant[i, j) and parent elsewhere, 0 <= i < j <= d.
Vector two_point_crossover_at(std::span<const double> parent, std::span<const double> mutant, std::size_t i,
                              std::size_t j);
// Cut pair drawn uniformly from all d(d+1)/2 pairs. Throws for d < 2.
Vector two_point_crossover(std::span<const double> parent, std::span<const double> mutant, Rng& rng);
// Each coordinate from mutant with probability `rate`, plus one forced
// uniformly chosen coordinate.
Vector rate_crossover(std::span<const double> parent, std::span<const double> mutant, double rate, Rng& rng);

// Builds the trial vector for population member `index` (mutant
// x_a + F (x_b - x_c) followed by the configured crossover). Only free
// coordinates take part.
Vector de_trial(const std::vector<Vector>& population, std::size_t index, const DeConfig& cfg,
                const Objective& problem, Rng& rng);

RunTrace run_de(const Objective& problem, const DeConfig& cfg, std::int64_t budget, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dispatch by name: rs, adam, nesterov, lbfgs, dopo, es, 2pde, dde.

struct OptimizerSettings {
  GradientMethodConfig gradient;  // method field is overridden by the name
  EsConfig es{5, 27, std::nullopt};
  DeConfig de;
};

std::vector<std::string> optimizer_names();
bool is_gradient_optimizer(const std::string& name);
// Smallest budget the named optimizer accepts.
std::int64_t minimum_budget(const std::string& name, const OptimizerSettings& settings = {});
RunTrace run_optimizer(const std::string& name, const Objective& problem, std::int64_t budget, std::uint64_t seed,
                       const OptimizerSettings& settings = {});

}  // namespace inspire
