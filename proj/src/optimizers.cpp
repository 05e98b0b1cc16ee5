#include "inspire/optimizers.hpp"

#include <limits>

#include "inspire/errors.hpp"
#include "run_recorder.hpp"

namespace inspire {

double Objective::value_and_gradient(std::span<const double>, std::span<double>) const {
  throw CapabilityError("objective is not differentiable");
}

LatentPoint Objective::to_latent_point(std::span<const double> x) const {
  return LatentPoint::from_flat(x, x.size(), frozen_);
}

std::vector<std::size_t> Objective::free_coordinates() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dimension(); ++i)
    if (!is_frozen(i)) out.push_back(i);
  return out;
}

void Objective::set_constraints(std::vector<bool> mask, Vector anchor) {
  if (mask.size() != dimension() || anchor.size() != dimension())
    throw DimensionError("constraint mask / anchor length must equal the dimension");
  frozen_ = std::move(mask);
  anchor_ = std::move(anchor);
}

FunctionObjective::FunctionObjective(std::size_t dim, ValueFn value, GradFn grad)
    : dim_(dim), value_(std::move(value)), grad_(std::move(grad)) {
  set_constraints(std::vector<bool>(dim, false), Vector(dim, 0.0));
}

double FunctionObjective::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  if (!grad_) throw CapabilityError("objective has no gradient");
  grad_(x, grad);
  return value_(x);
}

// ---------------------------------------------------------------------------

BudgetLedger::BudgetLedger(std::int64_t budget_units, std::int64_t gradient_surcharge)
    : budget_(budget_units), surcharge_(gradient_surcharge) {
  if (budget_units < 0) throw ValidationError("budget must be non-negative");
  if (gradient_surcharge < 1) throw ValidationError("gradient surcharge must be at least 1");
}

void BudgetLedger::charge(std::int64_t units) {
  if (!can_afford(units))
    throw Error("budget exceeded: " + std::to_string(spent_) + " + " + std::to_string(units) + " > " +
                std::to_string(budget_));
  spent_ += units;
}

double RunTrace::best_loss() const {
  return points.empty() ? std::numeric_limits<double>::infinity() : points.back().best_loss;
}

// ---------------------------------------------------------------------------

RunTrace run_random_search(const Objective& problem, std::int64_t budget, std::uint64_t seed) {
  if (budget < 1) throw ValidationError("random search needs a budget of at least 1");
  detail::RunRecorder rec(problem, budget, 1, seed, "rs");
  Rng rng(seed);
  while (rec.ledger().can_afford(1)) rec.evaluate(detail::sample_free_normal(problem, rng));
  return rec.finish();
}

// ---------------------------------------------------------------------------

std::vector<std::string> optimizer_names() { return {"rs", "adam", "nesterov", "lbfgs", "dopo", "es", "2pde", "dde"}; }

bool is_gradient_optimizer(const std::string& name) {
  return name == "adam" || name == "nesterov" || name == "lbfgs";
}

std::int64_t minimum_budget(const std::string& name, const OptimizerSettings& settings) {
  if (name == "rs") return 1;
  if (is_gradient_optimizer(name)) return settings.gradient.gradient_surcharge;
  if (name == "dopo") return 2;
  if (name == "es") return static_cast<std::int64_t>(settings.es.mu + settings.es.lambda);
  if (name == "2pde" || name == "dde") return static_cast<std::int64_t>(settings.de.population);
  throw ValidationError("unknown optimizer '" + name + "'");
}

RunTrace run_optimizer(const std::string& name, const Objective& problem, std::int64_t budget, std::uint64_t seed,
                       const OptimizerSettings& settings) {
  RunTrace trace;
  if (name == "rs") {
    trace = run_random_search(problem, budget, seed);
  } else if (is_gradient_optimizer(name)) {
    GradientMethodConfig cfg = settings.gradient;
    cfg.method = name == "adam" ? GradientMethod::adam
                 : name == "nesterov" ? GradientMethod::nesterov
                                      : GradientMethod::lbfgs;
    trace = run_gradient_method(problem, cfg, budget, seed);
  } else if (name == "dopo") {
    trace = run_es(problem, EsConfig{1, 1, settings.es.mutation_rate}, budget, seed);
  } else if (name == "es") {
    trace = run_es(problem, settings.es, budget, seed);
  } else if (name == "2pde" || name == "dde") {
    DeConfig cfg = settings.de;
    cfg.crossover = name == "2pde" ? Crossover::two_point : Crossover::rate_1_over_d;
    trace = run_de(problem, cfg, budget, seed);
  } else {
    throw ValidationError("unknown optimizer '" + name + "'");
  }
  trace.optimizer_name = name;
  return trace;
}

}  // namespace inspire
