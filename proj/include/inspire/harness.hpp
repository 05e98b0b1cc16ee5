#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inspire/criteria.hpp"
#include "inspire/generators.hpp"
#include "inspire/optimizers.hpp"

namespace inspire {

enum class TargetRegime { reconstruction, semi_specified, misspecified };
std::string to_string(TargetRegime r);
TargetRegime parse_regime(const std::string& name);

// Shell point (1/d) ||z||^2 = 1 drawn from `seed`; a random one-hot class
// block when the generator is conditioned.
Vector reconstruction_latent(const Generator& gen, std::uint64_t seed);

// reconstruction: G(z*) for the seeded shell point z*.
// semi_specified: output of an in-family sibling whose parameters are
//   blended half-and-half with a draw the generator never saw.
// misspecified: a two-colour checkerboard or stripe pattern.
ImageBuffer make_target(TargetRegime regime, const ToySpec& spec, std::uint64_t seed);

// Sibling used by the semi-specified regime.
ToySpec semi_specified_sibling(const ToySpec& spec, std::uint64_t seed);

struct ExperimentSpec {
  TargetRegime regime = TargetRegime::reconstruction;
  std::string generator_id = "mlp";
  std::vector<std::string> optimizers;
  std::string criterion = "L2+VGG";
  std::int64_t budget_units = 2000;
  std::int64_t replicas = 1;
  std::uint64_t seed = 0;
  // Per-optimizer base gradient step (adam, nesterov, lbfgs); default 1.
  std::map<std::string, double> base_steps;

  // Throws ValidationError (empty optimizer list, unknown names, replicas < 1,
  // budget below an optimizer's minimum).
  void validate() const;
};

struct OptimizerSummary {
  std::string optimizer;
  // One entry per grid point; NaN where no replica has data yet.
  std::vector<double> median, q1, q3;
  std::vector<double> final_best;  // one per replica
  double median_final = 0.0;
};

struct Report {
  ExperimentSpec spec;
  std::vector<std::int64_t> grid;
  std::vector<OptimizerSummary> optimizers;  // in spec order
  std::vector<std::string> ranking;          // by median final best loss
};

// Powers of two up to the budget, plus the budget itself.
std::vector<std::int64_t> units_grid(std::int64_t budget);

// Best loss reached with at most `units` spent; NaN before the first point.
double best_loss_at(const RunTrace& trace, std::int64_t units);

// Linear-interpolation quantile (q in [0, 1]) of the finite values; NaN if none.
double quantile(std::vector<double> values, double q);

std::uint64_t replica_seed(std::uint64_t spec_seed, const std::string& optimizer, std::int64_t replica);
std::uint64_t target_seed(std::uint64_t spec_seed, std::int64_t replica);

// Workers come from INSPIRE_WORKERS (default: OpenMP's choice).
int worker_count();

// Runs replicas x optimizers, each seeded from (spec.seed, optimizer,
// replica); replica r uses the same target for every optimizer. Throws
// Error naming the failed run and the number of completed runs.
Report run_experiment(const ExperimentSpec& spec, const GeneratorRegistry& registry,
                      std::vector<RunTrace>* traces = nullptr);

}  // namespace inspire
