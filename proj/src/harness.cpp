#include "inspire/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "inspire/errors.hpp"
#include "inspire/hashing.hpp"
#include "inspire/problem.hpp"

namespace inspire {

std::string to_string(TargetRegime r) {
  switch (r) {
    case TargetRegime::reconstruction: return "reconstruction";
    case TargetRegime::semi_specified: return "semi_specified";
    case TargetRegime::misspecified: return "misspecified";
  }
  return "unknown";
}

TargetRegime parse_regime(const std::string& name) {
  if (name == "reconstruction") return TargetRegime::reconstruction;
  if (name == "semi_specified" || name == "semi-specified") return TargetRegime::semi_specified;
  if (name == "misspecified") return TargetRegime::misspecified;
  throw ValidationError("unknown regime '" + name + "'");
}

Vector reconstruction_latent(const Generator& gen, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x7a}));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = gen.continuous_dim();
  Vector latent(gen.latent_dim(), 0.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    latent[i] = normal(rng);
    sq += latent[i] * latent[i];
  }
  const double scale = std::sqrt(static_cast<double>(d) / sq);
  for (std::size_t i = 0; i < d; ++i) latent[i] *= scale;
  std::size_t offset = d;
  for (auto k : gen.class_groups()) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    latent[offset + pick(rng)] = 1.0;
    offset += k;
  }
  return latent;
}

ToySpec semi_specified_sibling(const ToySpec& spec, std::uint64_t seed) {
  ToySpec sibling = spec;
  sibling.mix = 0.5;
  sibling.mix_seed = derive_seed({spec.seed, seed, 0x5e});
  return sibling;
}

namespace {

ImageBuffer pattern_target(std::size_t side, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x3a}));
  std::uniform_real_distribution<double> colour(-0.9, 0.9);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> log_cell(1, 3);
  double a[3], b[3];
  for (int c = 0; c < 3; ++c) {
    a[c] = colour(rng);
    b[c] = colour(rng);
  }
  const int pattern = kind(rng);
  const std::size_t cell = std::size_t{1} << log_cell(rng);
  ImageBuffer img(side, side, 3);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      bool on = false;
      switch (pattern) {
        case 0: on = ((y / cell) + (x / cell)) % 2 == 1; break;  // checkerboard
        case 1: on = (y / cell) % 2 == 1; break;                 // horizontal stripes
        default: on = (x / cell) % 2 == 1; break;                // vertical stripes
      }
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = on ? a[c] : b[c];
    }
  return img;
}

}  // namespace

ImageBuffer make_target(TargetRegime regime, const ToySpec& spec, std::uint64_t seed) {
  switch (regime) {
    case TargetRegime::reconstruction: {
      auto gen = make_toy(spec);
      return gen->generate(reconstruction_latent(*gen, seed));
    }
    case TargetRegime::semi_specified: {
      auto sibling = make_toy(semi_specified_sibling(spec, seed));
      return sibling->generate(reconstruction_latent(*sibling, seed));
    }
    case TargetRegime::misspecified: return pattern_target(spec.dims.side, seed);
  }
  throw ValidationError("unknown regime");
}

// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
  if (optimizers.empty()) throw ValidationError("experiment needs at least one optimizer");
  if (replicas < 1) throw ValidationError("replicas must be at least 1");
  CriterionWeights::preset(criterion);
  for (const auto& name : optimizers) {
    const auto min = minimum_budget(name);
    if (budget_units < min)
      throw ValidationError("budget " + std::to_string(budget_units) + " below the minimum " + std::to_string(min) +
                            " of optimizer '" + name + "'");
  }
  for (std::size_t i = 0; i < optimizers.size(); ++i)
    for (std::size_t j = i + 1; j < optimizers.size(); ++j)
      if (optimizers[i] == optimizers[j]) throw ValidationError("optimizer '" + optimizers[i] + "' listed twice");
  for (const auto& [name, step] : base_steps) {
    if (!is_gradient_optimizer(name)) throw ValidationError("base step given for non-gradient optimizer '" + name + "'");
    if (!(step > 0.0)) throw ValidationError("base steps must be positive");
  }
}

std::vector<std::int64_t> units_grid(std::int64_t budget) {
  std::vector<std::int64_t> grid;
  for (std::int64_t u = 1; u <= budget; u *= 2) grid.push_back(u);
  if (grid.empty() || grid.back() != budget) grid.push_back(budget);
  return grid;
}

double best_loss_at(const RunTrace& trace, std::int64_t units) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : trace.points) {
    if (p.spent_units > units) break;
    best = p.best_loss;
  }
  return best;
}

double quantile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::uint64_t replica_seed(std::uint64_t spec_seed, const std::string& optimizer, std::int64_t replica) {
  return derive_seed({spec_seed, stable_hash64(optimizer), static_cast<std::uint64_t>(replica)});
}

std::uint64_t target_seed(std::uint64_t spec_seed, std::int64_t replica) {
  return derive_seed({spec_seed, static_cast<std::uint64_t>(replica), 0x7461726765ull});
}

int worker_count() {
  if (const char* env = std::getenv("INSPIRE_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return omp_get_max_threads();
}

Report run_experiment(const ExperimentSpec& spec, const GeneratorRegistry& registry, std::vector<RunTrace>* traces) {
  spec.validate();
  const auto gen = registry.get(spec.generator_id);
  const auto toy = registry.spec_of(spec.generator_id);
  if (!toy) throw ValidationError("generator '" + spec.generator_id + "' has no toy spec to draw targets from");
  const auto weights = CriterionWeights::preset(spec.criterion);

  const auto replicas = static_cast<std::size_t>(spec.replicas);
  std::vector<std::shared_ptr<const RetrievalProblem>> problems(replicas);
  for (std::size_t r = 0; r < replicas; ++r)
    problems[r] = std::make_shared<const RetrievalProblem>(
        make_problem(gen, make_target(spec.regime, *toy, target_seed(spec.seed, static_cast<std::int64_t>(r))), weights));

  const std::size_t n_opt = spec.optimizers.size();
  const auto tasks = static_cast<std::int64_t>(n_opt * replicas);
  std::vector<RunTrace> results(static_cast<std::size_t>(tasks));
  std::vector<std::string> errors(static_cast<std::size_t>(tasks));

#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (std::int64_t t = 0; t < tasks; ++t) {
    const auto task = static_cast<std::size_t>(t);
    const std::size_t o = task / replicas, r = task % replicas;
    const std::string& name = spec.optimizers[o];
    OptimizerSettings settings;
    if (auto it = spec.base_steps.find(name); it != spec.base_steps.end()) settings.gradient.base_step = it->second;
    try {
      results[task] = run_optimizer(name, *problems[r], spec.budget_units,
                                    replica_seed(spec.seed, name, static_cast<std::int64_t>(r)), settings);
    } catch (const std::exception& e) {
      errors[task] = e.what();
    }
  }

  std::size_t completed = 0;
  for (const auto& e : errors) completed += e.empty() ? 1 : 0;
  for (std::size_t task = 0; task < errors.size(); ++task)
    if (!errors[task].empty())
      throw Error("run " + spec.optimizers[task / replicas] + " replica " + std::to_string(task % replicas) +
                  " failed: " + errors[task] + " (" + std::to_string(completed) + " of " +
                  std::to_string(errors.size()) + " runs completed)");

  Report report;
  report.spec = spec;
  report.grid = units_grid(spec.budget_units);
  for (std::size_t o = 0; o < n_opt; ++o) {
    OptimizerSummary summary;
    summary.optimizer = spec.optimizers[o];
    for (auto units : report.grid) {
      std::vector<double> at;
      for (std::size_t r = 0; r < replicas; ++r) at.push_back(best_loss_at(results[o * replicas + r], units));
      summary.median.push_back(quantile(at, 0.5));
      summary.q1.push_back(quantile(at, 0.25));
      summary.q3.push_back(quantile(at, 0.75));
    }
    for (std::size_t r = 0; r < replicas; ++r) summary.final_best.push_back(results[o * replicas + r].best_loss());
    summary.median_final = quantile(summary.final_best, 0.5);
    report.optimizers.push_back(std::move(summary));
  }
  std::vector<const OptimizerSummary*> order;
  for (const auto& s : report.optimizers) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const OptimizerSummary* a, const OptimizerSummary* b) {
    if (a->median_final != b->median_final) return a->median_final < b->median_final;
    return a->optimizer < b->optimizer;
  });
  for (const auto* s : order) report.ranking.push_back(s->optimizer);
  if (traces) *traces = std::move(results);
  return report;
}

}  // namespace inspire
