#include <algorithm>
#include <numeric>
#include <string>

#include "inspire/errors.hpp"
#include "inspire/hashing.hpp"
#include "inspire/optimizers.hpp"
#include "run_recorder.hpp"

namespace inspire {

void EsConfig::validate() const {
  if (mu < 1 || lambda < 1) throw ValidationError("ES needs mu >= 1 and lambda >= 1");
  if (mutation_rate && !(*mutation_rate > 0.0 && *mutation_rate <= 1.0))
    throw ValidationError("mutation rate must be in (0, 1]");
}

void DeConfig::validate() const {
  if (population < 4) throw ValidationError("DE population must be at least 4");
  if (!(differential_weight >= 0.0)) throw ValidationError("DE differential weight must be non-negative");
}

Vector mutate_coordinates(std::span<const double> z, double rate, Rng& rng, const std::vector<bool>& frozen) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ValidationError("mutation rate must be in (0, 1]");
  if (!frozen.empty() && frozen.size() != z.size()) throw DimensionError("mutate_coordinates: mask size mismatch");
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (frozen.empty() || !frozen[i]) free.push_back(i);
  if (free.empty()) throw ValidationError("mutate_coordinates: every coordinate is frozen");

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out;
  for (;;) {
    out.assign(z.begin(), z.end());
    std::size_t changed = 0;
    for (auto i : free) {
      if (coin(rng) < rate) {
        out[i] = normal(rng);
        ++changed;
      }
    }
    if (changed > 0) return out;
  }
}

Rng generation_rng(std::uint64_t seed, std::uint64_t generation) { return Rng(derive_seed({seed, generation, 0x65u})); }

namespace {

double default_rate(const Objective& problem, const std::optional<double>& rate) {
  if (rate) return *rate;
  const auto free = problem.free_coordinates().size();
  if (free == 0) throw ValidationError("every coordinate is frozen");
  return 1.0 / static_cast<double>(free);
}

}  // namespace

RunTrace run_es(const Objective& problem, const EsConfig& cfg, std::int64_t budget, std::uint64_t seed) {
  cfg.validate();
  const auto mu = static_cast<std::int64_t>(cfg.mu), lambda = static_cast<std::int64_t>(cfg.lambda);
  if (budget < mu + lambda) throw ValidationError("ES budget must be at least mu + lambda");
  const double rate = default_rate(problem, cfg.mutation_rate);
  const std::string name = cfg.mu == 1 && cfg.lambda == 1 ? "dopo" : "es";
  detail::RunRecorder rec(problem, budget, 1, seed, name);

  struct Member {
    Vector x;
    double loss;
  };
  std::vector<Member> parents;
  for (std::int64_t j = 0; j < mu; ++j) {
    Vector x = problem.anchor();
    parents.push_back({x, rec.evaluate(x)});
  }

  for (std::uint64_t generation = 1; rec.ledger().remaining() > 0; ++generation) {
    Rng rng = generation_rng(seed, generation);
    const std::int64_t count = std::min(lambda, rec.ledger().remaining());
    std::vector<Member> pool = parents;
    for (std::int64_t i = 0; i < count; ++i) {
      const auto& parent = parents[static_cast<std::size_t>(i % mu)];
      Vector child = mutate_coordinates(parent.x, rate, rng, problem.frozen_mask());
      const double loss = rec.evaluate(child);
      pool.push_back({std::move(child), loss});
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pool[a].loss < pool[b].loss; });
    std::vector<Member> next;
    for (std::int64_t j = 0; j < mu; ++j) next.push_back(pool[order[static_cast<std::size_t>(j)]]);
    parents = std::move(next);
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------

Vector two_point_crossover_at(std::span<const double> parent, std::span<const double> mutant, std::size_t i,
                              std::size_t j) {
  if (parent.size() != mutant.size()) throw DimensionError("crossover: parent and mutant sizes differ");
  if (!(i < j && j <= parent.size())) throw ValidationError("two-point crossover needs 0 <= i < j <= d");
  Vector child(parent.begin(), parent.end());
  std::copy(mutant.begin() + static_cast<std::ptrdiff_t>(i), mutant.begin() + static_cast<std::ptrdiff_t>(j),
            child.begin() + static_cast<std::ptrdiff_t>(i));
  return child;
}

Vector two_point_crossover(std::span<const double> parent, std::span<const double> mutant, Rng& rng) {
  const std::size_t d = parent.size();
  if (d < 2) throw ValidationError("two-point crossover needs d >= 2");
  // Pairs (i, j) with 0 <= i < j <= d, enumerated by j.
  std::uniform_int_distribution<std::size_t> pick(0, d * (d + 1) / 2 - 1);
  std::size_t k = pick(rng), j = 1;
  while (k >= j) {
    k -= j;
    ++j;
  }
  return two_point_crossover_at(parent, mutant, k, j);
}

Vector rate_crossover(std::span<const double> parent, std::span<const double> mutant, double rate, Rng& rng) {
  if (parent.size() != mutant.size()) throw DimensionError("crossover: parent and mutant sizes differ");
  if (!(rate > 0.0 && rate <= 1.0)) throw ValidationError("crossover rate must be in (0, 1]");
  if (parent.empty()) return {};
  std::uniform_int_distribution<std::size_t> forced_pick(0, parent.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::size_t forced = forced_pick(rng);
  Vector child(parent.begin(), parent.end());
  for (std::size_t i = 0; i < child.size(); ++i)
    if (i == forced || coin(rng) < rate) child[i] = mutant[i];
  return child;
}

Vector de_trial(const std::vector<Vector>& population, std::size_t index, const DeConfig& cfg,
                const Objective& problem, Rng& rng) {
  const std::size_t n = population.size();
  if (n < 4) throw ValidationError("DE population must be at least 4");
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  auto draw_other = [&](std::initializer_list<std::size_t> taken) {
    for (;;) {
      const std::size_t c = pick(rng);
      if (std::find(taken.begin(), taken.end(), c) == taken.end()) return c;
    }
  };
  const std::size_t a = draw_other({index});
  const std::size_t b = draw_other({index, a});
  const std::size_t c = draw_other({index, a, b});

  const auto free = problem.free_coordinates();
  const Vector& parent = population[index];
  Vector p_free(free.size()), m_free(free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    const std::size_t i = free[k];
    p_free[k] = parent[i];
    m_free[k] = population[a][i] + cfg.differential_weight * (population[b][i] - population[c][i]);
  }
  Vector child_free;
  if (cfg.crossover == Crossover::two_point) {
    child_free = two_point_crossover(p_free, m_free, rng);
  } else {
    child_free = rate_crossover(p_free, m_free, 1.0 / static_cast<double>(free.size()), rng);
  }
  Vector child = parent;
  for (std::size_t k = 0; k < free.size(); ++k) child[free[k]] = child_free[k];
  return child;
}

RunTrace run_de(const Objective& problem, const DeConfig& cfg, std::int64_t budget, std::uint64_t seed) {
  cfg.validate();
  if (budget < static_cast<std::int64_t>(cfg.population)) throw ValidationError("DE budget must cover the population");
  if (problem.free_coordinates().empty()) throw ValidationError("DE: every coordinate is frozen");
  const std::string name = cfg.crossover == Crossover::two_point ? "2pde" : "dde";
  detail::RunRecorder rec(problem, budget, 1, seed, name);
  Rng rng(seed);

  std::vector<Vector> population;
  std::vector<double> losses;
  for (std::size_t i = 0; i < cfg.population; ++i) {
    population.push_back(detail::sample_free_normal(problem, rng));
    losses.push_back(rec.evaluate(population.back()));
  }
  for (std::size_t i = 0; rec.ledger().can_afford(1); i = (i + 1) % cfg.population) {
    Vector child = de_trial(population, i, cfg, problem, rng);
    const double loss = rec.evaluate(child);
    if (loss <= losses[i]) {
      population[i] = std::move(child);
      losses[i] = loss;
    }
  }
  return rec.finish();
}

}  // namespace inspire
