#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "inspire/errors.hpp"
#include "inspire/optimizers.hpp"
#include "inspire/problem.hpp"

using namespace inspire;

namespace {

std::vector<double> normal_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

FunctionObjective shifted_sphere(const std::vector<double>& a) {
  return FunctionObjective(
      a.size(),
      [a](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (x[i] - a[i]) * (x[i] - a[i]);
        return s;
      },
      [a](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < a.size(); ++i) g[i] = 2.0 * (x[i] - a[i]);
      });
}

// Same problem seen through a strictly increasing transform.
class ExpObjective final : public Objective {
 public:
  explicit ExpObjective(const Objective& inner) : inner_(inner) {
    set_constraints(inner.frozen_mask(), inner.anchor());
  }
  std::size_t dimension() const override { return inner_.dimension(); }
  double value(std::span<const double> x) const override { return std::exp(inner_.value(x)); }

 private:
  const Objective& inner_;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(Ledger, ChargesAndRefusesOverdraft) {
  BudgetLedger ledger(10);
  EXPECT_EQ(ledger.gradient_surcharge(), 5);
  ledger.charge(5);
  ledger.charge(4);
  EXPECT_EQ(ledger.remaining(), 1);
  EXPECT_FALSE(ledger.can_afford(2));
  EXPECT_THROW(ledger.charge(2), Error);
  EXPECT_THROW(BudgetLedger(-1), ValidationError);
}

TEST(RandomSearch, BudgetOneRecordsSingleSample) {
  const auto f = shifted_sphere(std::vector<double>(4, 0.5));
  const auto t = run_random_search(f, 1, 3);
  ASSERT_EQ(t.points.size(), 1u);
  EXPECT_EQ(t.best_loss(), t.points[0].current_loss);
  EXPECT_EQ(t.best_loss(), f.value(t.best_latent.flat()));
  EXPECT_EQ(t.optimizer_name, "rs");
}

TEST(RandomSearch, DeterministicAndReplayable) {
  const auto a = normal_vector(8, 1);
  const auto f = shifted_sphere(a);
  const auto t1 = run_random_search(f, 500, 42), t2 = run_random_search(f, 500, 42);
  EXPECT_EQ(t1, t2);
  EXPECT_NE(t1.points, run_random_search(f, 500, 43).points);

  Rng rng(42);
  double best = INFINITY;
  for (int k = 0; k < 500; ++k) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      const double x = normal(rng);
      s += (x - a[i]) * (x - a[i]);
    }
    best = std::min(best, s);
  }
  EXPECT_EQ(t1.best_loss(), best);
  ASSERT_EQ(t1.points.size(), 500u);
  EXPECT_EQ(t1.points.back().spent_units, 500);
  for (std::size_t i = 1; i < t1.points.size(); ++i) EXPECT_LE(t1.points[i].best_loss, t1.points[i - 1].best_loss);
}

TEST(GradientUpdate, LbfgsEmptyHistoryReachesQuadraticMinimum) {
  const std::vector<double> a{1.0, -2.0, 0.5}, z{0.0, 0.0, 3.0};
  std::vector<double> g(3);
  for (std::size_t i = 0; i < 3; ++i) g[i] = z[i] - a[i];
  GradientMethodConfig cfg;
  cfg.method = GradientMethod::lbfgs;
  const auto out = gradient_update(cfg, {}, z, g, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(out.z[i], a[i]);
}

TEST(GradientUpdate, LbfgsSolvesQuadraticWithCurvature) {
  // f = sum h_i (z_i - a_i)^2 / 2; with exact curvature pairs the direction
  // converges to the Newton step.
  const std::vector<double> h{1.0, 4.0, 9.0}, a{0.3, -0.2, 1.0};
  GradientMethodConfig cfg;
  cfg.method = GradientMethod::lbfgs;
  GradientState st;
  std::vector<double> z{2.0, 2.0, 2.0};
  double step = 0.1;
  for (int it = 0; it < 30; ++it) {
    std::vector<double> g(3);
    for (std::size_t i = 0; i < 3; ++i) g[i] = h[i] * (z[i] - a[i]);
    auto out = gradient_update(cfg, st, z, g, step);
    z = out.z;
    st = out.state;
    step = 1.0;
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(z[i], a[i], 1e-9);
  EXPECT_LE(st.history.size(), cfg.lbfgs_memory);
}

TEST(GradientUpdate, AdamMatchesScalarReference) {
  GradientMethodConfig cfg;
  cfg.method = GradientMethod::adam;
  const double step = 0.3;
  std::vector<double> z{0.5, -1.0};
  GradientState st;
  // Scalar reference, per coordinate.
  double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {0.5, -1.0};
  const std::vector<std::vector<double>> grads{{2.0, -0.5}, {1.0, 0.25}, {-3.0, 0.0}};
  for (std::size_t t = 0; t < grads.size(); ++t) {
    auto out = gradient_update(cfg, st, z, grads[t], step);
    for (int i = 0; i < 2; ++i) {
      const double g = grads[t][static_cast<std::size_t>(i)];
      m[i] = 0.0 * m[i] + 1.0 * g;
      v[i] = 0.99 * v[i] + 0.01 * g * g;
      const double mh = m[i] / (1.0 - std::pow(0.0, t + 1.0));
      const double vh = v[i] / (1.0 - std::pow(0.99, t + 1.0));
      ref[i] -= step * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(out.z[static_cast<std::size_t>(i)], ref[i], 1e-14);
    }
    z = out.z;
    st = out.state;
  }
}

TEST(GradientUpdate, AdamFirstStepIsSignScaled) {
  GradientMethodConfig cfg;
  cfg.method = GradientMethod::adam;
  const std::vector<double> z{0.0, 0.0, 0.0}, g{4.0, -0.001, 0.0};
  const auto out = gradient_update(cfg, {}, z, g, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out.z[i], -g[i] / (std::abs(g[i]) + 1e-8), 1e-12);
}

TEST(GradientUpdate, NesterovFixedPointAndMomentum) {
  GradientMethodConfig cfg;
  cfg.method = GradientMethod::nesterov;
  const std::vector<double> z{1.0, 2.0};
  auto out = gradient_update(cfg, {}, z, std::vector<double>{0.0, 0.0}, 1.0);
  EXPECT_EQ(out.z, z);
  out = gradient_update(cfg, {}, z, std::vector<double>{1.0, 0.0}, 0.1);
  // v = g, d = g + mu v = 1.9 g
  EXPECT_NEAR(out.z[0], 1.0 - 0.19, 1e-15);
  EXPECT_EQ(out.state.velocity[0], 1.0);
}

TEST(GradientUpdate, FrozenCoordinatesStayAndBadGradientsThrow) {
  GradientMethodConfig cfg;
  for (auto m : {GradientMethod::adam, GradientMethod::nesterov, GradientMethod::lbfgs}) {
    cfg.method = m;
    const std::vector<double> z{1.0, 2.0, 3.0}, g{0.5, 0.5, 0.5};
    const auto out = gradient_update(cfg, {}, z, g, 1.0, {false, true, false});
    EXPECT_EQ(out.z[1], 2.0);
    EXPECT_NE(out.z[0], 1.0);
    EXPECT_THROW(gradient_update(cfg, {}, z, std::vector<double>{NAN, 0, 0}, 1.0), NumericError);
  }
}

TEST(GradientSchedule, DecayPointsInThirds) {
  GradientMethodConfig cfg;
  EXPECT_EQ(decay_iterations(cfg, 90), (std::vector<std::int64_t>{30, 60}));
  EXPECT_EQ(decay_iterations(cfg, 400), (std::vector<std::int64_t>{133, 266}));
  EXPECT_EQ(decay_iterations(cfg, 2), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(decay_iterations(cfg, 1), (std::vector<std::int64_t>{}));
}

TEST(GradientSchedule, StepsAndResetsToBest) {
  const auto f = shifted_sphere(normal_vector(4, 2));
  for (auto m : {GradientMethod::adam, GradientMethod::nesterov, GradientMethod::lbfgs}) {
    GradientMethodConfig cfg;
    cfg.method = m;
    std::vector<double> steps, losses;
    std::vector<std::vector<double>> zs;
    const auto trace = run_gradient_method(f, cfg, 450, 7, [&](const IterationEvent& e) {
      steps.push_back(e.step);
      losses.push_back(e.loss);
      zs.emplace_back(e.z.begin(), e.z.end());
    });
    ASSERT_EQ(steps.size(), 90u);
    for (std::size_t t = 0; t < 90; ++t) EXPECT_DOUBLE_EQ(steps[t], t < 30 ? 1.0 : t < 60 ? 0.1 : 0.01);
    for (std::size_t k : {30u, 60u}) {
      const auto best = std::min_element(losses.begin(), losses.begin() + static_cast<long>(k)) - losses.begin();
      EXPECT_EQ(zs[k], zs[static_cast<std::size_t>(best)]) << to_string(m) << " at " << k;
    }
    EXPECT_EQ(trace.points.size(), 90u);
    EXPECT_EQ(trace.points.back().spent_units, 450);
  }
}

TEST(GradientMethods, RejectBlackBoxAndTinyBudgets) {
  const FunctionObjective f(3, [](std::span<const double>) { return 0.0; });
  GradientMethodConfig cfg;
  EXPECT_THROW(run_gradient_method(f, cfg, 100, 1), CapabilityError);
  EXPECT_THROW(run_gradient_method(shifted_sphere({0, 0}), cfg, 4, 1), ValidationError);
}

TEST(Mutation, SingleCoordinateAlwaysResampled) {
  Rng rng(1);
  for (double rate : {0.01, 0.5, 1.0}) {
    const std::vector<double> z{0.123};
    for (int k = 0; k < 50; ++k) EXPECT_NE(mutate_coordinates(z, rate, rng)[0], 0.123);
  }
}

TEST(Mutation, RateOneResamplesEveryFreeCoordinate) {
  Rng rng(2);
  const std::vector<double> z(10, 0.5);
  std::vector<bool> frozen(10, false);
  frozen[3] = frozen[7] = true;
  const auto out = mutate_coordinates(z, 1.0, rng, frozen);
  for (std::size_t i = 0; i < 10; ++i) {
    if (frozen[i])
      EXPECT_EQ(out[i], 0.5);
    else
      EXPECT_NE(out[i], 0.5);
  }
  EXPECT_THROW(mutate_coordinates(z, 1.0, rng, std::vector<bool>(10, true)), ValidationError);
}

TEST(Mutation, ChangedCountMatchesConditionalBinomial) {
  Rng rng(3);
  const std::size_t d = 64, trials = 10000;
  const double r = 1.0 / 64.0;
  const std::vector<double> z(d, 0.0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto out = mutate_coordinates(z, r, rng);
    double changed = 0;
    for (double v : out) changed += v != 0.0;
    sum += changed;
    sum_sq += changed * changed;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  const double expect = d * r / (1.0 - std::pow(1.0 - r, static_cast<double>(d)));
  EXPECT_NEAR(mean, expect, 3.0 * se);
}

TEST(TwoPointCrossover, DefinitionCases) {
  const std::vector<double> p{0, 1, 2, 3, 4, 5}, m{10, 11, 12, 13, 14, 15};
  EXPECT_EQ(two_point_crossover_at(p, m, 2, 5), (std::vector<double>{0, 1, 12, 13, 14, 5}));
  EXPECT_EQ(two_point_crossover_at(p, m, 0, 6), m);
  EXPECT_THROW(two_point_crossover_at(p, m, 3, 3), ValidationError);
  EXPECT_THROW(two_point_crossover_at(p, m, 2, 7), ValidationError);
}

TEST(TwoPointCrossover, CutPairsUniform) {
  Rng rng(4);
  const std::size_t d = 4;
  const std::vector<double> p(d, 0.0), m(d, 1.0);
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto c = two_point_crossover(p, m, rng);
    std::size_t i = 0;
    while (c[i] == 0.0) ++i;
    std::size_t j = i;
    while (j < d && c[j] == 1.0) ++j;
    for (std::size_t k = j; k < d; ++k) ASSERT_EQ(c[k], 0.0);
    ++counts[{i, j}];
  }
  ASSERT_EQ(counts.size(), d * (d + 1) / 2);
  const double expect = static_cast<double>(trials) / static_cast<double>(counts.size());
  for (const auto& [pair, n] : counts) EXPECT_NEAR(n, expect, 5.0 * std::sqrt(expect));
}

TEST(RateCrossover, DefinitionCases) {
  Rng rng(5);
  const auto p = normal_vector(8, 6), m = normal_vector(8, 7);
  EXPECT_EQ(rate_crossover(p, m, 1.0, rng), m);
  EXPECT_EQ(rate_crossover(p, p, 0.3, rng), p);
}

TEST(RateCrossover, MutantCountMatchesExpectation) {
  Rng rng(8);
  const std::size_t d = 64, trials = 10000;
  const std::vector<double> p(d, 0.0), m(d, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    double n = 0.0;
    for (double v : rate_crossover(p, m, 1.0 / 64.0, rng)) n += v;
    sum += n;
    sum_sq += n * n;
  }
  const double mean = sum / trials, se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, 1.0 + (d - 1.0) / d, 3.0 * se);
}

TEST(Es, ParentsStartAtZeroAndElitismHolds) {
  const auto f = shifted_sphere(std::vector<double>(6, 0.0));
  for (auto cfg : {EsConfig{1, 1, std::nullopt}, EsConfig{3, 5, std::nullopt}}) {
    const auto t = run_es(f, cfg, 200, 9);
    ASSERT_GE(t.points.size(), cfg.mu);
    for (std::size_t j = 0; j < cfg.mu; ++j) EXPECT_EQ(t.points[j].current_loss, 0.0);
    EXPECT_EQ(t.best_loss(), 0.0);
    EXPECT_EQ(t.best_latent.flat(), std::vector<double>(6, 0.0));
    EXPECT_EQ(t.points.size(), 200u);
  }
  EXPECT_EQ(run_es(f, {1, 1, std::nullopt}, 10, 1).optimizer_name, "dopo");
  EXPECT_THROW(run_es(f, {5, 27, std::nullopt}, 20, 1), ValidationError);
}

TEST(Es, DeterministicPerSeed) {
  const auto f = shifted_sphere(normal_vector(8, 10));
  EXPECT_EQ(run_es(f, {5, 27, std::nullopt}, 500, 3), run_es(f, {5, 27, std::nullopt}, 500, 3));
}

TEST(Es, DopoBeatsRandomSearchOnSphere) {
  const auto f = shifted_sphere(normal_vector(16, 11));
  std::vector<double> dopo, rs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    dopo.push_back(run_es(f, {1, 1, std::nullopt}, 2000, s).best_loss());
    rs.push_back(run_random_search(f, 2000, s).best_loss());
  }
  EXPECT_LT(median(dopo), median(rs));
}

TEST(De, ZeroWeightWithEqualMembersIsStationary) {
  const auto f = shifted_sphere(normal_vector(5, 12));
  const std::vector<Vector> pop(6, normal_vector(5, 13));
  DeConfig cfg;
  cfg.differential_weight = 0.0;
  Rng rng(14);
  for (auto c : {Crossover::two_point, Crossover::rate_1_over_d}) {
    cfg.crossover = c;
    for (std::size_t i = 0; i < pop.size(); ++i) EXPECT_EQ(de_trial(pop, i, cfg, f, rng), pop[i]);
  }
}

TEST(De, TrialTouchesOnlyFreeCoordinates) {
  auto f = shifted_sphere(normal_vector(5, 15));
  f.set_constraints({false, true, false, true, false}, {0, 7, 0, -7, 0});
  std::vector<Vector> pop;
  for (unsigned k = 0; k < 6; ++k) {
    auto x = normal_vector(5, 20 + k);
    x[1] = 7;
    x[3] = -7;
    pop.push_back(x);
  }
  Rng rng(16);
  for (int k = 0; k < 50; ++k) {
    const auto c = de_trial(pop, static_cast<std::size_t>(k % 6), DeConfig{}, f, rng);
    EXPECT_EQ(c[1], 7.0);
    EXPECT_EQ(c[3], -7.0);
  }
}

TEST(De, BeatsRandomSearchOnSphere) {
  const auto f = shifted_sphere(normal_vector(16, 17));
  std::vector<double> de, rs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    de.push_back(run_de(f, DeConfig{}, 2000, s).best_loss());
    rs.push_back(run_random_search(f, 2000, s).best_loss());
  }
  EXPECT_LT(median(de), median(rs));
}

TEST(De, RunIsDeterministicAndBestMonotone) {
  const auto f = shifted_sphere(normal_vector(8, 18));
  DeConfig cfg;
  cfg.crossover = Crossover::rate_1_over_d;
  const auto t = run_de(f, cfg, 600, 5);
  EXPECT_EQ(t, run_de(f, cfg, 600, 5));
  EXPECT_EQ(t.optimizer_name, "dde");
  EXPECT_EQ(t.points.size(), 600u);
  for (std::size_t i = 1; i < t.points.size(); ++i) EXPECT_LE(t.points[i].best_loss, t.points[i - 1].best_loss);
}

TEST(ComparisonOnly, TracesInvariantUnderExp) {
  const auto f = shifted_sphere(normal_vector(6, 19));
  const ExpObjective g(f);
  for (const std::string name : {"rs", "dopo", "es", "2pde", "dde"}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto a = run_optimizer(name, f, 300, s), b = run_optimizer(name, g, 300, s);
      ASSERT_EQ(a.points.size(), b.points.size()) << name;
      for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(b.points[i].current_loss, std::exp(a.points[i].current_loss)) << name;
        EXPECT_EQ(b.points[i].spent_units, a.points[i].spent_units);
      }
      EXPECT_EQ(a.best_latent, b.best_latent) << name;
    }
  }
}

TEST(Dispatch, NamesAndMinimumBudgets) {
  EXPECT_EQ(optimizer_names().size(), 8u);
  EXPECT_EQ(minimum_budget("lbfgs"), 5);
  EXPECT_EQ(minimum_budget("es"), 32);
  EXPECT_EQ(minimum_budget("2pde"), 30);
  EXPECT_THROW(minimum_budget("sgd"), ValidationError);
  const auto f = shifted_sphere({1.0, 2.0});
  EXPECT_THROW(run_optimizer("sgd", f, 10, 1), ValidationError);
  for (const auto& name : optimizer_names()) {
    const auto t = run_optimizer(name, f, 100, 1);
    EXPECT_EQ(t.optimizer_name, name);
    EXPECT_LE(t.points.back().spent_units, 100);
  }
}

TEST(Conditioning, FixedClassFreezesBlock) {
  const auto gen = default_registry().get("conditioned");
  const auto target = gen->generate(normal_vector(gen->latent_dim(), 20));
  const auto base = make_problem(gen, target, CriterionWeights::preset("L2"));
  const std::vector<double> cls{0, 0, 1, 0};
  const auto fixed = apply_conditioning(base, ConditioningMode::fixed_class, cls);
  EXPECT_EQ(fixed.free_coordinates().size(), 32u);

  GradientMethodConfig cfg;
  run_gradient_method(fixed, cfg, 100, 1, [&](const IterationEvent& e) {
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(e.z[32 + i], cls[i]);
  });
  for (const std::string name : {"rs", "dopo", "2pde", "dde", "lbfgs", "adam"}) {
    const auto t = run_optimizer(name, fixed, 120, 2);
    EXPECT_EQ(t.best_latent.class_block, cls) << name;
    EXPECT_EQ(t.best_latent.frozen_mask.size(), 36u);
  }
}

TEST(Conditioning, FreeAllMovesClassBlockOffIntegers) {
  const auto gen = default_registry().get("conditioned");
  std::vector<double> truth = normal_vector(gen->latent_dim(), 21);
  std::fill(truth.begin() + 32, truth.end(), 0.0);
  truth[33] = 1.0;
  const auto problem = apply_conditioning(make_problem(gen, gen->generate(truth), CriterionWeights::preset("L2+VGG")),
                                          ConditioningMode::free_all);
  EXPECT_EQ(problem.free_coordinates().size(), 36u);
  const auto t = run_optimizer("lbfgs", problem, 300, 3);
  bool non_integral = false;
  for (double v : t.best_latent.class_block) non_integral |= v != std::round(v);
  EXPECT_TRUE(non_integral);
}

TEST(Conditioning, RejectsMalformedClassValues) {
  const auto gen = default_registry().get("conditioned");
  const auto base = make_problem(gen, gen->generate(std::vector<double>(36, 0.0)), CriterionWeights::preset("L2"));
  EXPECT_THROW(apply_conditioning(base, ConditioningMode::fixed_class, std::vector<double>{0, 1, 0}), ValidationError);
  EXPECT_THROW(apply_conditioning(base, ConditioningMode::fixed_class, std::vector<double>{0, 1, 1, 0}), ValidationError);
  EXPECT_THROW(apply_conditioning(base, ConditioningMode::fixed_class, std::vector<double>{0, 0.5, 0.5, 0}),
               ValidationError);
  const auto plain = default_registry().get("mlp-d16");
  const auto p2 = make_problem(plain, plain->generate(std::vector<double>(16, 0.0)), CriterionWeights::preset("L2"));
  EXPECT_THROW(apply_conditioning(p2, ConditioningMode::fixed_class, std::vector<double>{1}), ValidationError);
}
