#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "inspire/errors.hpp"
#include "inspire/finite_difference.hpp"
#include "inspire/generators.hpp"

using namespace inspire;

namespace {

std::vector<double> normal_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

ToySpec spec_of(ToyKind kind, std::size_t d, std::uint64_t seed = 9) {
  ToySpec s;
  s.kind = kind;
  s.seed = seed;
  s.dims.latent_dim = d;
  s.dims.side = 16;
  s.dims.hidden = 24;
  if (kind == ToyKind::conditioned) s.dims.class_groups = {3, 2};
  return s;
}

// tanh(W2 tanh(W1 z + b1) + b2) written out with plain loops.
std::vector<double> mlp_reference(const MlpToyGenerator& g, const std::vector<double>& z) {
  const std::size_t d = z.size(), h = g.hidden(), p = g.b2().size();
  std::vector<double> hid(h), out(p);
  for (std::size_t j = 0; j < h; ++j) {
    double s = g.b1()[j];
    for (std::size_t i = 0; i < d; ++i) s += g.w1()[j * d + i] * z[i];
    hid[j] = std::tanh(s);
  }
  for (std::size_t k = 0; k < p; ++k) {
    double s = g.b2()[k];
    for (std::size_t j = 0; j < h; ++j) s += g.w2()[k * h + j] * hid[j];
    out[k] = std::tanh(s);
  }
  return out;
}

}  // namespace

TEST(LatentPoint, FlatRoundTrip) {
  const std::vector<double> flat{1, 2, 3, 0, 1};
  const auto p = LatentPoint::from_flat(flat, 3);
  EXPECT_EQ(p.z, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(p.class_block, (std::vector<double>{0, 1}));
  EXPECT_EQ(p.flat(), flat);
  EXPECT_THROW(LatentPoint::from_flat(flat, 6), DimensionError);
  EXPECT_THROW(LatentPoint::from_flat(flat, 3, {true}), DimensionError);
}

TEST(LinearToy, ZeroLatentGivesTanhOfBias) {
  const auto gen = make_toy(spec_of(ToyKind::linear, 8));
  const auto& lin = dynamic_cast<const LinearToyGenerator&>(*gen);
  const auto img = gen->generate(std::vector<double>(8, 0.0));
  ASSERT_EQ(img.size(), lin.bias().size());
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_DOUBLE_EQ(img.values()[i], std::tanh(lin.bias()[i]));
}

TEST(LinearToy, VjpMatchesSymbolicExpansion) {
  const std::size_t d = 8;
  const auto gen = make_toy(spec_of(ToyKind::linear, d));
  const auto& lin = dynamic_cast<const LinearToyGenerator&>(*gen);
  const auto z = normal_vector(d, 1);
  const auto cot = normal_vector(16 * 16 * 3, 2);
  const auto got = gen->vjp(z, cot);
  const auto& w = lin.weights();
  const std::size_t p = lin.bias().size();
  std::vector<double> expect(d, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    double pre = lin.bias()[k];
    for (std::size_t i = 0; i < d; ++i) pre += w[k * d + i] * z[i];
    const double t = std::tanh(pre);
    for (std::size_t i = 0; i < d; ++i) expect[i] += w[k * d + i] * cot[k] * (1.0 - t * t);
  }
  for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(got[i], expect[i], 1e-10);
}

TEST(MlpToy, MatchesReferenceForward) {
  const auto gen = make_toy(spec_of(ToyKind::mlp, 12));
  const auto& mlp = dynamic_cast<const MlpToyGenerator&>(*gen);
  for (unsigned s = 0; s < 3; ++s) {
    const auto z = normal_vector(12, 10 + s);
    const auto img = gen->generate(z);
    const auto ref = mlp_reference(mlp, z);
    ASSERT_EQ(img.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(img.values()[i], ref[i], 1e-12);
  }
}

TEST(MlpToy, DefaultRegistryEntryMatchesReference) {
  const auto gen = default_registry().get("mlp");
  const auto& mlp = dynamic_cast<const MlpToyGenerator&>(*gen);
  const auto z = normal_vector(64, 3);
  const auto ref = mlp_reference(mlp, z);
  const auto img = gen->generate(z);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(img.values()[i], ref[i], 1e-12);
}

TEST(Generators, DeterministicAndInRange) {
  for (auto kind : {ToyKind::linear, ToyKind::mlp, ToyKind::procedural, ToyKind::conditioned}) {
    const auto a = make_toy(spec_of(kind, 10)), b = make_toy(spec_of(kind, 10));
    const auto z = normal_vector(a->latent_dim(), 4);
    const auto ia = a->generate(z);
    EXPECT_EQ(ia, a->generate(z)) << to_string(kind);
    EXPECT_EQ(ia, b->generate(z)) << to_string(kind);
    EXPECT_EQ(ia.height(), 16u);
    EXPECT_EQ(ia.channels(), 3u);
    EXPECT_TRUE(within_unit_range(ia)) << to_string(kind);
    EXPECT_NE(ia, make_toy(spec_of(kind, 10, 99))->generate(z)) << to_string(kind);
  }
}

TEST(Generators, ZeroCotangentGivesZeroVjp) {
  for (auto kind : {ToyKind::linear, ToyKind::mlp, ToyKind::conditioned}) {
    const auto g = make_toy(spec_of(kind, 6));
    const auto z = normal_vector(g->latent_dim(), 5);
    for (double v : g->vjp(z, std::vector<double>(16 * 16 * 3, 0.0))) EXPECT_EQ(v, 0.0);
  }
}

TEST(Generators, VjpMatchesFiniteDifferences) {
  for (auto kind : {ToyKind::linear, ToyKind::mlp, ToyKind::conditioned}) {
    const auto g = make_toy(spec_of(kind, 6));
    const auto z = normal_vector(g->latent_dim(), 6);
    const auto cot = normal_vector(16 * 16 * 3, 7);
    auto f = [&](std::span<const double> x) {
      const auto img = g->generate(x);
      double s = 0.0;
      for (std::size_t i = 0; i < cot.size(); ++i) s += cot[i] * img.values()[i];
      return s;
    };
    EXPECT_LT(check_gradient(f, g->vjp(z, cot), z).rel_error_l2, 1e-6) << to_string(kind);
  }
}

TEST(Generators, WrongLatentSizeThrows) {
  const auto g = make_toy(spec_of(ToyKind::mlp, 6));
  EXPECT_THROW(g->generate(std::vector<double>(5)), DimensionError);
  EXPECT_THROW(g->vjp(std::vector<double>(6), std::vector<double>(3)), DimensionError);
}

TEST(ProceduralToy, NotDifferentiableAndQuantised) {
  const auto g = make_toy(spec_of(ToyKind::procedural, 8));
  EXPECT_FALSE(g->differentiable());
  const auto z = normal_vector(8, 8);
  EXPECT_THROW(g->vjp(z, std::vector<double>(16 * 16 * 3)), CapabilityError);
  const auto img = g->generate(z);
  for (double v : img.values()) EXPECT_DOUBLE_EQ(v * 4.0, std::round(v * 4.0));
}

TEST(ConditionedToy, OneHotWithZeroLatentGivesPrototype) {
  const auto spec = spec_of(ToyKind::conditioned, 5);
  const auto g = make_toy(spec);
  EXPECT_EQ(g->latent_dim(), 5u + 3u + 2u);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> latent(g->latent_dim(), 0.0);
    latent[5 + j] = 1.0;
    EXPECT_EQ(g->generate(latent), conditioned_prototype(spec, 0, j));
  }
  std::vector<double> latent(g->latent_dim(), 0.0);
  latent[5 + 3 + 1] = 1.0;
  EXPECT_EQ(g->generate(latent), conditioned_prototype(spec, 1, 1));
  EXPECT_NE(conditioned_prototype(spec, 0, 0), conditioned_prototype(spec, 0, 1));
  EXPECT_THROW(conditioned_prototype(spec, 0, 3), ValidationError);
}

TEST(MakeToy, ValidatesDims) {
  auto s = spec_of(ToyKind::mlp, 0);
  EXPECT_THROW(make_toy(s), ValidationError);
  s = spec_of(ToyKind::mlp, 513);
  EXPECT_THROW(make_toy(s), ValidationError);
  s = spec_of(ToyKind::mlp, 4);
  s.dims.side = 20;
  EXPECT_THROW(make_toy(s), ValidationError);
  s = spec_of(ToyKind::conditioned, 4);
  s.dims.class_groups = {};
  EXPECT_THROW(make_toy(s), ValidationError);
  EXPECT_THROW(parse_toy_kind("gan"), ValidationError);
  EXPECT_EQ(parse_toy_kind("procedural"), ToyKind::procedural);
}

TEST(MakeToy, SiblingsDifferButStayCorrelated) {
  auto s = spec_of(ToyKind::linear, 8);
  auto sibling = s;
  sibling.mix = 0.5;
  sibling.mix_seed = 77;
  const auto ga = make_toy(s), gb = make_toy(sibling);
  const auto& a = dynamic_cast<const LinearToyGenerator&>(*ga);
  const auto& b = dynamic_cast<const LinearToyGenerator&>(*gb);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.weights().size(); ++i) {
    ab += a.weights()[i] * b.weights()[i];
    aa += a.weights()[i] * a.weights()[i];
    bb += b.weights()[i] * b.weights()[i];
  }
  const double corr = ab / std::sqrt(aa * bb);
  EXPECT_NEAR(corr, std::sqrt(0.5), 0.05);
}

TEST(Discriminator, ConstantImageScoresMaximum) {
  SmoothnessDiscriminator d;
  EXPECT_EQ(d.score(ImageBuffer(8, 8, 3, 0.3)), 0.0);
  ImageBuffer noisy(8, 8, 3, 0.3);
  noisy.at(2, 2, 1) = 0.9;
  EXPECT_LT(d.score(noisy), 0.0);
}

TEST(Discriminator, ScoreFallsAsNoiseGrows) {
  SmoothnessDiscriminator d;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  double previous = d.score(ImageBuffer(16, 16, 3, 0.0));
  for (double amp : {0.01, 0.05, 0.1, 0.2, 0.4}) {
    ImageBuffer img(16, 16, 3);
    for (auto& v : img.values()) v = amp * normal(rng);
    const double s = d.score(img);
    EXPECT_LT(s, previous) << amp;
    previous = s;
  }
}

TEST(Discriminator, GradientMatchesFiniteDifferences) {
  SmoothnessDiscriminator d;
  const auto x = normal_vector(6 * 6 * 3, 13);
  auto f = [&](std::span<const double> v) { return d.score(ImageBuffer(6, 6, 3, {v.begin(), v.end()})); };
  const auto grad = d.score_gradient(ImageBuffer(6, 6, 3, x));
  EXPECT_LT(check_gradient(f, grad.values(), x).rel_error_l2, 1e-6);
}

TEST(Registry, DefaultEntries) {
  const auto reg = default_registry();
  EXPECT_EQ(reg.ids(), (std::vector<std::string>{"conditioned", "linear", "mlp", "mlp-d16", "procedural"}));
  EXPECT_EQ(reg.get("mlp-d16")->latent_dim(), 16u);
  EXPECT_EQ(reg.get("conditioned")->latent_dim(), 36u);
  EXPECT_FALSE(reg.get("procedural")->differentiable());
  EXPECT_EQ(reg.find("nope"), nullptr);
  EXPECT_THROW(reg.get("nope"), NotFoundError);
  ASSERT_TRUE(reg.spec_of("linear"));
  EXPECT_EQ(reg.spec_of("linear")->kind, ToyKind::linear);
  EXPECT_EQ(make_toy(*reg.spec_of("mlp"))->generate(std::vector<double>(64, 0.1)),
            reg.get("mlp")->generate(std::vector<double>(64, 0.1)));
}
