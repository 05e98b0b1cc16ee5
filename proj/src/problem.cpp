#include "inspire/problem.hpp"

#include <string>

#include "inspire/errors.hpp"

namespace inspire {

RetrievalProblem::RetrievalProblem(std::shared_ptr<const RetrievalCriterion> criterion)
    : criterion_(std::move(criterion)) {
  if (!criterion_) throw ValidationError("problem needs a criterion");
  const std::size_t n = dimension();
  set_constraints(std::vector<bool>(n, false), Vector(n, 0.0));
}

std::size_t RetrievalProblem::dimension() const { return criterion_->generator().latent_dim(); }

double RetrievalProblem::value(std::span<const double> x) const { return criterion_->value(x); }

bool RetrievalProblem::differentiable() const {
  return criterion_->generator().differentiable();
}

double RetrievalProblem::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  return criterion_->value_and_gradient(x, grad);
}

LatentPoint RetrievalProblem::to_latent_point(std::span<const double> x) const {
  return LatentPoint::from_flat(x, criterion_->generator().continuous_dim(), frozen_mask());
}

std::shared_ptr<const FeatureExtractor> default_feature_extractor() {
  static const auto extractor = std::make_shared<const ConvStatsExtractor>(FeatureStackConfig{});
  return extractor;
}

std::shared_ptr<const Discriminator> default_discriminator() {
  static const auto disc = std::make_shared<const SmoothnessDiscriminator>();
  return disc;
}

RetrievalProblem make_problem(std::shared_ptr<const Generator> gen, ImageBuffer target, const CriterionWeights& weights,
                              std::shared_ptr<const Discriminator> disc,
                              std::shared_ptr<const FeatureExtractor> features) {
  return RetrievalProblem(std::make_shared<const RetrievalCriterion>(std::move(gen), std::move(disc),
                                                                     std::move(features), std::move(target), weights));
}

void require_one_hot_block(const Generator& gen, std::span<const double> class_value) {
  if (class_value.size() != gen.class_dim())
    throw ValidationError("class value has " + std::to_string(class_value.size()) + " entries, generator expects " +
                          std::to_string(gen.class_dim()));
  std::size_t offset = 0;
  for (auto k : gen.class_groups()) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = class_value[offset + i];
      if (v == 1.0)
        ++ones;
      else if (v != 0.0)
        throw ValidationError("class value entries must be 0 or 1");
    }
    if (ones != 1) throw ValidationError("each class group must contain exactly one 1");
    offset += k;
  }
}

RetrievalProblem apply_conditioning(const RetrievalProblem& problem, ConditioningMode mode,
                                    std::span<const double> class_value) {
  RetrievalProblem out(problem.criterion_ptr());
  const Generator& gen = problem.criterion().generator();
  const std::size_t n = gen.latent_dim(), d = gen.continuous_dim();
  if (mode == ConditioningMode::free_all) return out;
  if (gen.class_groups().empty()) throw ValidationError("fixed_class conditioning needs a class-conditioned generator");
  require_one_hot_block(gen, class_value);
  std::vector<bool> mask(n, false);
  Vector anchor(n, 0.0);
  for (std::size_t i = d; i < n; ++i) {
    mask[i] = true;
    anchor[i] = class_value[i - d];
  }
  out.set_constraints(std::move(mask), std::move(anchor));
  return out;
}

}  // namespace inspire
