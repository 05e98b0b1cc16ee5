#pragma once

#include <memory>
#include <span>

#include "inspire/criteria.hpp"
#include "inspire/optimizers.hpp"

namespace inspire {

// The retrieval objective over a generator's full latent vector (z then
// class block).
class RetrievalProblem final : public Objective {
 public:
  explicit RetrievalProblem(std::shared_ptr<const RetrievalCriterion> criterion);

  std::size_t dimension() const override;
  double value(std::span<const double> x) const override;
  bool differentiable() const override;
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const override;
  LatentPoint to_latent_point(std::span<const double> x) const override;

  const RetrievalCriterion& criterion() const { return *criterion_; }
  std::shared_ptr<const RetrievalCriterion> criterion_ptr() const { return criterion_; }

 private:
  std::shared_ptr<const RetrievalCriterion> criterion_;
};

// Default extractor and discriminator used by the CLI, harness and service.
std::shared_ptr<const FeatureExtractor> default_feature_extractor();
std::shared_ptr<const Discriminator> default_discriminator();

RetrievalProblem make_problem(std::shared_ptr<const Generator> gen, ImageBuffer target, const CriterionWeights& weights,
                              std::shared_ptr<const Discriminator> disc = default_discriminator(),
                              std::shared_ptr<const FeatureExtractor> features = default_feature_extractor());

enum class ConditioningMode { free_all, fixed_class };

// free_all: every coordinate (z and class block) is optimised continuously.
// fixed_class: the class block is pinned to `class_value` (one-hot per group)
// and frozen. Throws ValidationError for a malformed class value or a
// generator without class groups.
RetrievalProblem apply_conditioning(const RetrievalProblem& problem, ConditioningMode mode,
                                    std::span<const double> class_value = {});

// Validates a class block against the generator's groups.
void require_one_hot_block(const Generator& gen, std::span<const double> class_value);

}  // namespace inspire
