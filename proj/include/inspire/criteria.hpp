#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "inspire/generators.hpp"
#include "inspire/kernels.hpp"
#include "inspire/tensor.hpp"

namespace inspire {

// ---------------------------------------------------------------------------
// Weights

struct CriterionWeights {
  double lambda_L = 0.0;   // pixel loss
  double lambda_S = 0.0;   // feature-statistics loss
  double lambda_nu = 0.0;  // latent norm penalty
  double lambda_R = 0.0;   // realism penalty
  std::string preset_name = "custom";

  // "L2", "L2+VGG", "VGG", "VGG-noR" (case-insensitive). Throws ValidationError.
  static CriterionWeights preset(const std::string& name);
  static std::vector<std::string> preset_names();
  void validate() const;
};

// ---------------------------------------------------------------------------
// Feature extraction

struct FeatureStackConfig {
  std::uint64_t seed = 7;
  std::size_t stages = 3;
  std::size_t kernels_per_stage = 8;
  std::size_t input_side = 32;
  // Square the variance term of the feature loss. Off by default: the
  // variance differences enter through an unsquared Euclidean norm.
  bool square_variance_term = false;
  void validate() const;
};

struct LayerStatistics {
  std::vector<double> means;      // per channel
  std::vector<double> variances;  // per channel, population variance over positions
};

// Pluggable multi-stage feature extractor. Implementations must be
// immutable after construction.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<LayerStatistics> extract(const ImageBuffer& img) const = 0;
  // Pulls gradients w.r.t. every (mean, variance) entry back to the image.
  virtual ImageBuffer statistics_vjp(const ImageBuffer& img, const std::vector<LayerStatistics>& grads) const = 0;
};

// Seeded random 3x3 circular convolution banks. Each stage: conv, ReLU
// (statistics taken here), 2x2 average pool. Images are first reduced to
// input_side with block averaging.
class ConvStatsExtractor final : public FeatureExtractor {
 public:
  explicit ConvStatsExtractor(FeatureStackConfig cfg = {});

  const FeatureStackConfig& config() const { return cfg_; }
  std::size_t stage_count() const { return cfg_.stages; }
  kernels::ConvBank bank(std::size_t stage) const;

  std::vector<LayerStatistics> extract(const ImageBuffer& img) const override;
  ImageBuffer statistics_vjp(const ImageBuffer& img, const std::vector<LayerStatistics>& grads) const override;

 private:
  struct Tape {
    std::vector<ImageBuffer> inputs;  // stage inputs
    std::vector<ImageBuffer> pre;     // conv outputs
    std::vector<ImageBuffer> act;     // ReLU outputs
    std::vector<LayerStatistics> stats;
  };
  Tape run(const ImageBuffer& img) const;

  FeatureStackConfig cfg_;
  std::vector<std::vector<double>> weights_, biases_;
};

// Per-channel mean and population variance of an H x W x C grid.
LayerStatistics channel_statistics(const ImageBuffer& grid);

// ---------------------------------------------------------------------------
// Criterion terms

// (1/N_p) sum_p ||a_p - b_p||^2 with N_p = H * W.
double pixel_loss(const ImageBuffer& a, const ImageBuffer& b);
ImageBuffer pixel_loss_gradient(const ImageBuffer& a, const ImageBuffer& b);  // w.r.t. a

// sum_i ||mu_i(a) - mu_i(b)||^2 + sum_i ||var_i(a) - var_i(b)|| (norm squared
// when `square_variance_term`).
double feature_loss(const std::vector<LayerStatistics>& a, const std::vector<LayerStatistics>& b,
                    bool square_variance_term = false);
double feature_loss(const ImageBuffer& a, const ImageBuffer& b, const FeatureExtractor& extractor,
                    bool square_variance_term = false);
// Gradient w.r.t. the statistics of a. The unsquared norm uses subgradient
// 0 where the variance difference vanishes.
std::vector<LayerStatistics> feature_loss_gradient(const std::vector<LayerStatistics>& a,
                                                   const std::vector<LayerStatistics>& b,
                                                   bool square_variance_term = false);

// ((1/N) ||z||^2 - 1)^2, N = dim z.
double norm_penalty(std::span<const double> z);
std::vector<double> norm_penalty_gradient(std::span<const double> z);

// -D(img).
double realism_penalty(const Discriminator& disc, const ImageBuffer& img);

// One-hot cross-entropy summed over class groups. Throws ValidationError
// for non one-hot labels or length mismatch.
double classification_loss(const std::vector<std::vector<double>>& logit_groups,
                           const std::vector<std::vector<double>>& labels);

// ---------------------------------------------------------------------------
// Combined criterion

struct CriterionBreakdown {
  double pixel = 0.0;
  double feature = 0.0;
  double norm = 0.0;
  double realism = 0.0;
  double total = 0.0;
};

// lambda_S C_S + lambda_nu C_nu + lambda_R C_R + lambda_L C_L against a fixed
// target. Target statistics are computed once at construction. Terms with a
// zero weight are not evaluated.
class RetrievalCriterion {
 public:
  RetrievalCriterion(std::shared_ptr<const Generator> gen, std::shared_ptr<const Discriminator> disc,
                     std::shared_ptr<const FeatureExtractor> features, ImageBuffer target,
                     CriterionWeights weights, bool square_variance_term = false);

  const Generator& generator() const { return *gen_; }
  std::shared_ptr<const Generator> generator_ptr() const { return gen_; }
  const ImageBuffer& target() const { return target_; }
  const CriterionWeights& weights() const { return weights_; }

  // One generate call.
  double value(std::span<const double> latent) const;
  CriterionBreakdown breakdown(std::span<const double> latent) const;
  // Criterion of an already rendered image for `latent`.
  CriterionBreakdown breakdown_of(const ImageBuffer& rendered, std::span<const double> latent) const;

  // Value and exact adjoint. Throws CapabilityError if the generator (or a
  // discriminator with lambda_R > 0) is not differentiable.
  double value_and_gradient(std::span<const double> latent, std::span<double> grad) const;

 private:
  std::shared_ptr<const Generator> gen_;
  std::shared_ptr<const Discriminator> disc_;
  std::shared_ptr<const FeatureExtractor> features_;
  ImageBuffer target_;
  CriterionWeights weights_;
  bool square_variance_;
  std::vector<LayerStatistics> target_stats_;
};

double total_criterion(std::span<const double> latent, const ImageBuffer& target, const CriterionWeights& w,
                       std::shared_ptr<const Generator> gen, std::shared_ptr<const Discriminator> disc,
                       std::shared_ptr<const FeatureExtractor> features);

std::vector<double> total_criterion_gradient(std::span<const double> latent, const ImageBuffer& target,
                                             const CriterionWeights& w, std::shared_ptr<const Generator> gen,
                                             std::shared_ptr<const Discriminator> disc,
                                             std::shared_ptr<const FeatureExtractor> features);

}  // namespace inspire
