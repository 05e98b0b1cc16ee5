#include "inspire/criteria.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "inspire/errors.hpp"

namespace inspire {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

CriterionWeights CriterionWeights::preset(const std::string& name) {
  const std::string key = lower(name);
  if (key == "l2") return {50.0, 0.0, 1.0, 0.0, "L2"};
  if (key == "l2+vgg") return {50.0, 1.0, 1.0, 0.1, "L2+VGG"};
  if (key == "vgg") return {0.0, 1.0, 1.0, 0.1, "VGG"};
  if (key == "vgg-nor") return {0.0, 1.0, 1.0, 0.0, "VGG-noR"};
  throw ValidationError("unknown criterion preset '" + name + "'");
}

std::vector<std::string> CriterionWeights::preset_names() { return {"L2", "L2+VGG", "VGG", "VGG-noR"}; }

void CriterionWeights::validate() const {
  for (double v : {lambda_L, lambda_S, lambda_nu, lambda_R})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("criterion weights must be finite and non-negative");
}

// ---------------------------------------------------------------------------

double pixel_loss(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "pixel_loss");
  const auto av = a.values(), bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixel_count());
}

ImageBuffer pixel_loss_gradient(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "pixel_loss_gradient");
  ImageBuffer g(a.height(), a.width(), a.channels());
  const double scale = 2.0 / static_cast<double>(a.pixel_count());
  for (std::size_t i = 0; i < a.size(); ++i) g.values()[i] = scale * (a.values()[i] - b.values()[i]);
  return g;
}

namespace {

void require_matching_stats(const std::vector<LayerStatistics>& a, const std::vector<LayerStatistics>& b) {
  if (a.size() != b.size()) throw DimensionError("feature_loss: stage count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].means.size() != b[i].means.size() || a[i].variances.size() != b[i].variances.size())
      throw DimensionError("feature_loss: channel count mismatch");
}

}  // namespace

double feature_loss(const std::vector<LayerStatistics>& a, const std::vector<LayerStatistics>& b,
                    bool square_variance_term) {
  require_matching_stats(a, b);
  double mean_term = 0.0, var_term = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double m2 = 0.0, v2 = 0.0;
    for (std::size_t c = 0; c < a[i].means.size(); ++c) {
      const double dm = a[i].means[c] - b[i].means[c];
      const double dv = a[i].variances[c] - b[i].variances[c];
      m2 += dm * dm;
      v2 += dv * dv;
    }
    mean_term += m2;
    var_term += square_variance_term ? v2 : std::sqrt(v2);
  }
  return mean_term + var_term;
}

double feature_loss(const ImageBuffer& a, const ImageBuffer& b, const FeatureExtractor& extractor,
                    bool square_variance_term) {
  require_same_shape(a, b, "feature_loss");
  return feature_loss(extractor.extract(a), extractor.extract(b), square_variance_term);
}

std::vector<LayerStatistics> feature_loss_gradient(const std::vector<LayerStatistics>& a,
                                                   const std::vector<LayerStatistics>& b,
                                                   bool square_variance_term) {
  require_matching_stats(a, b);
  std::vector<LayerStatistics> g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t ch = a[i].means.size();
    g[i].means.resize(ch);
    g[i].variances.resize(ch);
    double v2 = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
      const double dv = a[i].variances[c] - b[i].variances[c];
      v2 += dv * dv;
    }
    const double norm = std::sqrt(v2);
    for (std::size_t c = 0; c < ch; ++c) {
      g[i].means[c] = 2.0 * (a[i].means[c] - b[i].means[c]);
      const double dv = a[i].variances[c] - b[i].variances[c];
      if (square_variance_term)
        g[i].variances[c] = 2.0 * dv;
      else
        g[i].variances[c] = norm > 0.0 ? dv / norm : 0.0;
    }
  }
  return g;
}

double norm_penalty(std::span<const double> z) {
  if (z.empty()) return 0.0;
  double sq = 0.0;
  for (double v : z) sq += v * v;
  const double r = sq / static_cast<double>(z.size()) - 1.0;
  return r * r;
}

std::vector<double> norm_penalty_gradient(std::span<const double> z) {
  std::vector<double> g(z.size(), 0.0);
  if (z.empty()) return g;
  const double n = static_cast<double>(z.size());
  double sq = 0.0;
  for (double v : z) sq += v * v;
  const double scale = 4.0 / n * (sq / n - 1.0);
  for (std::size_t i = 0; i < z.size(); ++i) g[i] = scale * z[i];
  return g;
}

double realism_penalty(const Discriminator& disc, const ImageBuffer& img) { return -disc.score(img); }

double classification_loss(const std::vector<std::vector<double>>& logit_groups,
                           const std::vector<std::vector<double>>& labels) {
  if (logit_groups.size() != labels.size()) throw ValidationError("classification_loss: group count mismatch");
  double loss = 0.0;
  for (std::size_t g = 0; g < logit_groups.size(); ++g) {
    const auto& logits = logit_groups[g];
    const auto& label = labels[g];
    if (logits.empty() || logits.size() != label.size())
      throw ValidationError("classification_loss: label length does not match logits");
    std::size_t hot = 0, ones = 0;
    for (std::size_t i = 0; i < label.size(); ++i) {
      if (label[i] == 1.0) {
        hot = i;
        ++ones;
      } else if (label[i] != 0.0) {
        throw ValidationError("classification_loss: label is not one-hot");
      }
    }
    if (ones != 1) throw ValidationError("classification_loss: label is not one-hot");
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - peak);
    loss -= logits[hot] - peak - std::log(sum);
  }
  return loss;
}

// ---------------------------------------------------------------------------

RetrievalCriterion::RetrievalCriterion(std::shared_ptr<const Generator> gen,
                                       std::shared_ptr<const Discriminator> disc,
                                       std::shared_ptr<const FeatureExtractor> features, ImageBuffer target,
                                       CriterionWeights weights, bool square_variance_term)
    : gen_(std::move(gen)),
      disc_(std::move(disc)),
      features_(std::move(features)),
      target_(std::move(target)),
      weights_(std::move(weights)),
      square_variance_(square_variance_term) {
  if (!gen_) throw ValidationError("criterion needs a generator");
  weights_.validate();
  if (target_.height() != gen_->output_side() || target_.width() != gen_->output_side() || target_.channels() != 3)
    throw DimensionError("target must be " + std::to_string(gen_->output_side()) + "x" +
                         std::to_string(gen_->output_side()) + "x3");
  if (weights_.lambda_R != 0.0 && !disc_) throw ValidationError("lambda_R > 0 requires a discriminator");
  if (weights_.lambda_S != 0.0) {
    if (!features_) throw ValidationError("lambda_S > 0 requires a feature extractor");
    target_stats_ = features_->extract(target_);
  }
}

CriterionBreakdown RetrievalCriterion::breakdown_of(const ImageBuffer& img, std::span<const double> latent) const {
  CriterionBreakdown b;
  // Summed in a fixed order: S, nu, R, L.
  if (weights_.lambda_S != 0.0) b.feature = feature_loss(features_->extract(img), target_stats_, square_variance_);
  if (weights_.lambda_nu != 0.0) b.norm = norm_penalty(latent.first(gen_->continuous_dim()));
  if (weights_.lambda_R != 0.0) b.realism = realism_penalty(*disc_, img);
  if (weights_.lambda_L != 0.0) b.pixel = pixel_loss(img, target_);
  b.total = weights_.lambda_S * b.feature + weights_.lambda_nu * b.norm + weights_.lambda_R * b.realism +
            weights_.lambda_L * b.pixel;
  return b;
}

CriterionBreakdown RetrievalCriterion::breakdown(std::span<const double> latent) const {
  return breakdown_of(gen_->generate(latent), latent);
}

double RetrievalCriterion::value(std::span<const double> latent) const { return breakdown(latent).total; }

double RetrievalCriterion::value_and_gradient(std::span<const double> latent, std::span<double> grad) const {
  if (!gen_->differentiable()) throw CapabilityError("generator '" + gen_->id() + "' is not differentiable");
  if (weights_.lambda_R != 0.0 && !disc_->differentiable())
    throw CapabilityError("discriminator '" + disc_->id() + "' is not differentiable");
  if (grad.size() != latent.size()) throw DimensionError("gradient buffer size mismatch");

  const ImageBuffer img = gen_->generate(latent);
  CriterionBreakdown b;
  ImageBuffer cot(img.height(), img.width(), img.channels());
  auto add = [&](const ImageBuffer& part, double scale) {
    for (std::size_t i = 0; i < cot.size(); ++i) cot.values()[i] += scale * part.values()[i];
  };
  if (weights_.lambda_S != 0.0) {
    const auto stats = features_->extract(img);
    b.feature = feature_loss(stats, target_stats_, square_variance_);
    add(features_->statistics_vjp(img, feature_loss_gradient(stats, target_stats_, square_variance_)),
        weights_.lambda_S);
  }
  if (weights_.lambda_nu != 0.0) b.norm = norm_penalty(latent.first(gen_->continuous_dim()));
  if (weights_.lambda_R != 0.0) b.realism = realism_penalty(*disc_, img);
  if (weights_.lambda_L != 0.0) b.pixel = pixel_loss(img, target_);
  b.total = weights_.lambda_S * b.feature + weights_.lambda_nu * b.norm + weights_.lambda_R * b.realism +
            weights_.lambda_L * b.pixel;

  if (weights_.lambda_R != 0.0) add(disc_->score_gradient(img), -weights_.lambda_R);
  if (weights_.lambda_L != 0.0) add(pixel_loss_gradient(img, target_), weights_.lambda_L);

  bool any_image_term = weights_.lambda_S != 0.0 || weights_.lambda_R != 0.0 || weights_.lambda_L != 0.0;
  if (any_image_term) {
    const auto g = gen_->vjp(latent, cot.values());
    std::copy(g.begin(), g.end(), grad.begin());
  } else {
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  if (weights_.lambda_nu != 0.0) {
    const auto gn = norm_penalty_gradient(latent.first(gen_->continuous_dim()));
    for (std::size_t i = 0; i < gn.size(); ++i) grad[i] += weights_.lambda_nu * gn[i];
  }
  return b.total;
}

double total_criterion(std::span<const double> latent, const ImageBuffer& target, const CriterionWeights& w,
                       std::shared_ptr<const Generator> gen, std::shared_ptr<const Discriminator> disc,
                       std::shared_ptr<const FeatureExtractor> features) {
  return RetrievalCriterion(std::move(gen), std::move(disc), std::move(features), target, w).value(latent);
}

std::vector<double> total_criterion_gradient(std::span<const double> latent, const ImageBuffer& target,
                                             const CriterionWeights& w, std::shared_ptr<const Generator> gen,
                                             std::shared_ptr<const Discriminator> disc,
                                             std::shared_ptr<const FeatureExtractor> features) {
  RetrievalCriterion crit(std::move(gen), std::move(disc), std::move(features), target, w);
  std::vector<double> grad(latent.size());
  crit.value_and_gradient(latent, grad);
  return grad;
}

}  // namespace inspire
