#include <cmath>
#include <random>
#include <string>

#include "inspire/criteria.hpp"
#include "inspire/errors.hpp"
#include "inspire/hashing.hpp"

namespace inspire {

void FeatureStackConfig::validate() const {
  if (stages == 0) throw ValidationError("feature stack needs at least one stage");
  if (kernels_per_stage == 0) throw ValidationError("feature stack needs at least one kernel per stage");
  if (input_side == 0 || input_side % (std::size_t{1} << stages) != 0)
    throw ValidationError("input_side " + std::to_string(input_side) + " must be divisible by 2^stages");
}

LayerStatistics channel_statistics(const ImageBuffer& grid) {
  const std::size_t ch = grid.channels(), n = grid.pixel_count();
  LayerStatistics s{std::vector<double>(ch, 0.0), std::vector<double>(ch, 0.0)};
  const auto v = grid.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < ch; ++c) s.means[c] += v[i * ch + c];
  for (auto& m : s.means) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < ch; ++c) {
      const double d = v[i * ch + c] - s.means[c];
      s.variances[c] += d * d;
    }
  for (auto& var : s.variances) var /= static_cast<double>(n);
  return s;
}

ConvStatsExtractor::ConvStatsExtractor(FeatureStackConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  std::size_t cin = 3;
  const std::size_t cout = cfg_.kernels_per_stage;
  for (std::size_t s = 0; s < cfg_.stages; ++s) {
    std::mt19937_64 rng(derive_seed({cfg_.seed, s}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(2.0 / static_cast<double>(9 * cin));
    std::vector<double> w(cout * cin * 9), b(cout);
    for (auto& v : w) v = normal(rng) * scale;
    for (auto& v : b) v = normal(rng) * 0.1;
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
    cin = cout;
  }
}

kernels::ConvBank ConvStatsExtractor::bank(std::size_t stage) const {
  return {weights_.at(stage), biases_.at(stage), stage == 0 ? std::size_t{3} : cfg_.kernels_per_stage,
          cfg_.kernels_per_stage};
}

ConvStatsExtractor::Tape ConvStatsExtractor::run(const ImageBuffer& img) const {
  if (img.height() != img.width()) throw DimensionError("feature extractor expects square images");
  if (img.channels() != 3) throw DimensionError("feature extractor expects 3 channels");
  if (img.height() < cfg_.input_side)
    throw DimensionError("image side " + std::to_string(img.height()) + " smaller than input_side " +
                         std::to_string(cfg_.input_side));
  Tape tape;
  ImageBuffer input = downscale_average(img, cfg_.input_side);
  for (std::size_t s = 0; s < cfg_.stages; ++s) {
    const auto b = bank(s);
    ImageBuffer pre(input.height(), input.width(), b.out_channels);
    kernels::omp::conv3x3(input.shape(), input.values(), b, pre.values());
    ImageBuffer act = pre;
    for (double& v : act.values()) v = v > 0.0 ? v : 0.0;
    tape.stats.push_back(channel_statistics(act));
    ImageBuffer next = s + 1 < cfg_.stages ? downscale_average(act, act.height() / 2) : ImageBuffer{};
    tape.inputs.push_back(std::move(input));
    tape.pre.push_back(std::move(pre));
    tape.act.push_back(std::move(act));
    input = std::move(next);
  }
  return tape;
}

std::vector<LayerStatistics> ConvStatsExtractor::extract(const ImageBuffer& img) const { return run(img).stats; }

ImageBuffer ConvStatsExtractor::statistics_vjp(const ImageBuffer& img,
                                               const std::vector<LayerStatistics>& grads) const {
  if (grads.size() != cfg_.stages) throw DimensionError("statistics_vjp: one gradient entry per stage expected");
  const Tape tape = run(img);
  ImageBuffer grad_in;  // gradient w.r.t. the input of stage s + 1
  for (std::size_t s = cfg_.stages; s-- > 0;) {
    const ImageBuffer& act = tape.act[s];
    const ImageBuffer& pre = tape.pre[s];
    const auto& st = tape.stats[s];
    const auto& g = grads[s];
    const std::size_t ch = act.channels(), n = act.pixel_count();
    if (g.means.size() != ch || g.variances.size() != ch)
      throw DimensionError("statistics_vjp: channel count mismatch at stage " + std::to_string(s));

    ImageBuffer grad_act = s + 1 < cfg_.stages ? downscale_average_adjoint(grad_in, act.height(), act.width())
                                               : ImageBuffer(act.height(), act.width(), ch);
    const double inv_n = 1.0 / static_cast<double>(n);
    auto ga = grad_act.values();
    const auto av = act.values();
    const auto pv = pre.values();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < ch; ++c) {
        const std::size_t k = i * ch + c;
        double v = ga[k] + g.means[c] * inv_n + g.variances[c] * 2.0 * (av[k] - st.means[c]) * inv_n;
        ga[k] = pv[k] > 0.0 ? v : 0.0;
      }
    const auto b = bank(s);
    const ImageBuffer& input = tape.inputs[s];
    ImageBuffer gi(input.height(), input.width(), input.channels());
    kernels::omp::conv3x3_adjoint(input.shape(), grad_act.values(), b, gi.values());
    grad_in = std::move(gi);
  }
  return downscale_average_adjoint(grad_in, img.height(), img.width());
}

}  // namespace inspire
