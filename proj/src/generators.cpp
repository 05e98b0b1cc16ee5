#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "inspire/errors.hpp"
#include "inspire/generators.hpp"
#include "inspire/hashing.hpp"
#include "inspire/kernels.hpp"

namespace inspire {

std::vector<double> LatentPoint::flat() const {
  std::vector<double> out(z);
  out.insert(out.end(), class_block.begin(), class_block.end());
  return out;
}

LatentPoint LatentPoint::from_flat(std::span<const double> flat, std::size_t continuous_dim,
                                   std::vector<bool> frozen_mask) {
  if (continuous_dim > flat.size()) throw DimensionError("LatentPoint: continuous block larger than vector");
  if (!frozen_mask.empty() && frozen_mask.size() != flat.size())
    throw DimensionError("LatentPoint: frozen mask length mismatch");
  LatentPoint p;
  p.z.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(continuous_dim));
  p.class_block.assign(flat.begin() + static_cast<std::ptrdiff_t>(continuous_dim), flat.end());
  p.frozen_mask = std::move(frozen_mask);
  return p;
}

// ---------------------------------------------------------------------------

Generator::Generator(std::string id, std::size_t continuous_dim, std::vector<std::size_t> class_groups,
                     std::size_t side)
    : id_(std::move(id)), continuous_dim_(continuous_dim), class_groups_(std::move(class_groups)), side_(side) {}

std::size_t Generator::class_dim() const {
  std::size_t n = 0;
  for (auto k : class_groups_) n += k;
  return n;
}

GeneratorHandle Generator::handle() const {
  return {id_, latent_dim(), side_, differentiable(), class_groups_};
}

void Generator::check_latent(std::size_t n) const {
  if (n != latent_dim())
    throw DimensionError("generator '" + id_ + "' expects latent of size " + std::to_string(latent_dim()) +
                         ", got " + std::to_string(n));
}

ImageBuffer Generator::generate(std::span<const double> latent) const {
  check_latent(latent.size());
  ImageBuffer out(side_, side_, 3);
  forward(latent, out.values());
  return out;
}

ImageBuffer Generator::generate(const LatentPoint& p) const {
  if (p.z.size() != continuous_dim_ || p.class_block.size() != class_dim())
    throw DimensionError("generator '" + id_ + "': latent block sizes do not match");
  return generate(p.flat());
}

std::vector<double> Generator::vjp(std::span<const double> latent, std::span<const double> cotangent) const {
  if (!differentiable()) throw CapabilityError("generator '" + id_ + "' is not differentiable");
  check_latent(latent.size());
  if (cotangent.size() != side_ * side_ * 3) throw DimensionError("vjp: cotangent size mismatch");
  std::vector<double> grad(latent.size(), 0.0);
  backward(latent, cotangent, grad);
  return grad;
}

void Generator::backward(std::span<const double>, std::span<const double>, std::span<double>) const {
  throw CapabilityError("generator '" + id_ + "' is not differentiable");
}

// ---------------------------------------------------------------------------

double SmoothnessDiscriminator::score(const ImageBuffer& img) const {
  std::vector<double> lap(img.size());
  kernels::omp::laplacian(img.shape(), img.values(), lap);
  double acc = 0.0;
  for (double v : lap) acc += v * v;
  return -acc / static_cast<double>(img.size());
}

ImageBuffer SmoothnessDiscriminator::score_gradient(const ImageBuffer& img) const {
  // The circular Laplacian is symmetric, so d/dx of -mean((Lx)^2) is -2/N L(Lx).
  std::vector<double> lap(img.size());
  kernels::omp::laplacian(img.shape(), img.values(), lap);
  ImageBuffer grad(img.height(), img.width(), img.channels());
  kernels::omp::laplacian(img.shape(), lap, grad.values());
  const double scale = -2.0 / static_cast<double>(img.size());
  for (double& v : grad.values()) v *= scale;
  return grad;
}

// ---------------------------------------------------------------------------

std::string to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::linear: return "linear";
    case ToyKind::mlp: return "mlp";
    case ToyKind::procedural: return "procedural";
    case ToyKind::conditioned: return "conditioned";
  }
  return "unknown";
}

ToyKind parse_toy_kind(const std::string& name) {
  if (name == "linear") return ToyKind::linear;
  if (name == "mlp") return ToyKind::mlp;
  if (name == "procedural") return ToyKind::procedural;
  if (name == "conditioned") return ToyKind::conditioned;
  throw ValidationError("unknown generator kind '" + name + "'");
}

namespace {

constexpr std::size_t kChannels = 3;

// Seeded standard normals scaled by `scale`, blended with a second draw when
// the spec asks for a sibling generator.
std::vector<double> draw_params(const ToySpec& spec, std::uint64_t salt, std::size_t n, double scale) {
  auto draw = [&](std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed({seed, salt}));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = normal(rng) * scale;
    return v;
  };
  auto own = draw(spec.seed);
  if (spec.mix > 0.0) {
    const auto other = draw(spec.mix_seed);
    const double a = std::sqrt(1.0 - spec.mix), b = std::sqrt(spec.mix);
    for (std::size_t i = 0; i < n; ++i) own[i] = a * own[i] + b * other[i];
  }
  return own;
}

void validate_dims(const ToySpec& spec) {
  const auto& d = spec.dims;
  if (d.latent_dim == 0 || d.latent_dim > 512)
    throw ValidationError("latent_dim must be in [1, 512], got " + std::to_string(d.latent_dim));
  if (d.side != 16 && d.side != 32 && d.side != 64)
    throw ValidationError("side must be one of 16, 32, 64, got " + std::to_string(d.side));
  if (spec.kind == ToyKind::mlp && d.hidden == 0) throw ValidationError("mlp hidden width must be positive");
  if (spec.kind == ToyKind::conditioned) {
    if (d.class_groups.empty()) throw ValidationError("conditioned toy needs at least one class group");
    for (auto k : d.class_groups)
      if (k < 2) throw ValidationError("class groups need at least two values");
  } else if (!d.class_groups.empty()) {
    throw ValidationError(to_string(spec.kind) + " toy does not take class groups");
  }
  if (spec.mix < 0.0 || spec.mix > 1.0) throw ValidationError("mix must be in [0, 1]");
}

std::size_t pixel_values(const ToySpec& s) { return s.dims.side * s.dims.side * kChannels; }

kernels::MatrixView view(const std::vector<double>& m, std::size_t rows, std::size_t cols) {
  return {m, rows, cols};
}

}  // namespace

LinearToyGenerator::LinearToyGenerator(std::string id, const ToySpec& spec)
    : Generator(std::move(id), spec.dims.latent_dim, {}, spec.dims.side) {
  const std::size_t d = spec.dims.latent_dim, p = pixel_values(spec);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  w_ = draw_params(spec, 1, p * d, scale);
  b_ = draw_params(spec, 2, p, scale);
}

void LinearToyGenerator::forward(std::span<const double> latent, std::span<double> out) const {
  kernels::omp::affine(view(w_, out.size(), latent.size()), latent, b_, out);
  for (double& v : out) v = std::tanh(v);
}

void LinearToyGenerator::backward(std::span<const double> latent, std::span<const double> cot,
                                  std::span<double> grad) const {
  std::vector<double> delta(cot.size());
  forward(latent, delta);
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = cot[i] * (1.0 - delta[i] * delta[i]);
  kernels::omp::affine_transpose(view(w_, delta.size(), latent.size()), delta, grad);
}

MlpToyGenerator::MlpToyGenerator(std::string id, const ToySpec& spec)
    : Generator(std::move(id), spec.dims.latent_dim, {}, spec.dims.side), hidden_(spec.dims.hidden) {
  const std::size_t d = spec.dims.latent_dim, p = pixel_values(spec);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  w1_ = draw_params(spec, 11, hidden_ * d, s1);
  b1_ = draw_params(spec, 12, hidden_, s1);
  w2_ = draw_params(spec, 13, p * hidden_, s2);
  b2_ = draw_params(spec, 14, p, s2);
}

void MlpToyGenerator::forward(std::span<const double> latent, std::span<double> out) const {
  std::vector<double> h(hidden_);
  kernels::omp::affine(view(w1_, hidden_, latent.size()), latent, b1_, h);
  for (double& v : h) v = std::tanh(v);
  kernels::omp::affine(view(w2_, out.size(), hidden_), h, b2_, out);
  for (double& v : out) v = std::tanh(v);
}

void MlpToyGenerator::backward(std::span<const double> latent, std::span<const double> cot,
                               std::span<double> grad) const {
  std::vector<double> h(hidden_), out(cot.size());
  kernels::omp::affine(view(w1_, hidden_, latent.size()), latent, b1_, h);
  for (double& v : h) v = std::tanh(v);
  kernels::omp::affine(view(w2_, out.size(), hidden_), h, b2_, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = std::tanh(out[i]);
    out[i] = cot[i] * (1.0 - t * t);
  }
  std::vector<double> gh(hidden_);
  kernels::omp::affine_transpose(view(w2_, out.size(), hidden_), out, gh);
  for (std::size_t j = 0; j < hidden_; ++j) gh[j] *= 1.0 - h[j] * h[j];
  kernels::omp::affine_transpose(view(w1_, hidden_, latent.size()), gh, grad);
}

ProceduralToyGenerator::ProceduralToyGenerator(std::string id, const ToySpec& spec)
    : Generator(std::move(id), spec.dims.latent_dim, {}, spec.dims.side) {
  const std::size_t d = spec.dims.latent_dim, side = spec.dims.side;
  const std::size_t p = pixel_values(spec);
  // Integer frequencies keep every component periodic on the grid.
  std::mt19937_64 rng(derive_seed({spec.seed, 21}));
  std::uniform_int_distribution<int> freq(0, 4);
  const auto phases = draw_params(spec, 22, d, std::numbers::pi);
  const auto colors = draw_params(spec, 23, d * kChannels, 1.0);
  const double gain = 1.5 / std::sqrt(static_cast<double>(d));
  basis_.assign(p * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    int fy = freq(rng), fx = freq(rng);
    if (fy == 0 && fx == 0) fx = 1;
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        const double arg = 2.0 * std::numbers::pi * (fy * static_cast<double>(y) + fx * static_cast<double>(x)) /
                               static_cast<double>(side) + phases[k];
        const double wave = std::sin(arg);
        for (std::size_t c = 0; c < kChannels; ++c)
          basis_[((y * side + x) * kChannels + c) * d + k] = gain * colors[k * kChannels + c] * wave;
      }
  }
}

void ProceduralToyGenerator::forward(std::span<const double> latent, std::span<double> out) const {
  kernels::omp::affine(view(basis_, out.size(), latent.size()), latent, {}, out);
  // Nine-level threshold of tanh.
  for (double& v : out) v = std::round(4.0 * std::tanh(v)) / 4.0;
}

ConditionedToyGenerator::ConditionedToyGenerator(std::string id, const ToySpec& spec)
    : Generator(std::move(id), spec.dims.latent_dim, spec.dims.class_groups, spec.dims.side) {
  const std::size_t d = spec.dims.latent_dim, side = spec.dims.side, p = pixel_values(spec);
  w_ = draw_params(spec, 31, p * d, 1.0 / std::sqrt(static_cast<double>(d)));
  const std::size_t classes = class_dim();
  const auto colors = draw_params(spec, 32, classes * kChannels, 1.0);
  const auto phases = draw_params(spec, 33, classes, std::numbers::pi);
  prototypes_.assign(classes * p, 0.0);
  for (std::size_t q = 0; q < classes; ++q) {
    // Class q renders stripes of frequency q / 2 + 1, alternating orientation.
    const double f = static_cast<double>(q / 2 + 1);
    const bool vertical = q % 2 == 1;
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        const double t = static_cast<double>(vertical ? x : y) / static_cast<double>(side);
        const double wave = std::sin(2.0 * std::numbers::pi * f * t + phases[q]);
        for (std::size_t c = 0; c < kChannels; ++c)
          prototypes_[q * p + (y * side + x) * kChannels + c] = 1.2 * colors[q * kChannels + c] * (0.5 + 0.5 * wave);
      }
  }
}

void ConditionedToyGenerator::forward(std::span<const double> latent, std::span<double> out) const {
  const std::size_t d = continuous_dim(), p = out.size();
  kernels::omp::affine(view(w_, p, d), latent.first(d), {}, out);
  const auto cls = latent.subspan(d);
  for (std::size_t q = 0; q < cls.size(); ++q) {
    if (cls[q] == 0.0) continue;
    const double* proto = prototypes_.data() + q * p;
    for (std::size_t i = 0; i < p; ++i) out[i] += cls[q] * proto[i];
  }
  for (double& v : out) v = std::tanh(v);
}

void ConditionedToyGenerator::backward(std::span<const double> latent, std::span<const double> cot,
                                       std::span<double> grad) const {
  const std::size_t d = continuous_dim(), p = cot.size();
  std::vector<double> delta(p);
  forward(latent, delta);
  for (std::size_t i = 0; i < p; ++i) delta[i] = cot[i] * (1.0 - delta[i] * delta[i]);
  kernels::omp::affine_transpose(view(w_, p, d), delta, grad.first(d));
  for (std::size_t q = 0; q < class_dim(); ++q) {
    const double* proto = prototypes_.data() + q * p;
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) acc += proto[i] * delta[i];
    grad[d + q] = acc;
  }
}

std::shared_ptr<const Generator> make_toy(const ToySpec& spec, std::string id) {
  validate_dims(spec);
  if (id.empty()) {
    id = to_string(spec.kind) + "-s" + std::to_string(spec.seed) + "-d" + std::to_string(spec.dims.latent_dim) +
         "-" + std::to_string(spec.dims.side);
    if (spec.mix > 0.0) id += "-mix" + std::to_string(spec.mix_seed);
  }
  switch (spec.kind) {
    case ToyKind::linear: return std::make_shared<LinearToyGenerator>(std::move(id), spec);
    case ToyKind::mlp: return std::make_shared<MlpToyGenerator>(std::move(id), spec);
    case ToyKind::procedural: return std::make_shared<ProceduralToyGenerator>(std::move(id), spec);
    case ToyKind::conditioned: return std::make_shared<ConditionedToyGenerator>(std::move(id), spec);
  }
  throw ValidationError("unknown generator kind");
}

std::shared_ptr<const Generator> make_toy(ToyKind kind, std::uint64_t seed, const ToyDims& dims) {
  ToySpec spec;
  spec.kind = kind;
  spec.seed = seed;
  spec.dims = dims;
  return make_toy(spec);
}

ImageBuffer conditioned_prototype(const ToySpec& spec, std::size_t group, std::size_t value) {
  if (spec.kind != ToyKind::conditioned) throw ValidationError("conditioned_prototype: not a conditioned spec");
  auto gen = make_toy(spec);
  const auto& groups = gen->class_groups();
  if (group >= groups.size() || value >= groups[group]) throw ValidationError("conditioned_prototype: bad class");
  std::vector<double> latent(gen->latent_dim(), 0.0);
  std::size_t offset = gen->continuous_dim();
  for (std::size_t g = 0; g < group; ++g) offset += groups[g];
  latent[offset + value] = 1.0;
  return gen->generate(latent);
}

}  // namespace inspire
