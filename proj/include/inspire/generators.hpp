#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inspire/tensor.hpp"

namespace inspire {

// A generator input: continuous block z, optional class block (one group of
// k_c entries per class), and a mask over all coordinates (z then class)
// marking those an optimizer must leave untouched.
struct LatentPoint {
  std::vector<double> z;
  std::vector<double> class_block;
  std::vector<bool> frozen_mask;  // empty means nothing frozen

  std::size_t size() const { return z.size() + class_block.size(); }
  std::vector<double> flat() const;
  static LatentPoint from_flat(std::span<const double> flat, std::size_t continuous_dim,
                               std::vector<bool> frozen_mask = {});
  bool operator==(const LatentPoint&) const = default;
};

// Descriptive summary of a generator, used by the registry listing.
struct GeneratorHandle {
  std::string id;
  std::size_t latent_dim = 0;  // d + sum(class_groups)
  std::size_t output_side = 0;
  bool differentiable = false;
  std::vector<std::size_t> class_groups;
};

class Generator {
 public:
  virtual ~Generator() = default;

  const std::string& id() const { return id_; }
  std::size_t continuous_dim() const { return continuous_dim_; }
  const std::vector<std::size_t>& class_groups() const { return class_groups_; }
  std::size_t class_dim() const;
  std::size_t latent_dim() const { return continuous_dim_ + class_dim(); }
  std::size_t output_side() const { return side_; }
  std::size_t channels() const { return 3; }
  virtual bool differentiable() const = 0;
  GeneratorHandle handle() const;

  // Deterministic image in [-1, 1]. Throws DimensionError on size mismatch.
  ImageBuffer generate(std::span<const double> latent) const;
  ImageBuffer generate(const LatentPoint& p) const;

  // J^T * cotangent, where J is the Jacobian of generate at `latent`.
  // Throws CapabilityError for non-differentiable generators.
  std::vector<double> vjp(std::span<const double> latent, std::span<const double> cotangent) const;

 protected:
  Generator(std::string id, std::size_t continuous_dim, std::vector<std::size_t> class_groups,
            std::size_t side);

  virtual void forward(std::span<const double> latent, std::span<double> out) const = 0;
  virtual void backward(std::span<const double> latent, std::span<const double> cotangent,
                        std::span<double> grad) const;

 private:
  void check_latent(std::size_t n) const;

  std::string id_;
  std::size_t continuous_dim_;
  std::vector<std::size_t> class_groups_;
  std::size_t side_;
};

class Discriminator {
 public:
  virtual ~Discriminator() = default;
  virtual std::string id() const = 0;
  virtual bool differentiable() const = 0;
  virtual double score(const ImageBuffer& img) const = 0;
  // Gradient of score w.r.t. the image.
  virtual ImageBuffer score_gradient(const ImageBuffer& img) const = 0;
};

// D(x) = -mean over all values of the squared circular Laplacian of x.
// Constant images score the maximum, 0.
class SmoothnessDiscriminator final : public Discriminator {
 public:
  std::string id() const override { return "smoothness"; }
  bool differentiable() const override { return true; }
  double score(const ImageBuffer& img) const override;
  ImageBuffer score_gradient(const ImageBuffer& img) const override;
};

// ---------------------------------------------------------------------------
// Toy generators

enum class ToyKind { linear, mlp, procedural, conditioned };

std::string to_string(ToyKind kind);
ToyKind parse_toy_kind(const std::string& name);

struct ToyDims {
  std::size_t latent_dim = 64;
  std::size_t side = 32;
  std::size_t hidden = 128;  // mlp only
  std::vector<std::size_t> class_groups;  // conditioned only
  bool operator==(const ToyDims&) const = default;
};

struct ToySpec {
  ToyKind kind = ToyKind::mlp;
  std::uint64_t seed = 0;
  ToyDims dims;
  // Parameters are blended as sqrt(1 - mix) * own + sqrt(mix) * draw(mix_seed).
  // Used to build in-family siblings of a generator.
  double mix = 0.0;
  std::uint64_t mix_seed = 0;
  bool operator==(const ToySpec&) const = default;
};

// Builds a deterministic toy. Throws ValidationError on bad dims
// (latent_dim in [1, 512], side in {16, 32, 64}).
std::shared_ptr<const Generator> make_toy(const ToySpec& spec, std::string id = {});
std::shared_ptr<const Generator> make_toy(ToyKind kind, std::uint64_t seed, const ToyDims& dims);

// Image a conditioned toy produces for z = 0 and class value j of group g.
ImageBuffer conditioned_prototype(const ToySpec& spec, std::size_t group, std::size_t value);

// Concrete toy classes, exposed so tests can build independent oracles
// from their parameters.
class LinearToyGenerator final : public Generator {
 public:
  LinearToyGenerator(std::string id, const ToySpec& spec);
  bool differentiable() const override { return true; }
  const std::vector<double>& weights() const { return w_; }  // P x d, row-major
  const std::vector<double>& bias() const { return b_; }

 protected:
  void forward(std::span<const double> latent, std::span<double> out) const override;
  void backward(std::span<const double> latent, std::span<const double> cotangent,
                std::span<double> grad) const override;

 private:
  std::vector<double> w_, b_;
};

class MlpToyGenerator final : public Generator {
 public:
  MlpToyGenerator(std::string id, const ToySpec& spec);
  bool differentiable() const override { return true; }
  std::size_t hidden() const { return hidden_; }
  const std::vector<double>& w1() const { return w1_; }  // hidden x d
  const std::vector<double>& b1() const { return b1_; }
  const std::vector<double>& w2() const { return w2_; }  // P x hidden
  const std::vector<double>& b2() const { return b2_; }

 protected:
  void forward(std::span<const double> latent, std::span<double> out) const override;
  void backward(std::span<const double> latent, std::span<const double> cotangent,
                std::span<double> grad) const override;

 private:
  std::size_t hidden_;
  std::vector<double> w1_, b1_, w2_, b2_;
};

// Thresholded sinusoid mixtures; piecewise constant in z, hence flagged
// non-differentiable.
class ProceduralToyGenerator final : public Generator {
 public:
  ProceduralToyGenerator(std::string id, const ToySpec& spec);
  bool differentiable() const override { return false; }

 protected:
  void forward(std::span<const double> latent, std::span<double> out) const override;

 private:
  std::vector<double> basis_;  // d x P pre-activation patterns
};

// tanh(W z + sum_j c_j * prototype_j): one pre-activation pattern per class value.
class ConditionedToyGenerator final : public Generator {
 public:
  ConditionedToyGenerator(std::string id, const ToySpec& spec);
  bool differentiable() const override { return true; }

 protected:
  void forward(std::span<const double> latent, std::span<double> out) const override;
  void backward(std::span<const double> latent, std::span<const double> cotangent,
                std::span<double> grad) const override;

 private:
  std::vector<double> w_;           // P x d
  std::vector<double> prototypes_;  // class_dim x P
};

// ---------------------------------------------------------------------------
// Registry

class GeneratorRegistry {
 public:
  void add(std::shared_ptr<const Generator> gen, std::optional<ToySpec> spec = std::nullopt);
  std::shared_ptr<const Generator> find(const std::string& id) const;  // nullptr if absent
  std::shared_ptr<const Generator> get(const std::string& id) const;   // throws NotFoundError
  std::optional<ToySpec> spec_of(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  struct Entry {
    std::shared_ptr<const Generator> gen;
    std::optional<ToySpec> spec;
  };
  std::map<std::string, Entry> entries_;
};

// linear (d=32), mlp (d=64), mlp-d16, procedural (d=64), conditioned
// (d=32 + one 4-way class group); all 32x32x3.
GeneratorRegistry default_registry();

}  // namespace inspire
