#include "inspire/errors.hpp"
#include "inspire/generators.hpp"

namespace inspire {

void GeneratorRegistry::add(std::shared_ptr<const Generator> gen, std::optional<ToySpec> spec) {
  if (!gen) throw ValidationError("registry: null generator");
  const std::string id = gen->id();
  entries_[id] = Entry{std::move(gen), std::move(spec)};
}

std::shared_ptr<const Generator> GeneratorRegistry::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second.gen;
}

std::shared_ptr<const Generator> GeneratorRegistry::get(const std::string& id) const {
  auto gen = find(id);
  if (!gen) throw NotFoundError("unknown generator '" + id + "'");
  return gen;
}

std::optional<ToySpec> GeneratorRegistry::spec_of(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? std::nullopt : it->second.spec;
}

std::vector<std::string> GeneratorRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, entry] : entries_) out.push_back(id);
  return out;
}

GeneratorRegistry default_registry() {
  GeneratorRegistry reg;
  auto add = [&](const std::string& id, ToyKind kind, std::uint64_t seed, ToyDims dims) {
    ToySpec spec;
    spec.kind = kind;
    spec.seed = seed;
    spec.dims = std::move(dims);
    reg.add(make_toy(spec, id), spec);
  };
  add("linear", ToyKind::linear, 1, {.latent_dim = 32, .side = 32, .hidden = 0, .class_groups = {}});
  add("mlp", ToyKind::mlp, 2, {.latent_dim = 64, .side = 32, .hidden = 128, .class_groups = {}});
  add("mlp-d16", ToyKind::mlp, 3, {.latent_dim = 16, .side = 32, .hidden = 64, .class_groups = {}});
  add("procedural", ToyKind::procedural, 4, {.latent_dim = 64, .side = 32, .hidden = 0, .class_groups = {}});
  add("conditioned", ToyKind::conditioned, 5, {.latent_dim = 32, .side = 32, .hidden = 0, .class_groups = {4}});
  return reg;
}

}  // namespace inspire
