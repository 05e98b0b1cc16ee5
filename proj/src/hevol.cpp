#include "inspire/hevol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inspire/errors.hpp"
#include "inspire/hashing.hpp"

namespace inspire {

std::string to_string(Recombination r) { return r == Recombination::average ? "average" : "clone"; }

Recombination parse_recombination(const std::string& name) {
  if (name == "average") return Recombination::average;
  if (name == "clone") return Recombination::clone;
  throw ValidationError("unknown recombination '" + name + "'");
}

void HevolConfig::validate() const { es.validate(); }

HevolConfig hevol_preset(const std::string& name) {
  if (name == "faces") return {EsConfig{5, 27, std::nullopt}, Recombination::average, "faces"};
  if (name == "fashion") return {EsConfig{1, 15, std::nullopt}, Recombination::clone, "fashion"};
  if (name == "custom") return {};
  throw ValidationError("unknown session preset '" + name + "'");
}

std::string image_id_for(const std::string& generator_id, std::span<const double> latent) {
  std::vector<std::byte> bytes;
  const auto id_bytes = std::as_bytes(std::span(generator_id.data(), generator_id.size()));
  bytes.insert(bytes.end(), id_bytes.begin(), id_bytes.end());
  bytes.push_back(std::byte{0});
  const auto latent_bytes = std::as_bytes(latent);
  bytes.insert(bytes.end(), latent_bytes.begin(), latent_bytes.end());
  return hex_digest(bytes, 24);
}

HevolSession::HevolSession(std::string id, std::shared_ptr<const Generator> gen, HevolConfig config,
                           std::uint64_t seed)
    : id_(std::move(id)), gen_(std::move(gen)), config_(std::move(config)), seed_(seed) {
  if (!gen_) throw ValidationError("session needs a generator");
  config_.validate();
  rate_ = config_.es.mutation_rate.value_or(1.0 / static_cast<double>(gen_->latent_dim()));
  best_ = LatentPoint::from_flat(Vector(gen_->latent_dim(), 0.0), gen_->continuous_dim());
  parents_.assign(config_.es.mu, best_);
  propose_batch();
}

std::int64_t HevolSession::images_shown() const {
  return iteration() * static_cast<std::int64_t>(1 + config_.es.lambda);
}

std::int64_t HevolSession::distinct_images() const {
  return 1 + iteration() * static_cast<std::int64_t>(config_.es.lambda);
}

std::vector<SelectionBallot> HevolSession::ballots() const {
  std::vector<SelectionBallot> out;
  for (const auto& h : history_) out.push_back(h.ballot);
  return out;
}

void HevolSession::propose_batch() {
  Rng rng = generation_rng(seed_, static_cast<std::uint64_t>(iteration()) + 1);
  batch_.clear();
  images_.clear();
  auto push = [&](LatentPoint p) {
    const auto flat = p.flat();
    images_.push_back(gen_->generate(flat));
    batch_.push_back({std::move(p), image_id_for(gen_->id(), flat)});
  };
  push(best_);
  for (std::size_t i = 0; i < config_.es.lambda; ++i) {
    const auto& parent = parents_[i % parents_.size()];
    const auto child = mutate_coordinates(parent.flat(), rate_, rng);
    push(LatentPoint::from_flat(child, gen_->continuous_dim()));
  }
}

void HevolSession::validate(const SelectionBallot& ballot) const {
  if (ballot.picks.empty()) throw ValidationError("ballot has no picks");
  std::size_t total = 0;
  for (const auto& pick : ballot.picks) {
    if (pick.index >= batch_.size())
      throw ValidationError("pick index " + std::to_string(pick.index) + " outside batch of " +
                            std::to_string(batch_.size()));
    if (pick.count < 1) throw ValidationError("pick counts must be at least 1");
    total += pick.count;
  }
  if (total > config_.es.mu)
    throw ValidationError("ballot picks " + std::to_string(total) + " images, at most mu = " +
                          std::to_string(config_.es.mu) + " allowed");
}

void HevolSession::record_selection(const SelectionBallot& ballot) {
  validate(ballot);
  best_ = batch_[ballot.picks.front().index].latent;

  std::vector<LatentPoint> next;
  if (config_.recombination == Recombination::clone) {
    for (const auto& pick : ballot.picks)
      for (std::size_t c = 0; c < pick.count; ++c) next.push_back(batch_[pick.index].latent);
  } else {
    const std::size_t n = gen_->latent_dim(), d = gen_->continuous_dim();
    Vector mean(n, 0.0);
    double weight = 0.0;
    for (const auto& pick : ballot.picks) {
      const auto flat = batch_[pick.index].latent.flat();
      for (std::size_t i = 0; i < n; ++i) mean[i] += static_cast<double>(pick.count) * flat[i];
      weight += static_cast<double>(pick.count);
    }
    for (double& v : mean) v /= weight;
    // Back onto the shell (1/d) ||z||^2 = 1; averaging shrinks norms.
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) sq += mean[i] * mean[i];
    if (sq > 0.0) {
      const double scale = std::sqrt(static_cast<double>(d) / sq);
      for (std::size_t i = 0; i < d; ++i) mean[i] *= scale;
    }
    next.assign(config_.es.mu, LatentPoint::from_flat(mean, d));
  }
  parents_ = std::move(next);
  history_.push_back({batch_, ballot});
  propose_batch();
}

SessionBest HevolSession::best() const {
  if (history_.empty()) throw ValidationError("session has no completed iteration yet");
  return {batch_.front().latent, batch_.front().image_id, images_.front(), images_shown(), distinct_images()};
}

HevolSession HevolSession::replay(std::int64_t iterations) const {
  if (iterations < 0 || iterations > iteration()) throw ValidationError("replay target outside session history");
  HevolSession fresh(id_, gen_, config_, seed_);
  for (std::int64_t i = 0; i < iterations; ++i) fresh.record_selection(history_[static_cast<std::size_t>(i)].ballot);
  return fresh;
}

SelectionBallot auto_oracle_select(const std::vector<BatchEntry>& batch, const std::vector<ImageBuffer>& images,
                                   const RetrievalCriterion& criterion, std::size_t mu) {
  if (batch.size() != images.size()) throw DimensionError("auto_oracle_select: batch and images differ in size");
  std::vector<double> scores(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    scores[i] = criterion.breakdown_of(images[i], batch[i].latent.flat()).total;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  SelectionBallot ballot;
  for (std::size_t k = 0; k < std::min(mu, order.size()); ++k) ballot.picks.push_back({order[k], 1});
  return ballot;
}

}  // namespace inspire
