#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "inspire/criteria.hpp"
#include "inspire/generators.hpp"
#include "inspire/optimizers.hpp"

namespace inspire {

// Interactive (mu/mu + lambda) evolution: a person (or a stand-in oracle)
// picks favourites among 1 + lambda candidates at every iteration.

enum class Recombination { average, clone };
std::string to_string(Recombination r);
Recombination parse_recombination(const std::string& name);

struct HevolConfig {
  EsConfig es{5, 27, std::nullopt};
  Recombination recombination = Recombination::average;
  std::string preset = "custom";
  void validate() const;
};

// faces: mu = 5, lambda = 27, average. fashion: mu = 1, lambda = 15, clone.
HevolConfig hevol_preset(const std::string& name);

struct BallotPick {
  std::size_t index = 0;
  std::size_t count = 1;
  bool operator==(const BallotPick&) const = default;
};

// picks[0] is the person's top choice.
struct SelectionBallot {
  std::vector<BallotPick> picks;
  bool operator==(const SelectionBallot&) const = default;
};

struct BatchEntry {
  LatentPoint latent;
  std::string image_id;
};

struct HistoryEntry {
  std::vector<BatchEntry> batch;
  SelectionBallot ballot;
};

struct SessionBest {
  LatentPoint latent;
  std::string image_id;
  ImageBuffer image;
  std::int64_t images_shown = 0;     // iterations * (1 + lambda)
  std::int64_t distinct_images = 0;  // 1 + iterations * lambda
};

// Content address of a rendered latent: hash of generator id and latent bytes.
std::string image_id_for(const std::string& generator_id, std::span<const double> latent);

class HevolSession {
 public:
  // Parents start at the zero vector; the first batch is proposed at once.
  HevolSession(std::string id, std::shared_ptr<const Generator> gen, HevolConfig config, std::uint64_t seed);

  const std::string& id() const { return id_; }
  const Generator& generator() const { return *gen_; }
  std::shared_ptr<const Generator> generator_ptr() const { return gen_; }
  const HevolConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  double mutation_rate() const { return rate_; }

  // Ballots recorded so far.
  std::int64_t iteration() const { return static_cast<std::int64_t>(history_.size()); }
  std::int64_t images_shown() const;
  std::int64_t distinct_images() const;

  const std::vector<BatchEntry>& current_batch() const { return batch_; }
  const std::vector<ImageBuffer>& current_images() const { return images_; }
  const std::vector<LatentPoint>& parents() const { return parents_; }
  const std::vector<HistoryEntry>& history() const { return history_; }
  std::vector<SelectionBallot> ballots() const;

  // Throws ValidationError for empty ballots, out-of-range indices, zero
  // counts or more than mu picks in total.
  void validate(const SelectionBallot& ballot) const;
  void record_selection(const SelectionBallot& ballot);

  // Throws ValidationError before the first ballot.
  SessionBest best() const;
  const LatentPoint& elite() const { return batch_.front().latent; }

  // Fresh session replaying the first `iterations` ballots.
  HevolSession replay(std::int64_t iterations) const;

 private:
  void propose_batch();

  std::string id_;
  std::shared_ptr<const Generator> gen_;
  HevolConfig config_;
  std::uint64_t seed_;
  double rate_;
  LatentPoint best_;
  std::vector<LatentPoint> parents_;
  std::vector<BatchEntry> batch_;
  std::vector<ImageBuffer> images_;
  std::vector<HistoryEntry> history_;
};

// Stand-in for the person: picks the mu lowest-criterion members of the
// batch, count 1 each, best first. Ties keep batch order.
SelectionBallot auto_oracle_select(const std::vector<BatchEntry>& batch, const std::vector<ImageBuffer>& images,
                                   const RetrievalCriterion& criterion, std::size_t mu);

}  // namespace inspire
