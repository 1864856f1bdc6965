#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "itm/concentration.hpp"
#include "itm/corpus.hpp"
#include "itm/matrix.hpp"
#include "itm/random.hpp"

namespace itm {

/// When and how the Dirichlet masses are re-estimated during training.
struct HyperparameterSchedule {
  bool resample = true;
  int warmup = 10;  ///< sweeps completed before the first resampling
  GammaPrior prior{};
  int aux_iterations = 20;
};

struct ItmConfig {
  std::size_t n_topics = 10;
  std::size_t n_interests = 3;
  double alpha = 1.0;  ///< total mass of the resource-topic prior
  double beta = 1.0;   ///< total mass of the user-interest prior
  double eta = 1.0;    ///< total mass of the interest-topic-tag prior
  int n_iterations = 1000;
  int averaging_window = 100;
  std::uint64_t seed = 0;
  int convergence_window = 10;
  double convergence_threshold = 0.02;
  HyperparameterSchedule hyper{};
  bool estimate_theta = true;

  void validate() const;
};

struct Hyperparameters {
  double alpha = 1.0;
  double beta = 1.0;
  double eta = 1.0;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// Averaged parameter estimates. phi is resource x topic, psi user x interest,
/// theta interest x topic x tag. LDA leaves psi empty and uses a single
/// interest slice for theta.
struct Posterior {
  Matrix phi;
  Matrix psi;
  Tensor3 theta;
  int n_samples_averaged = 0;

  friend bool operator==(const Posterior&, const Posterior&) = default;
};

struct TrainDiagnostics {
  std::vector<double> log_likelihood;
  std::vector<Hyperparameters> hyperparameters;
  std::optional<std::size_t> converged_at;  ///< 0-based iteration index
};

/// Latent labels and sufficient statistics of one ITM chain. The corpus must
/// outlive the state.
class ItmState {
 public:
  /// Random initialisation from the config's "init" seed stream.
  ItmState(const Corpus& corpus, const ItmConfig& config);
  /// Explicit labels, used by oracles and tests.
  ItmState(const Corpus& corpus, const ItmConfig& config, std::vector<std::uint32_t> topics,
           std::vector<std::uint32_t> interests);

  const Corpus& corpus() const noexcept { return *corpus_; }
  std::size_t n_topics() const noexcept { return n_topics_; }
  std::size_t n_interests() const noexcept { return n_interests_; }
  std::size_t n_tuples() const noexcept { return topics_.size(); }

  std::span<const std::uint32_t> topics() const noexcept { return topics_; }
  std::span<const std::uint32_t> interests() const noexcept { return interests_; }

  std::int32_t resource_topic(Id r, std::size_t z) const { return resource_topic_[r * n_topics_ + z]; }
  std::int32_t user_interest(Id u, std::size_t x) const { return user_interest_[u * n_interests_ + x]; }
  std::int32_t tag_count(std::size_t x, std::size_t z, Id t) const {
    return tag_counts_[(t * n_interests_ + x) * n_topics_ + z];
  }
  std::int32_t interest_topic(std::size_t x, std::size_t z) const { return interest_topic_[x * n_topics_ + z]; }
  std::int32_t resource_total(Id r) const { return resource_total_[r]; }
  std::int32_t user_total(Id u) const { return user_total_[u]; }

  /// Raw tables: resource x topic, user x interest, tag x interest x topic,
  /// interest x topic.
  std::span<const std::int32_t> resource_topic_counts() const noexcept { return resource_topic_; }
  std::span<const std::int32_t> user_interest_counts() const noexcept { return user_interest_; }
  std::span<const std::int32_t> tag_counts() const noexcept { return tag_counts_; }
  std::span<const std::int32_t> interest_topic_counts() const noexcept { return interest_topic_; }

  const Hyperparameters& hyperparameters() const noexcept { return hyper_; }
  void set_hyperparameters(const Hyperparameters& h);

  /// Moves tuple i to (topic, interest), keeping every table consistent.
  void assign(std::size_t i, std::uint32_t topic, std::uint32_t interest);

  Rng& rng() noexcept { return rng_; }

 private:
  friend void gibbs_sweep(ItmState& state);

  void add(std::size_t i, int delta);
  void refresh_inverse(std::size_t x, std::size_t z);

  const Corpus* corpus_;
  std::size_t n_topics_;
  std::size_t n_interests_;
  std::size_t n_tags_;
  Hyperparameters hyper_;
  std::vector<std::uint32_t> topics_;
  std::vector<std::uint32_t> interests_;
  std::vector<std::int32_t> resource_topic_;
  std::vector<std::int32_t> user_interest_;
  std::vector<std::int32_t> tag_counts_;
  std::vector<std::int32_t> interest_topic_;
  std::vector<double> inverse_denominator_;  ///< 1 / (N_{x,z} + eta)
  std::vector<std::int32_t> resource_total_;
  std::vector<std::int32_t> user_total_;
  std::vector<double> scratch_;
  Rng rng_;
};

/// p(z_i = k | z_-i, x, t), normalised; tuple i is excluded from the counts.
std::vector<double> conditional_topic_distribution(const ItmState& state, std::size_t i);

/// p(x_i = j | x_-i, z, t), normalised; tuple i is excluded from the counts.
std::vector<double> conditional_interest_distribution(const ItmState& state, std::size_t i);

/// One systematic-scan pass over the tuples in corpus order, sampling z then x
/// for each. With a single interest the interest step draws nothing.
void gibbs_sweep(ItmState& state);

/// Sum over tuples of log[(N_{x,z,t} + eta/N_T) / (N_{x,z} + eta)], counts
/// including the tuple itself.
double log_likelihood(const ItmState& state);

/// Plug-in estimates of phi, psi and (optionally) theta from the current counts.
Posterior estimate_parameters(const ItmState& state, bool with_theta = true);

/// One Escobar-West auxiliary update of alpha, beta and eta; the state's
/// hyperparameters are replaced by the result. beta is left untouched when
/// there is a single interest.
Hyperparameters resample_hyperparameters(ItmState& state, const HyperparameterSchedule& schedule);

struct ItmResult {
  Posterior posterior;
  TrainDiagnostics diagnostics;
  std::vector<std::uint32_t> topics;
  std::vector<std::uint32_t> interests;
};

using ItmObserver = std::function<void(int iteration, const ItmState& state)>;

/// Random init, n_iterations sweeps, and averaging of per-iteration estimates
/// over the final averaging_window iterations. The observer, if set, runs
/// after every sweep.
ItmResult train_itm(const Corpus& corpus, const ItmConfig& config, const ItmObserver& observer = {});

}  // namespace itm
