#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/itm.hpp"

namespace itm {

/// Baseline collapsed-Gibbs LDA: resources are documents, tags are words and
/// users are ignored. Priors are total masses divided by the dimension, as in ITM.
struct LdaConfig {
  std::size_t n_topics = 10;
  double alpha = 1.0;
  double eta = 1.0;
  int n_iterations = 1000;
  int averaging_window = 100;
  std::uint64_t seed = 0;
  int convergence_window = 10;
  double convergence_threshold = 0.02;
  HyperparameterSchedule hyper{};
  bool estimate_theta = true;

  void validate() const;
};

class LdaState {
 public:
  LdaState(const Corpus& corpus, const LdaConfig& config);
  LdaState(const Corpus& corpus, const LdaConfig& config, std::vector<std::uint32_t> topics);

  const Corpus& corpus() const noexcept { return *corpus_; }
  std::size_t n_topics() const noexcept { return n_topics_; }
  std::size_t n_tuples() const noexcept { return topics_.size(); }
  std::span<const std::uint32_t> topics() const noexcept { return topics_; }

  std::int32_t resource_topic(Id r, std::size_t z) const { return resource_topic_[r * n_topics_ + z]; }
  std::int32_t tag_count(std::size_t z, Id t) const { return tag_counts_[t * n_topics_ + z]; }
  std::int32_t topic_total(std::size_t z) const { return topic_total_[z]; }
  std::int32_t resource_total(Id r) const { return resource_total_[r]; }

  /// Raw tables: resource x topic, tag x topic, topic totals.
  std::span<const std::int32_t> resource_topic_counts() const noexcept { return resource_topic_; }
  std::span<const std::int32_t> tag_counts() const noexcept { return tag_counts_; }
  std::span<const std::int32_t> topic_totals() const noexcept { return topic_total_; }
  std::span<const std::int32_t> resource_totals() const noexcept { return resource_total_; }

  double alpha() const noexcept { return alpha_; }
  double eta() const noexcept { return eta_; }
  void set_hyperparameters(double alpha, double eta);

  Rng& rng() noexcept { return rng_; }

 private:
  friend void lda_sweep(LdaState& state);

  void add(std::size_t i, int delta);
  void refresh_inverse(std::size_t z) { inverse_denominator_[z] = 1.0 / (topic_total_[z] + eta_); }

  const Corpus* corpus_;
  std::size_t n_topics_;
  std::size_t n_tags_;
  double alpha_;
  double eta_;
  std::vector<std::uint32_t> topics_;
  std::vector<std::int32_t> resource_topic_;
  std::vector<std::int32_t> tag_counts_;
  std::vector<std::int32_t> topic_total_;
  std::vector<double> inverse_denominator_;
  std::vector<std::int32_t> resource_total_;
  std::vector<double> scratch_;
  Rng rng_;
};

/// p(z_i = k | z_-i, t), normalised; tuple i is excluded from the counts.
std::vector<double> lda_conditional(const LdaState& state, std::size_t i);

void lda_sweep(LdaState& state);

/// Sum over tuples of log[(N_{z,t} + eta/N_T) / (N_z + eta)].
double lda_log_likelihood(const LdaState& state);

/// phi (resource x topic) and theta (1 x topic x tag); psi is left empty.
Posterior lda_estimate_parameters(const LdaState& state, bool with_theta = true);

/// Updates alpha then eta exactly as resample_hyperparameters does for ITM.
Hyperparameters lda_resample_hyperparameters(LdaState& state, const HyperparameterSchedule& schedule);

struct LdaResult {
  Posterior posterior;
  TrainDiagnostics diagnostics;  ///< beta is reported as NaN
  std::vector<std::uint32_t> topics;
};

using LdaObserver = std::function<void(int iteration, const LdaState& state)>;

LdaResult train_lda(const Corpus& corpus, const LdaConfig& config, const LdaObserver& observer = {});

}  // namespace itm
