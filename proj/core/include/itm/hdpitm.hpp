#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "itm/concentration.hpp"
#include "itm/corpus.hpp"
#include "itm/itm.hpp"
#include "itm/random.hpp"

namespace itm {

enum class HdpMode {
  kHdpItm,  ///< nonparametric topics and interests
  kHdpLda,  ///< nonparametric topics, a single inert interest
};

/// How a freshly instantiated component's share of the unused mass is drawn.
enum class StickRule {
  kRemainder,  ///< a ~ Beta(1, alpha_u): the rule used by the model description
  kStandard,   ///< a ~ Beta(1, gamma): the usual HDP stick-breaking step
};

/// Global component weights and concentrations. Weight vectors include the
/// collapsed mass of all unused components as `*_remainder`; each vector plus
/// its remainder sums to one.
struct HdpGlobals {
  std::vector<double> topic_weights;
  double topic_remainder = 1.0;
  std::vector<double> interest_weights;
  double interest_remainder = 1.0;
  double gamma_topic = 1.0;
  double gamma_interest = 1.0;
  double mu_topic = 1.0;
  double mu_interest = 1.0;

  std::size_t n_topics() const noexcept { return topic_weights.size(); }
  std::size_t n_interests() const noexcept { return interest_weights.size(); }
  double topic_mass() const;
  double interest_mass() const;

  /// Uniform weights over `n_topics` / `n_interests` components, leaving
  /// `remainder` for the unused ones.
  static HdpGlobals uniform(std::size_t n_topics, std::size_t n_interests, double remainder);
};

struct GrowthPolicy {
  std::size_t initial_topics = 100;
  std::size_t initial_interests = 20;
  std::size_t max_topics = 400;
  std::size_t max_interests = 80;
  int grow_iterations = 100;
  int min_iterations = 400;
  int max_iterations = 600;
  int ll_window = 10;
  double ll_threshold = 0.02;
  int averaging_window = 100;

  void validate() const;
};

struct HdpConfig {
  HdpMode mode = HdpMode::kHdpItm;
  GrowthPolicy policy{};
  double eta = 1.0;
  double initial_remainder = 0.5;
  double gamma_topic = 1.0;
  double gamma_interest = 1.0;
  double mu_topic = 1.0;
  double mu_interest = 1.0;
  GammaPrior concentration_prior{};
  int aux_iterations = 20;
  StickRule stick_rule = StickRule::kRemainder;
  bool resample_globals = true;
  bool resample_eta = true;  ///< Escobar-West update of eta after each global resampling
  bool estimate_theta = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Labels and count tables with a variable number of topic and interest
/// components. Every component carries a stable id that survives compaction.
class HdpState {
 public:
  /// Uniform random labels over the given numbers of components.
  HdpState(const Corpus& corpus, double eta, std::size_t n_topics, std::size_t n_interests, Rng& init_rng);
  /// Explicit labels.
  HdpState(const Corpus& corpus, double eta, std::size_t n_topics, std::size_t n_interests,
           std::vector<std::uint32_t> topics, std::vector<std::uint32_t> interests);

  const Corpus& corpus() const noexcept { return *corpus_; }
  double eta() const noexcept { return eta_; }
  void set_eta(double eta);
  std::size_t n_topics() const noexcept { return topic_columns_.size(); }
  std::size_t n_interests() const noexcept { return interest_columns_.size(); }
  std::size_t n_tuples() const noexcept { return topics_.size(); }
  std::span<const std::uint32_t> topics() const noexcept { return topics_; }
  std::span<const std::uint32_t> interests() const noexcept { return interests_; }

  std::int32_t resource_topic(Id r, std::size_t k) const { return topic_columns_[k].by_resource[r]; }
  std::int32_t user_interest(Id u, std::size_t j) const { return interest_columns_[j].by_user[u]; }
  std::int32_t tag_count(std::size_t j, std::size_t k, Id t) const {
    return topic_columns_[k].by_interest_tag[j * n_tags_ + t];
  }
  std::int32_t interest_topic(std::size_t j, std::size_t k) const { return topic_columns_[k].by_interest[j]; }
  std::int32_t topic_total(std::size_t k) const { return topic_columns_[k].total; }
  std::int32_t interest_total(std::size_t j) const { return interest_columns_[j].total; }
  std::int32_t resource_total(Id r) const { return resource_total_[r]; }
  std::int32_t user_total(Id u) const { return user_total_[u]; }
  std::span<const std::int32_t> resource_totals() const noexcept { return resource_total_; }
  std::span<const std::int32_t> user_totals() const noexcept { return user_total_; }

  std::uint64_t topic_id(std::size_t k) const { return topic_columns_[k].id; }
  std::uint64_t interest_id(std::size_t j) const { return interest_columns_[j].id; }

  /// Appends an empty component and returns its index.
  std::size_t add_topic();
  std::size_t add_interest();

  /// Moves tuple i to (topic, interest).
  void assign(std::size_t i, std::uint32_t topic, std::uint32_t interest);

  /// Drops components with no tuples and compacts labels. Returns the removed
  /// indices (pre-compaction, ascending).
  std::vector<std::size_t> remove_empty_topics();
  std::vector<std::size_t> remove_empty_interests();

 private:
  friend struct HdpSweeper;

  struct TopicColumn {
    std::uint64_t id = 0;
    std::vector<std::int32_t> by_resource;
    std::vector<std::int32_t> by_interest_tag;  ///< [interest][tag], sized to interest capacity
    std::vector<std::int32_t> by_interest;      ///< sized to interest capacity
    std::int32_t total = 0;
  };
  struct InterestColumn {
    std::uint64_t id = 0;
    std::vector<std::int32_t> by_user;
    std::int32_t total = 0;
  };

  void init_tables(std::size_t n_topics, std::size_t n_interests);
  void add(std::size_t i, int delta);
  void ensure_interest_capacity(std::size_t n);

  const Corpus* corpus_;
  double eta_;
  std::size_t n_tags_;
  std::size_t interest_capacity_ = 0;
  std::uint64_t next_topic_id_ = 0;
  std::uint64_t next_interest_id_ = 0;
  std::vector<std::uint32_t> topics_;
  std::vector<std::uint32_t> interests_;
  std::vector<TopicColumn> topic_columns_;
  std::vector<InterestColumn> interest_columns_;
  std::vector<std::int32_t> resource_total_;
  std::vector<std::int32_t> user_total_;
};

/// p(z_i = k) over the k_z instantiated topics followed by one slot for a new
/// topic; tuple i is excluded from the counts. With allow_new == false the
/// last slot is exactly zero.
std::vector<double> hdp_topic_conditional(const HdpState& state, const HdpGlobals& globals, std::size_t i,
                                          bool allow_new = true);

/// Interest counterpart of hdp_topic_conditional (j_x + 1 entries).
std::vector<double> hdp_interest_conditional(const HdpState& state, const HdpGlobals& globals, std::size_t i,
                                             bool allow_new = true);

/// Splits the unused topic mass: appends a * alpha_u and keeps (1 - a) * alpha_u.
void instantiate_topic_with(HdpGlobals& globals, double a);
void instantiate_interest_with(HdpGlobals& globals, double a);
/// Draws a from the stick rule and calls the *_with variant. Returns a.
double instantiate_topic(HdpGlobals& globals, Rng& rng, StickRule rule = StickRule::kRemainder);
double instantiate_interest(HdpGlobals& globals, Rng& rng, StickRule rule = StickRule::kRemainder);

/// Table-count resampling of the global weights followed by Escobar-West
/// updates of gamma and mu. The interest layer is skipped in kHdpLda mode.
/// Components with no tuples should be pruned first.
void resample_globals(const HdpState& state, HdpGlobals& globals, Rng& rng, GammaPrior prior,
                      HdpMode mode = HdpMode::kHdpItm, int aux_iterations = 20);

/// Escobar-West update of the tag-layer mass eta over the j_x * k_z
/// interest-topic tag groups, as in the finite model. Returns the new value.
double resample_eta(HdpState& state, Rng& rng, GammaPrior prior, int aux_iterations = 20);

/// Removes empty components from the state and folds their weights into the
/// remainders.
void prune_empty(HdpState& state, HdpGlobals& globals);

struct SweepControl {
  bool allow_new = true;
  std::size_t max_topics = 400;
  std::size_t max_interests = 80;
  StickRule stick_rule = StickRule::kRemainder;
  HdpMode mode = HdpMode::kHdpItm;
  bool cap_hit = false;  ///< set when a draw asked for a component beyond a cap
  int topics_created = 0;
  int interests_created = 0;
};

/// One pass over the tuples. When a draw selects a new component while a cap
/// is already reached, cap_hit is set, allow_new is cleared for the remainder
/// of the sweep and the tuple is redrawn among instantiated components.
void hdp_sweep(HdpState& state, HdpGlobals& globals, Rng& rng, SweepControl& control);

double hdp_log_likelihood(const HdpState& state);

/// phi_{r,k} = (N_{r,k} + mu_z alpha_k) / (N_r + mu_z) over the instantiated
/// topics plus a final column holding the unused mass; psi likewise. theta is
/// interest x topic x tag over instantiated components.
Posterior hdp_estimate_parameters(const HdpState& state, const HdpGlobals& globals, bool with_theta = true);

struct HdpDiagnostics {
  std::vector<double> log_likelihood;
  std::vector<std::size_t> n_topics;
  std::vector<std::size_t> n_interests;
  std::vector<HdpGlobals> concentrations;  ///< weights cleared, concentrations kept
  std::vector<double> eta;
  int grow_phase_end = 0;                  ///< iteration at which growth stopped
  bool exited_early = false;               ///< growth stopped because of a cap
  int averaging_start = 0;
  int iterations = 0;
};

struct HdpResult {
  Posterior posterior;  ///< columns keyed by component id, last column = unused mass
  HdpDiagnostics diagnostics;
  HdpGlobals globals;
  std::vector<std::uint64_t> topic_ids;     ///< phi column ids (excluding the last)
  std::vector<std::uint64_t> interest_ids;  ///< psi column ids (excluding the last)
};

using HdpObserver = std::function<void(int iteration, const HdpState& state, const HdpGlobals& globals)>;

/// Grow phase (new components allowed, caps enforced) for policy.grow_iterations,
/// then frozen sweeps. The final averaging phase of policy.averaging_window
/// iterations starts once the likelihood rule fires with at least
/// min_iterations in total, and at the latest so that the run ends at
/// max_iterations.
HdpResult train_two_phase(const Corpus& corpus, const HdpConfig& config, const HdpObserver& observer = {});

}  // namespace itm
