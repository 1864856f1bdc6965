#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/matrix.hpp"

namespace itm {

/// Synthetic ground truth and post generation over a tag-ambiguity x
/// interest-variation grid. User interests are distributions over the same
/// topics as resources, so n_interests must equal n_topics.
struct SynthConfig {
  std::size_t n_resources = 40;
  std::size_t n_topics = 10;
  std::size_t n_users = 100;
  std::size_t n_interests = 10;
  std::size_t n_tags = 100;
  double ambiguity = 1.0;  ///< symmetric Dirichlet parameter of topic-over-tag rows
  double variation = 1.0;  ///< symmetric Dirichlet parameter of user rows
  double threshold_factor = 1.5;
  int draws_per_post = 7;
  std::size_t resource_groups = 5;
  std::uint64_t seed = 0;

  // Resource topic rows: groups share a sparse base measure; a resource
  // "favors" k topics when its top-k entries first reach favor_mass.
  double group_base_param = 0.1;
  double resource_concentration = 10.0;
  double favor_mass = 0.9;
  std::size_t favor_min = 2;
  std::size_t favor_max = 4;
  int max_rejections = 10000;

  void validate() const;
};

struct GroundTruth {
  Matrix phi_actual;    ///< resource x topic
  Matrix psi_actual;    ///< user x topic
  Matrix theta_actual;  ///< topic x tag
  std::vector<std::size_t> resource_group;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Smallest k such that the k largest entries of `row` sum to at least `mass`.
std::size_t favored_topic_count(std::span<const double> row, double mass);

/// exp(entropy) of a distribution, in natural units.
double effective_support(std::span<const double> row);

GroundTruth generate_ground_truth(const SynthConfig& config);

struct SynthCorpus {
  Corpus corpus;  ///< vocabularies r0.., u0.., t0.. cover every id, used or not
  std::vector<Post> posts;
  double mean_match = 0.0;
};

/// Bookmarks every (resource, user) pair whose match phi_r . psi_u exceeds
/// threshold_factor times the mean match over all pairs. Throws
/// ValidationError when no pair qualifies.
SynthCorpus generate_corpus(const GroundTruth& truth, const SynthConfig& config);

/// Number of posts the threshold would admit, without drawing tags.
std::size_t count_qualifying_pairs(const GroundTruth& truth, double threshold_factor);

struct GridCell {
  std::size_t index = 0;
  double ambiguity = 0.0;
  double variation = 0.0;
  SynthConfig config;
  GroundTruth truth;
  SynthCorpus data;
};

inline constexpr double kDefaultGridValues[] = {1.0, 0.5, 0.1, 0.05, 0.01};

/// Cartesian product ambiguity x variation (ambiguity-major). Each cell gets a
/// seed derived from the master seed and its index.
std::vector<SynthConfig> grid_configs(const SynthConfig& base, std::span<const double> values, std::uint64_t master_seed);
GridCell generate_cell(const SynthConfig& config, std::size_t index);
std::vector<GridCell> grid_run(const SynthConfig& base, std::span<const double> values, std::uint64_t master_seed);

}  // namespace itm
