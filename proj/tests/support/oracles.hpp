#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the sampler code paths it is meant to check.

#include <cstdint>
#include <span>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/hdpitm.hpp"
#include "itm/itm.hpp"

namespace itm::oracle {

/// log p(z, x, t) up to a constant, from the closed-form Dirichlet-multinomial
/// joint over resources, users and interest-topic tag groups.
double itm_log_joint(const Corpus& corpus, std::span<const std::uint32_t> z, std::span<const std::uint32_t> x,
                     std::size_t nz, std::size_t nx, double alpha, double beta, double eta);

/// p(z_i = k | rest) (topic == true) or p(x_i = j | rest) as ratios of the
/// joint, one entry per label value.
std::vector<double> conditional_from_joint(const Corpus& corpus, std::vector<std::uint32_t> z,
                                           std::vector<std::uint32_t> x, std::size_t nz, std::size_t nx,
                                           double alpha, double beta, double eta, std::size_t i, bool topic);

/// Exact posterior over every joint labelling. State index encodes tuple i's
/// label (z_i * nx + x_i) as digit i in base nz * nx, tuple 0 least significant.
std::vector<double> enumerate_itm_posterior(const Corpus& corpus, std::size_t nz, std::size_t nx, double alpha,
                                            double beta, double eta);

/// Same for LDA: digit i is z_i in base nz.
std::vector<double> enumerate_lda_posterior(const Corpus& corpus, std::size_t nz, double alpha, double eta);

double total_variation(std::span<const double> p, std::span<const double> q);

/// Count tables rebuilt from labels.
struct ItmCounts {
  std::vector<std::int32_t> resource_topic;  ///< [r][z]
  std::vector<std::int32_t> user_interest;   ///< [u][x]
  std::vector<std::int32_t> tag;             ///< [x][z][t]
  std::vector<std::int32_t> interest_topic;  ///< [x][z]
};
ItmCounts recount(const Corpus& corpus, std::span<const std::uint32_t> z, std::span<const std::uint32_t> x,
                  std::size_t nz, std::size_t nx);

/// True when every table of `state` equals a recount of its labels.
bool counts_consistent(const ItmState& state);
bool counts_consistent(const HdpState& state);

/// Infinite-limit conditional under a symmetric prior: used topics weighted by
/// the resource's own counts only, a new topic by alpha / N_T.
std::vector<double> degenerate_symmetric_conditional(const HdpState& state, std::size_t i, double alpha);

/// P(c < threshold) under the posterior of the total mass c of a symmetric
/// Dirichlet-multinomial layer with a Gamma(shape, rate) prior, by quadrature.
/// `groups[g][k]` are the counts of group g over `dim` categories.
double concentration_posterior_below(const std::vector<std::vector<int>>& groups, std::size_t dim, double shape,
                                     double rate, double threshold);

}  // namespace itm::oracle
