#pragma once

#include <cstdint>
#include <span>

#include "itm/random.hpp"

namespace itm {

/// Gamma(shape, rate) hyperprior on a concentration parameter.
struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Samples table counts for every cell of a Dirichlet-multinomial layer whose
/// per-category pseudo-count is `weight`, and returns their sum.
std::int64_t sample_total_tables(Rng& rng, std::span<const std::int32_t> counts, double weight);

/// Auxiliary-variable Gibbs update of the total mass of a symmetric
/// Dirichlet-multinomial layer (or the group-level concentration of an HDP),
/// shared by many groups. `group_sizes` holds n_g per group and
/// `total_tables` the sum of the table counts over all groups and categories.
/// Runs `iterations` rounds of (w_g ~ Beta(c+1, n_g), s_g ~ Bernoulli(n_g/(n_g+c)),
/// c ~ Gamma(a + m - sum s, b - sum log w)).
double resample_group_concentration(Rng& rng, double current, std::span<const std::int32_t> group_sizes,
                                    std::int64_t total_tables, GammaPrior prior, int iterations = 20);

/// Escobar-West update of a single Dirichlet-process concentration given
/// `components` occupied components among `observations` draws.
double resample_dp_concentration(Rng& rng, double current, std::int64_t components,
                                 std::int64_t observations, GammaPrior prior);

}  // namespace itm
