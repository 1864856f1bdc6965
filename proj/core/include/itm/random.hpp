#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace itm {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream of a master seed
/// ("generation", "init", "sweeps", ...). Stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

double uniform01(Rng& rng);

/// Draws an index with probability proportional to `weights`. `total` must be
/// the sum of the weights. Zero-weight entries are never returned.
std::size_t sample_discrete(Rng& rng, std::span<const double> weights, double total);
std::size_t sample_discrete(Rng& rng, std::span<const double> weights);

/// log of a Gamma(shape, 1) variate. Stays finite for shapes far below 1,
/// where the variate itself underflows.
double sample_log_gamma(Rng& rng, double shape);

/// Gamma(shape, rate) variate.
double sample_gamma(Rng& rng, double shape, double rate = 1.0);

double sample_beta(Rng& rng, double a, double b);

bool sample_bernoulli(Rng& rng, double p);

/// Dirichlet(params) draw computed in log space; every component of the
/// result is finite and the vector sums to one.
std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> params);
std::vector<double> sample_symmetric_dirichlet(Rng& rng, std::size_t dim, double param);

/// Number of occupied tables after seating `customers` in a Chinese restaurant
/// with concentration `weight` (one draw from the Antoniak distribution).
int sample_table_count(Rng& rng, int customers, double weight);

}  // namespace itm
