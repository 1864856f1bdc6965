#include "itm/random.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "itm/error.hpp"

namespace itm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a(stream)) + index);
}

double uniform01(Rng& rng) {
  // 53 random bits mapped to [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_discrete(Rng& rng, std::span<const double> weights, double total) {
  assert(!weights.empty());
  const double target = uniform01(rng) * total;
  double cumulative = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    cumulative += weights[k];
    last_positive = k;
    if (target < cumulative) return k;
  }
  // Rounding left target at or beyond the accumulated total.
  if (last_positive == weights.size()) throw NumericalError("sample_discrete: no positive weight");
  return last_positive;
}

std::size_t sample_discrete(Rng& rng, std::span<const double> weights) {
  return sample_discrete(rng, weights, std::accumulate(weights.begin(), weights.end(), 0.0));
}

double sample_log_gamma(Rng& rng, double shape) {
  assert(shape > 0.0);
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(rng));
  }
  // G(a) = G(a + 1) * U^(1/a)
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  return std::log(gamma(rng)) + std::log(u) / shape;
}

double sample_gamma(Rng& rng, double shape, double rate) {
  assert(shape > 0.0 && rate > 0.0);
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  return gamma(rng);
}

double sample_beta(Rng& rng, double a, double b) {
  const double la = sample_log_gamma(rng, a);
  const double lb = sample_log_gamma(rng, b);
  const double m = std::max(la, lb);
  return std::exp(la - m) / (std::exp(la - m) + std::exp(lb - m));
}

bool sample_bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> params) {
  std::vector<double> out(params.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < params.size(); ++k) {
    out[k] = sample_log_gamma(rng, params[k]);
    max_log = std::max(max_log, out[k]);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - max_log);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> sample_symmetric_dirichlet(Rng& rng, std::size_t dim, double param) {
  const std::vector<double> params(dim, param);
  return sample_dirichlet(rng, params);
}

int sample_table_count(Rng& rng, int customers, double weight) {
  if (customers <= 0) return 0;
  int tables = 1;
  for (int j = 1; j < customers; ++j) {
    if (uniform01(rng) * (weight + j) < weight) ++tables;
  }
  return tables;
}

}  // namespace itm
