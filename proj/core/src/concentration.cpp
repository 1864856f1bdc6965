#include "itm/concentration.hpp"

#include <cmath>

namespace itm {

std::int64_t sample_total_tables(Rng& rng, std::span<const std::int32_t> counts, double weight) {
  std::int64_t total = 0;
  for (std::int32_t n : counts) {
    if (n > 0) total += sample_table_count(rng, n, weight);
  }
  return total;
}

double resample_group_concentration(Rng& rng, double current, std::span<const std::int32_t> group_sizes,
                                    std::int64_t total_tables, GammaPrior prior, int iterations) {
  double c = current;
  for (int it = 0; it < iterations; ++it) {
    double sum_log_w = 0.0;
    double sum_s = 0.0;
    for (std::int32_t n : group_sizes) {
      if (n <= 0) continue;
      sum_log_w += std::log(sample_beta(rng, c + 1.0, static_cast<double>(n)));
      if (sample_bernoulli(rng, n / (n + c))) sum_s += 1.0;
    }
    c = sample_gamma(rng, prior.shape + static_cast<double>(total_tables) - sum_s, prior.rate - sum_log_w);
  }
  return c;
}

double resample_dp_concentration(Rng& rng, double current, std::int64_t components,
                                 std::int64_t observations, GammaPrior prior) {
  if (observations <= 0) return sample_gamma(rng, prior.shape, prior.rate);
  const double n = static_cast<double>(observations);
  const double k = static_cast<double>(components);
  const double aux = sample_beta(rng, current + 1.0, n);
  const double rate = prior.rate - std::log(aux);
  const double odds = (prior.shape + k - 1.0) / (n * rate);
  const double pi = odds / (1.0 + odds);
  if (prior.shape + k - 1.0 <= 0.0 || !sample_bernoulli(rng, 1.0 - pi)) {
    return sample_gamma(rng, prior.shape + k, rate);
  }
  return sample_gamma(rng, prior.shape + k - 1.0, rate);
}

}  // namespace itm
