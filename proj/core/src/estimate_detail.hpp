#pragma once

// Shared smoothing arithmetic for the finite samplers. ITM with one interest
// and LDA must produce bit-identical estimates, so both go through here.

#include <cstdint>
#include <span>
#include <vector>

#include "itm/itm.hpp"

namespace itm::detail {

/// sum[g * K + k] += (counts[g * K + k] + mass / K) / (totals[g] + mass)
inline void add_smoothed_rows(std::span<double> sum, std::span<const std::int32_t> counts,
                              std::span<const std::int32_t> totals, std::size_t K, double mass) {
  const double prior = mass / static_cast<double>(K);
  for (std::size_t g = 0; g < totals.size(); ++g) {
    const double inv = 1.0 / (static_cast<double>(totals[g]) + mass);
    const std::size_t base = g * K;
    for (std::size_t k = 0; k < K; ++k) sum[base + k] += (counts[base + k] + prior) * inv;
  }
}

/// Tag-distribution sums kept in the sampler's [t][x][z] layout.
inline void add_smoothed_tags(std::span<double> sum, std::span<const std::int32_t> counts,
                              std::span<const std::int32_t> margins, std::size_t n_tags, double eta) {
  const std::size_t cells = margins.size();
  const double prior = eta / static_cast<double>(n_tags);
  std::vector<double> inv(cells);
  for (std::size_t c = 0; c < cells; ++c) inv[c] = 1.0 / (static_cast<double>(margins[c]) + eta);
  for (std::size_t t = 0; t < n_tags; ++t) {
    const std::size_t base = t * cells;
    for (std::size_t c = 0; c < cells; ++c) sum[base + c] += (counts[base + c] + prior) * inv[c];
  }
}

/// Running sums of per-iteration estimates.
class EstimateAccumulator {
 public:
  EstimateAccumulator(std::size_t n_resources, std::size_t n_topics, std::size_t n_users,
                      std::size_t n_interests, std::size_t n_tags, bool with_psi, bool with_theta)
      : n_resources_(n_resources),
        n_topics_(n_topics),
        n_users_(with_psi ? n_users : 0),
        n_interests_(n_interests),
        n_tags_(n_tags),
        with_theta_(with_theta),
        phi_(n_resources * n_topics, 0.0),
        psi_(n_users_ * n_interests, 0.0),
        theta_(with_theta ? n_tags * n_interests * n_topics : 0, 0.0) {}

  void add(std::span<const std::int32_t> resource_topic, std::span<const std::int32_t> resource_total,
           double alpha, std::span<const std::int32_t> user_interest,
           std::span<const std::int32_t> user_total, double beta, std::span<const std::int32_t> tag_counts,
           std::span<const std::int32_t> interest_topic, double eta) {
    add_smoothed_rows(phi_, resource_topic, resource_total, n_topics_, alpha);
    if (n_users_ > 0) add_smoothed_rows(psi_, user_interest, user_total, n_interests_, beta);
    if (with_theta_) add_smoothed_tags(theta_, tag_counts, interest_topic, n_tags_, eta);
    ++samples_;
  }

  Posterior finish() const {
    Posterior out;
    const double scale = 1.0 / static_cast<double>(samples_);
    out.phi = Matrix(n_resources_, n_topics_);
    for (std::size_t i = 0; i < phi_.size(); ++i) out.phi.data()[i] = phi_[i] * scale;
    if (n_users_ > 0) {
      out.psi = Matrix(n_users_, n_interests_);
      for (std::size_t i = 0; i < psi_.size(); ++i) out.psi.data()[i] = psi_[i] * scale;
    }
    if (with_theta_) {
      out.theta = Tensor3(n_interests_, n_topics_, n_tags_);
      const std::size_t cells = n_interests_ * n_topics_;
      for (std::size_t t = 0; t < n_tags_; ++t) {
        for (std::size_t c = 0; c < cells; ++c) {
          out.theta.data()[c * n_tags_ + t] = theta_[t * cells + c] * scale;
        }
      }
    }
    out.n_samples_averaged = samples_;
    return out;
  }

  int samples() const noexcept { return samples_; }

 private:
  std::size_t n_resources_, n_topics_, n_users_, n_interests_, n_tags_;
  bool with_theta_;
  std::vector<double> phi_, psi_, theta_;
  int samples_ = 0;
};

}  // namespace itm::detail
