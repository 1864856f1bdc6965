#include "itm/convergence.hpp"

#include <cmath>
#include <string>

#include "itm/error.hpp"

namespace itm {

bool check_converged(std::span<const double> history, int window, double threshold) {
  if (window < 1) throw ValidationError("convergence window must be >= 1");
  if (history.size() < static_cast<std::size_t>(window) + 1) {
    throw ValidationError("convergence check needs " + std::to_string(window + 1) +
                          " likelihood values, have " + std::to_string(history.size()));
  }
  const std::size_t end = history.size();
  double total = 0.0;
  for (std::size_t i = end - window; i < end; ++i) {
    const double prev = history[i - 1];
    const double change = history[i] - prev;
    // A zero previous value only arises for degenerate single-label corpora.
    total += prev == 0.0 ? std::abs(change) : std::abs(change / prev);
  }
  return total / window < threshold;
}

std::optional<std::size_t> first_converged_index(std::span<const double> history, int window,
                                                 double threshold) {
  for (std::size_t i = static_cast<std::size_t>(window); i < history.size(); ++i) {
    if (check_converged(history.first(i + 1), window, threshold)) return i;
  }
  return std::nullopt;
}

}  // namespace itm
