#pragma once

#include <optional>
#include <span>

namespace itm {

/// True when the mean absolute relative change of the log-likelihood over the
/// last `window` successive pairs of `history` is below `threshold`.
/// Requires history.size() >= window + 1 (ValidationError otherwise).
bool check_converged(std::span<const double> history, int window, double threshold);

/// First index i such that check_converged(history[0..i]) holds, if any.
std::optional<std::size_t> first_converged_index(std::span<const double> history, int window,
                                                 double threshold);

}  // namespace itm
