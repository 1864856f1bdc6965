#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/matrix.hpp"

namespace itm {

/// Jensen-Shannon divergence with base-2 logarithms, in [0, 1]. Both inputs
/// must have the same length and sum to one within 1e-9.
double jsd(std::span<const double> p, std::span<const double> q);

/// Sum over unordered resource pairs of |JSD(learned) - JSD(actual)|. With
/// per_pair the sum is divided by the number of pairs.
double deviation_delta(const Matrix& phi_learned, const Matrix& phi_actual, bool per_pair = false);

struct RankedEntry {
  Id resource = 0;
  double divergence = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Resources ordered by ascending divergence from the seed, ties by id; the
/// seed itself is excluded.
struct RankedList {
  Id seed = 0;
  std::vector<RankedEntry> entries;
};

RankedList rank_by_similarity(const Matrix& phi, Id seed);

/// (k, relevant hits among the first k entries) for k = 1..min(k_max, size).
std::vector<std::pair<std::size_t, std::size_t>> precision_curve(const RankedList& ranked, const std::set<Id>& relevant,
                                                                 std::size_t k_max = 100);

/// CSV `rank,resource,divergence`, at most `limit` rows, resources by name.
void write_ranked_csv(std::ostream& out, const RankedList& ranked, const Dictionary& resources,
                      std::size_t limit = 100);

/// CSV `k,hits`.
void write_precision_csv(std::ostream& out, const std::vector<std::pair<std::size_t, std::size_t>>& curve);

struct DeltaRecord {
  double ambiguity = 0.0;
  double variation = 0.0;
  std::string model;
  int run = 0;
  double delta = 0.0;
};

/// CSV `ambiguity,variation,model,run,delta`.
void write_delta_csv(std::ostream& out, const std::vector<DeltaRecord>& records);

}  // namespace itm
