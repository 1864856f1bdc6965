#include "itm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "itm/error.hpp"
#include "itm/format.hpp"

namespace itm {

namespace {

void check_distribution(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ValidationError("distribution has a negative or NaN entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("distribution does not sum to 1");
}

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

double jsd_unchecked(std::span<const double> p, std::span<const double> q) {
  // Terms are symmetric in (p, q) and summed in sorted order, so the result is
  // exactly invariant under swapping the arguments and permuting categories.
  thread_local std::vector<double> terms;
  terms.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    terms[i] = 0.5 * (xlog2x(p[i]) + xlog2x(q[i])) - xlog2x(m);
  }
  std::sort(terms.begin(), terms.end());
  double value = 0.0;
  for (double t : terms) value += t;
  return std::clamp(value, 0.0, 1.0);
}

void check_rows(const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) check_distribution(m.row(r));
}

}  // namespace

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("jsd: length mismatch");
  check_distribution(p);
  check_distribution(q);
  return jsd_unchecked(p, q);
}

double deviation_delta(const Matrix& phi_learned, const Matrix& phi_actual, bool per_pair) {
  if (phi_learned.rows() != phi_actual.rows()) throw ValidationError("deviation: row count mismatch");
  check_rows(phi_learned);
  check_rows(phi_actual);
  const std::size_t n = phi_learned.rows();
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      total += std::abs(jsd_unchecked(phi_learned.row(a), phi_learned.row(b)) -
                        jsd_unchecked(phi_actual.row(a), phi_actual.row(b)));
    }
  }
  if (per_pair && n > 1) total /= static_cast<double>(n * (n - 1) / 2);
  return total;
}

RankedList rank_by_similarity(const Matrix& phi, Id seed) {
  if (seed >= phi.rows()) throw ValidationError("unknown seed resource " + std::to_string(seed));
  check_rows(phi);
  RankedList out;
  out.seed = seed;
  out.entries.reserve(phi.rows() - 1);
  for (Id r = 0; r < phi.rows(); ++r) {
    if (r == seed) continue;
    out.entries.push_back({r, jsd_unchecked(phi.row(seed), phi.row(r))});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return a.divergence != b.divergence ? a.divergence < b.divergence : a.resource < b.resource;
  });
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> precision_curve(const RankedList& ranked, const std::set<Id>& relevant,
                                                                 std::size_t k_max) {
  std::vector<std::pair<std::size_t, std::size_t>> curve;
  const std::size_t n = std::min(k_max, ranked.entries.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    hits += relevant.count(ranked.entries[k].resource);
    curve.emplace_back(k + 1, hits);
  }
  return curve;
}

void write_ranked_csv(std::ostream& out, const RankedList& ranked, const Dictionary& resources, std::size_t limit) {
  out << "rank,resource,divergence\n";
  const std::size_t n = std::min(limit, ranked.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    out << (i + 1) << ',' << resources.name(ranked.entries[i].resource) << ','
        << format_double(ranked.entries[i].divergence) << '\n';
  }
}

void write_precision_csv(std::ostream& out, const std::vector<std::pair<std::size_t, std::size_t>>& curve) {
  out << "k,hits\n";
  for (const auto& [k, hits] : curve) out << k << ',' << hits << '\n';
}

void write_delta_csv(std::ostream& out, const std::vector<DeltaRecord>& records) {
  out << "ambiguity,variation,model,run,delta\n";
  for (const auto& r : records) {
    out << format_double(r.ambiguity) << ',' << format_double(r.variation) << ',' << r.model << ',' << r.run << ','
        << format_double(r.delta) << '\n';
  }
}

}  // namespace itm
