#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/itm.hpp"
#include "itm/matrix.hpp"
#include "itm/synth.hpp"

namespace itm {

struct SnapshotMatrix {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;  ///< row-major
};

/// Matrix container: a magic line, one JSON header line, then the matrices as
/// little-endian float64 in header order.
struct Snapshot {
  std::string kind = "posterior";  ///< "posterior" or "truth"
  std::string model;               ///< "lda", "itm", "hdp-lda", "hdpitm"; empty for truth
  std::map<std::string, double> attributes;
  std::map<std::string, std::vector<std::string>> names;  ///< "resources", "users", "tags"
  std::vector<SnapshotMatrix> matrices;

  bool has(std::string_view name) const;
  const SnapshotMatrix& matrix(std::string_view name) const;
  /// A two-dimensional entry as a Matrix.
  Matrix as_matrix(std::string_view name) const;
  double attribute(std::string_view key) const;
};

inline constexpr std::string_view kSnapshotMagic = "ITMSNAP1";

void write_snapshot(std::ostream& out, const Snapshot& snapshot);
Snapshot read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);
Snapshot load_snapshot(const std::filesystem::path& path);

/// phi, psi (if present) and theta with the corpus vocabularies attached.
Snapshot posterior_snapshot(std::string model, const Posterior& posterior, const Corpus& corpus,
                            std::map<std::string, double> attributes);
Posterior posterior_from_snapshot(const Snapshot& snapshot);

Snapshot truth_snapshot(const GroundTruth& truth, const SynthConfig& config);
GroundTruth truth_from_snapshot(const Snapshot& snapshot);

}  // namespace itm
