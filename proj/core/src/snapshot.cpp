#include "itm/snapshot.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "itm/error.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace itm {

namespace {

using nlohmann::json;

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

bool Snapshot::has(std::string_view name) const {
  for (const auto& m : matrices) {
    if (m.name == name) return true;
  }
  return false;
}

const SnapshotMatrix& Snapshot::matrix(std::string_view name) const {
  for (const auto& m : matrices) {
    if (m.name == name) return m;
  }
  throw ValidationError("snapshot has no matrix named " + std::string(name));
}

Matrix Snapshot::as_matrix(std::string_view name) const {
  const SnapshotMatrix& m = matrix(name);
  if (m.shape.size() != 2) throw ValidationError("snapshot matrix " + m.name + " is not two-dimensional");
  Matrix out(m.shape[0], m.shape[1]);
  out.data() = m.data;
  return out;
}

double Snapshot::attribute(std::string_view key) const {
  auto it = attributes.find(std::string(key));
  if (it == attributes.end()) throw ValidationError("snapshot has no attribute " + std::string(key));
  return it->second;
}

void write_snapshot(std::ostream& out, const Snapshot& snapshot) {
  json header;
  header["kind"] = snapshot.kind;
  if (!snapshot.model.empty()) header["model"] = snapshot.model;
  header["attributes"] = snapshot.attributes;
  if (!snapshot.names.empty()) header["names"] = snapshot.names;
  json list = json::array();
  for (const auto& m : snapshot.matrices) {
    if (element_count(m.shape) != m.data.size()) throw ValidationError("matrix " + m.name + " shape/data mismatch");
    list.push_back({{"name", m.name}, {"shape", m.shape}});
  }
  header["matrices"] = list;
  out << kSnapshotMagic << '\n' << header.dump() << '\n';
  for (const auto& m : snapshot.matrices) {
    out.write(reinterpret_cast<const char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing snapshot");
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotMagic) throw ValidationError("not a snapshot file (bad magic)");
  if (!std::getline(in, line)) throw ValidationError("snapshot header missing");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("snapshot header is not valid JSON: ") + e.what());
  }
  Snapshot s;
  try {
    s.kind = header.at("kind").get<std::string>();
    if (header.contains("model")) s.model = header["model"].get<std::string>();
    s.attributes = header.at("attributes").get<std::map<std::string, double>>();
    if (header.contains("names")) s.names = header["names"].get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& entry : header.at("matrices")) {
      SnapshotMatrix m;
      m.name = entry.at("name").get<std::string>();
      m.shape = entry.at("shape").get<std::vector<std::size_t>>();
      s.matrices.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed snapshot header: ") + e.what());
  }
  for (auto& m : s.matrices) {
    m.data.resize(element_count(m.shape));
    in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) throw ValidationError("snapshot truncated in matrix " + m.name);
  }
  return s;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snapshot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_snapshot(out, snapshot);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_snapshot(in);
}

Snapshot posterior_snapshot(std::string model, const Posterior& posterior, const Corpus& corpus,
                            std::map<std::string, double> attributes) {
  Snapshot s;
  s.model = std::move(model);
  s.attributes = std::move(attributes);
  s.attributes["N_R"] = static_cast<double>(corpus.n_resources());
  s.attributes["N_U"] = static_cast<double>(corpus.n_users());
  s.attributes["N_T"] = static_cast<double>(corpus.n_tags());
  s.attributes["samples_averaged"] = posterior.n_samples_averaged;
  s.names["resources"] = corpus.resources().names();
  s.names["users"] = corpus.users().names();
  s.names["tags"] = corpus.tags().names();
  s.matrices.push_back({"phi", {posterior.phi.rows(), posterior.phi.cols()}, posterior.phi.data()});
  if (!posterior.psi.empty()) {
    s.matrices.push_back({"psi", {posterior.psi.rows(), posterior.psi.cols()}, posterior.psi.data()});
  }
  if (!posterior.theta.empty()) {
    const auto& t = posterior.theta;
    s.matrices.push_back({"theta", {t.dim0(), t.dim1(), t.dim2()}, t.data()});
  }
  return s;
}

Posterior posterior_from_snapshot(const Snapshot& snapshot) {
  if (snapshot.kind != "posterior") throw ValidationError("snapshot does not hold a posterior");
  Posterior p;
  p.phi = snapshot.as_matrix("phi");
  if (snapshot.has("psi")) p.psi = snapshot.as_matrix("psi");
  if (snapshot.has("theta")) {
    const auto& m = snapshot.matrix("theta");
    if (m.shape.size() != 3) throw ValidationError("theta must be three-dimensional");
    p.theta = Tensor3(m.shape[0], m.shape[1], m.shape[2]);
    p.theta.data() = m.data;
  }
  auto it = snapshot.attributes.find("samples_averaged");
  p.n_samples_averaged = it == snapshot.attributes.end() ? 0 : static_cast<int>(it->second);
  return p;
}

Snapshot truth_snapshot(const GroundTruth& truth, const SynthConfig& config) {
  Snapshot s;
  s.kind = "truth";
  s.attributes = {{"N_R", static_cast<double>(config.n_resources)},
                  {"N_U", static_cast<double>(config.n_users)},
                  {"N_T", static_cast<double>(config.n_tags)},
                  {"N_Z", static_cast<double>(config.n_topics)},
                  {"ambiguity", config.ambiguity},
                  {"variation", config.variation},
                  {"threshold_factor", config.threshold_factor}};
  std::vector<std::string> resources(truth.phi_actual.rows());
  for (std::size_t r = 0; r < resources.size(); ++r) resources[r] = "r" + std::to_string(r);
  s.names["resources"] = std::move(resources);
  s.matrices.push_back({"phi", {truth.phi_actual.rows(), truth.phi_actual.cols()}, truth.phi_actual.data()});
  s.matrices.push_back({"psi", {truth.psi_actual.rows(), truth.psi_actual.cols()}, truth.psi_actual.data()});
  s.matrices.push_back({"theta", {truth.theta_actual.rows(), truth.theta_actual.cols()}, truth.theta_actual.data()});
  return s;
}

GroundTruth truth_from_snapshot(const Snapshot& snapshot) {
  if (snapshot.kind != "truth") throw ValidationError("snapshot does not hold a ground truth");
  GroundTruth gt;
  gt.phi_actual = snapshot.as_matrix("phi");
  gt.psi_actual = snapshot.as_matrix("psi");
  gt.theta_actual = snapshot.as_matrix("theta");
  return gt;
}

}  // namespace itm
