#include "itm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "itm/error.hpp"
#include "itm/random.hpp"

namespace itm {

void SynthConfig::validate() const {
  if (n_resources == 0 || n_topics == 0 || n_users == 0 || n_interests == 0 || n_tags == 0) {
    throw ValidationError("synthetic dimensions must be >= 1");
  }
  if (n_interests != n_topics) {
    throw ValidationError("user interests are distributions over topics; n_interests must equal n_topics");
  }
  for (double v : {ambiguity, variation, threshold_factor, group_base_param, resource_concentration}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("synthetic parameters must be positive");
  }
  if (draws_per_post < 1) throw ValidationError("draws per post must be >= 1");
  if (resource_groups == 0) throw ValidationError("resource groups must be >= 1");
  if (!(favor_mass > 0.0 && favor_mass <= 1.0)) throw ValidationError("favor mass must be in (0, 1]");
  if (favor_min < 1 || favor_min > favor_max || favor_min > n_topics) {
    throw ValidationError("favored topic range is empty");
  }
  if (max_rejections < 1) throw ValidationError("max rejections must be >= 1");
}

std::size_t favored_topic_count(std::span<const double> row, double mass) {
  std::vector<double> sorted(row.begin(), row.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double acc = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    acc += sorted[k];
    if (acc >= mass) return k + 1;
  }
  return sorted.size();
}

double effective_support(std::span<const double> row) {
  double h = 0.0;
  for (double p : row) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

namespace {

void fill_row(Matrix& m, std::size_t r, const std::vector<double>& v) {
  std::copy(v.begin(), v.end(), m.row(r).begin());
}

}  // namespace

GroundTruth generate_ground_truth(const SynthConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, "generation", 0));
  const auto favors = [&](const std::vector<double>& row) {
    const std::size_t k = favored_topic_count(row, config.favor_mass);
    return k >= config.favor_min && k <= config.favor_max;
  };

  std::vector<std::vector<double>> bases(config.resource_groups);
  for (auto& base : bases) {
    int attempts = 0;
    do {
      if (++attempts > config.max_rejections) throw ValidationError("could not draw a group base favoring the requested topic count");
      base = sample_symmetric_dirichlet(rng, config.n_topics, config.group_base_param);
    } while (!favors(base));
  }

  GroundTruth gt;
  gt.phi_actual = Matrix(config.n_resources, config.n_topics);
  gt.resource_group.resize(config.n_resources);
  std::vector<double> params(config.n_topics);
  for (std::size_t r = 0; r < config.n_resources; ++r) {
    const std::size_t g = r % config.resource_groups;
    gt.resource_group[r] = g;
    for (std::size_t k = 0; k < config.n_topics; ++k) params[k] = config.resource_concentration * bases[g][k];
    std::vector<double> row;
    int attempts = 0;
    do {
      if (++attempts > config.max_rejections) {
        row = bases[g];
        break;
      }
      row = sample_dirichlet(rng, params);
    } while (!favors(row));
    fill_row(gt.phi_actual, r, row);
  }

  gt.psi_actual = Matrix(config.n_users, config.n_topics);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    fill_row(gt.psi_actual, u, sample_symmetric_dirichlet(rng, config.n_topics, config.variation));
  }
  gt.theta_actual = Matrix(config.n_topics, config.n_tags);
  for (std::size_t k = 0; k < config.n_topics; ++k) {
    fill_row(gt.theta_actual, k, sample_symmetric_dirichlet(rng, config.n_tags, config.ambiguity));
  }
  return gt;
}

namespace {

double match(const GroundTruth& gt, std::size_t r, std::size_t u) {
  const auto phi = gt.phi_actual.row(r);
  const auto psi = gt.psi_actual.row(u);
  double m = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) m += phi[k] * psi[k];
  return m;
}

double mean_match(const GroundTruth& gt) {
  double total = 0.0;
  for (std::size_t r = 0; r < gt.phi_actual.rows(); ++r) {
    for (std::size_t u = 0; u < gt.psi_actual.rows(); ++u) total += match(gt, r, u);
  }
  return total / static_cast<double>(gt.phi_actual.rows() * gt.psi_actual.rows());
}

Dictionary numbered(char prefix, std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = prefix + std::to_string(i);
  return Dictionary::from_names(std::move(names));
}

void check_truth(const GroundTruth& gt) {
  if (gt.phi_actual.cols() != gt.psi_actual.cols() || gt.phi_actual.cols() != gt.theta_actual.rows()) {
    throw ValidationError("ground truth dimensions disagree");
  }
  if (gt.phi_actual.rows() == 0 || gt.psi_actual.rows() == 0 || gt.theta_actual.cols() == 0) {
    throw ValidationError("ground truth is empty");
  }
}

}  // namespace

std::size_t count_qualifying_pairs(const GroundTruth& truth, double threshold_factor) {
  check_truth(truth);
  const double threshold = threshold_factor * mean_match(truth);
  std::size_t n = 0;
  for (std::size_t r = 0; r < truth.phi_actual.rows(); ++r) {
    for (std::size_t u = 0; u < truth.psi_actual.rows(); ++u) n += match(truth, r, u) > threshold ? 1 : 0;
  }
  return n;
}

SynthCorpus generate_corpus(const GroundTruth& truth, const SynthConfig& config) {
  config.validate();
  check_truth(truth);
  Rng rng(derive_seed(config.seed, "generation", 1));
  const std::size_t nz = truth.phi_actual.cols();
  const std::size_t nt = truth.theta_actual.cols();

  SynthCorpus out;
  out.mean_match = mean_match(truth);
  const double threshold = config.threshold_factor * out.mean_match;
  std::vector<double> preference(nz);
  for (std::size_t r = 0; r < truth.phi_actual.rows(); ++r) {
    for (std::size_t u = 0; u < truth.psi_actual.rows(); ++u) {
      if (!(match(truth, r, u) > threshold)) continue;
      double total = 0.0;
      for (std::size_t k = 0; k < nz; ++k) {
        preference[k] = truth.phi_actual(r, k) * truth.psi_actual(u, k);
        total += preference[k];
      }
      Post post{static_cast<Id>(r), static_cast<Id>(u), {}};
      for (int d = 0; d < config.draws_per_post; ++d) {
        const std::size_t z = sample_discrete(rng, preference, total);
        const Id t = static_cast<Id>(sample_discrete(rng, truth.theta_actual.row(z)));
        if (std::find(post.tags.begin(), post.tags.end(), t) == post.tags.end()) post.tags.push_back(t);
      }
      out.posts.push_back(std::move(post));
    }
  }
  if (out.posts.empty()) throw ValidationError("empty corpus: no resource-user pair passes the match threshold");

  out.corpus = Corpus(numbered('r', truth.phi_actual.rows()), numbered('u', truth.psi_actual.rows()),
                      numbered('t', nt), expand_posts(out.posts));
  return out;
}

std::vector<SynthConfig> grid_configs(const SynthConfig& base, std::span<const double> values,
                                      std::uint64_t master_seed) {
  if (values.empty()) throw ValidationError("grid needs at least one parameter value");
  std::vector<SynthConfig> out;
  for (double a : values) {
    for (double v : values) {
      SynthConfig c = base;
      c.ambiguity = a;
      c.variation = v;
      c.seed = derive_seed(master_seed, "cell", out.size());
      c.validate();
      out.push_back(c);
    }
  }
  return out;
}

GridCell generate_cell(const SynthConfig& config, std::size_t index) {
  GridCell cell;
  cell.index = index;
  cell.ambiguity = config.ambiguity;
  cell.variation = config.variation;
  cell.config = config;
  cell.truth = generate_ground_truth(config);
  cell.data = generate_corpus(cell.truth, config);
  return cell;
}

std::vector<GridCell> grid_run(const SynthConfig& base, std::span<const double> values, std::uint64_t master_seed) {
  const auto configs = grid_configs(base, values, master_seed);
  std::vector<GridCell> cells;
  cells.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) cells.push_back(generate_cell(configs[i], i));
  return cells;
}

}  // namespace itm
