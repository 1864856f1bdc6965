#include "itm/itm.hpp"

#include <cmath>
#include <string>

#include "estimate_detail.hpp"
#include "itm/convergence.hpp"
#include "itm/error.hpp"

namespace itm {
namespace {

void require_positive_mass(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string(name) + " must be a positive finite number");
  }
}

}  // namespace

void ItmConfig::validate() const {
  if (n_topics == 0) throw ValidationError("number of topics must be >= 1");
  if (n_interests == 0) throw ValidationError("number of interests must be >= 1");
  require_positive_mass(alpha, "alpha");
  require_positive_mass(beta, "beta");
  require_positive_mass(eta, "eta");
  if (n_iterations < 1) throw ValidationError("iterations must be >= 1");
  if (averaging_window < 1 || averaging_window > n_iterations) {
    throw ValidationError("averaging window must be in [1, iterations]");
  }
  if (convergence_window < 1) throw ValidationError("convergence window must be >= 1");
  if (convergence_threshold < 0.0) throw ValidationError("convergence threshold must be >= 0");
  if (hyper.warmup < 0) throw ValidationError("hyperparameter warm-up must be >= 0");
}

ItmState::ItmState(const Corpus& corpus, const ItmConfig& config)
    : ItmState(corpus, config, {}, {}) {}

ItmState::ItmState(const Corpus& corpus, const ItmConfig& config, std::vector<std::uint32_t> topics,
                   std::vector<std::uint32_t> interests)
    : corpus_(&corpus),
      n_topics_(config.n_topics),
      n_interests_(config.n_interests),
      n_tags_(corpus.n_tags()),
      hyper_{config.alpha, config.beta, config.eta},
      rng_(derive_seed(config.seed, "sweeps")) {
  config.validate();
  if (corpus.empty()) throw ValidationError("cannot initialise a sampler on an empty corpus");
  const std::size_t n = corpus.n_triples();

  if (topics.empty() && interests.empty()) {
    Rng init(derive_seed(config.seed, "init"));
    topics.resize(n);
    interests.assign(n, 0);
    std::uniform_int_distribution<std::uint32_t> pick_topic(0, static_cast<std::uint32_t>(n_topics_ - 1));
    std::uniform_int_distribution<std::uint32_t> pick_interest(0, static_cast<std::uint32_t>(n_interests_ - 1));
    for (std::size_t i = 0; i < n; ++i) {
      topics[i] = pick_topic(init);
      if (n_interests_ > 1) interests[i] = pick_interest(init);
    }
  }
  if (topics.size() != n || interests.size() != n) throw ValidationError("label vectors must cover every tuple");
  topics_ = std::move(topics);
  interests_ = std::move(interests);

  resource_topic_.assign(corpus.n_resources() * n_topics_, 0);
  user_interest_.assign(corpus.n_users() * n_interests_, 0);
  tag_counts_.assign(n_tags_ * n_interests_ * n_topics_, 0);
  interest_topic_.assign(n_interests_ * n_topics_, 0);
  inverse_denominator_.assign(n_interests_ * n_topics_, 0.0);
  resource_total_.assign(corpus.n_resources(), 0);
  user_total_.assign(corpus.n_users(), 0);
  scratch_.assign(std::max(n_topics_, n_interests_), 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    if (topics_[i] >= n_topics_ || interests_[i] >= n_interests_) throw ValidationError("label out of range");
    const Triple& tr = corpus.triples()[i];
    ++resource_total_[tr.resource];
    ++user_total_[tr.user];
    add(i, +1);
  }
  for (std::size_t x = 0; x < n_interests_; ++x) {
    for (std::size_t z = 0; z < n_topics_; ++z) refresh_inverse(x, z);
  }
}

void ItmState::add(std::size_t i, int delta) {
  const Triple& tr = corpus_->triples()[i];
  const std::size_t z = topics_[i];
  const std::size_t x = interests_[i];
  resource_topic_[tr.resource * n_topics_ + z] += delta;
  user_interest_[tr.user * n_interests_ + x] += delta;
  tag_counts_[(tr.tag * n_interests_ + x) * n_topics_ + z] += delta;
  interest_topic_[x * n_topics_ + z] += delta;
}

void ItmState::refresh_inverse(std::size_t x, std::size_t z) {
  inverse_denominator_[x * n_topics_ + z] = 1.0 / (interest_topic_[x * n_topics_ + z] + hyper_.eta);
}

void ItmState::set_hyperparameters(const Hyperparameters& h) {
  require_positive_mass(h.alpha, "alpha");
  require_positive_mass(h.beta, "beta");
  require_positive_mass(h.eta, "eta");
  const bool eta_changed = h.eta != hyper_.eta;
  hyper_ = h;
  if (eta_changed) {
    for (std::size_t x = 0; x < n_interests_; ++x) {
      for (std::size_t z = 0; z < n_topics_; ++z) refresh_inverse(x, z);
    }
  }
}

void ItmState::assign(std::size_t i, std::uint32_t topic, std::uint32_t interest) {
  if (i >= n_tuples()) throw ValidationError("tuple index out of range");
  if (topic >= n_topics_ || interest >= n_interests_) throw ValidationError("label out of range");
  add(i, -1);
  refresh_inverse(interests_[i], topics_[i]);
  topics_[i] = topic;
  interests_[i] = interest;
  add(i, +1);
  refresh_inverse(interest, topic);
}

std::vector<double> conditional_topic_distribution(const ItmState& state, std::size_t i) {
  if (i >= state.n_tuples()) throw ValidationError("tuple index out of range");
  const Triple& tr = state.corpus().triples()[i];
  const auto& h = state.hyperparameters();
  const std::size_t nz = state.n_topics();
  const double nt = static_cast<double>(state.corpus().n_tags());
  const std::uint32_t zi = state.topics()[i];
  const std::uint32_t xi = state.interests()[i];
  const double left_denominator = state.resource_total(tr.resource) + h.alpha - 1.0;

  std::vector<double> p(nz);
  double total = 0.0;
  for (std::size_t k = 0; k < nz; ++k) {
    const int self = k == zi ? 1 : 0;
    const double n_rk = state.resource_topic(tr.resource, k) - self;
    const double n_kxt = state.tag_count(xi, k, tr.tag) - self;
    const double n_kx = state.interest_topic(xi, k) - self;
    p[k] = (n_rk + h.alpha / nz) / left_denominator * (n_kxt + h.eta / nt) / (n_kx + h.eta);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> conditional_interest_distribution(const ItmState& state, std::size_t i) {
  if (i >= state.n_tuples()) throw ValidationError("tuple index out of range");
  const Triple& tr = state.corpus().triples()[i];
  const auto& h = state.hyperparameters();
  const std::size_t nx = state.n_interests();
  const double nt = static_cast<double>(state.corpus().n_tags());
  const std::uint32_t zi = state.topics()[i];
  const std::uint32_t xi = state.interests()[i];
  const double left_denominator = state.user_total(tr.user) + h.beta - 1.0;

  std::vector<double> p(nx);
  double total = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    const int self = j == xi ? 1 : 0;
    const double n_uj = state.user_interest(tr.user, j) - self;
    const double n_jzt = state.tag_count(j, zi, tr.tag) - self;
    const double n_jz = state.interest_topic(j, zi) - self;
    p[j] = (n_uj + h.beta / nx) / left_denominator * (n_jzt + h.eta / nt) / (n_jz + h.eta);
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

void gibbs_sweep(ItmState& s) {
  const auto& triples = s.corpus_->triples();
  const std::size_t nz = s.n_topics_;
  const std::size_t nx = s.n_interests_;
  const double topic_prior = s.hyper_.alpha / static_cast<double>(nz);
  const double interest_prior = s.hyper_.beta / static_cast<double>(nx);
  const double tag_prior = s.hyper_.eta / static_cast<double>(s.n_tags_);
  double* w = s.scratch_.data();

  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& tr = triples[i];
    s.add(i, -1);
    s.refresh_inverse(s.interests_[i], s.topics_[i]);

    const std::uint32_t x = s.interests_[i];
    {
      const std::int32_t* by_resource = &s.resource_topic_[tr.resource * nz];
      const std::int32_t* by_tag = &s.tag_counts_[(tr.tag * nx + x) * nz];
      const double* inv = &s.inverse_denominator_[x * nz];
      double total = 0.0;
      for (std::size_t k = 0; k < nz; ++k) {
        w[k] = (by_resource[k] + topic_prior) * (by_tag[k] + tag_prior) * inv[k];
        total += w[k];
      }
      s.topics_[i] = static_cast<std::uint32_t>(sample_discrete(s.rng_, {w, nz}, total));
    }

    if (nx > 1) {
      const std::uint32_t z = s.topics_[i];
      const std::int32_t* by_user = &s.user_interest_[tr.user * nx];
      const std::int32_t* by_tag = &s.tag_counts_[tr.tag * nx * nz + z];
      const double* inv = &s.inverse_denominator_[z];
      double total = 0.0;
      for (std::size_t j = 0; j < nx; ++j) {
        w[j] = (by_user[j] + interest_prior) * (by_tag[j * nz] + tag_prior) * inv[j * nz];
        total += w[j];
      }
      s.interests_[i] = static_cast<std::uint32_t>(sample_discrete(s.rng_, {w, nx}, total));
    }

    s.add(i, +1);
    s.refresh_inverse(s.interests_[i], s.topics_[i]);
  }
}

double log_likelihood(const ItmState& state) {
  const auto& h = state.hyperparameters();
  const double tag_prior = h.eta / static_cast<double>(state.corpus().n_tags());
  const auto& triples = state.corpus().triples();
  double ll = 0.0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const std::size_t z = state.topics()[i];
    const std::size_t x = state.interests()[i];
    ll += std::log((state.tag_count(x, z, triples[i].tag) + tag_prior) / (state.interest_topic(x, z) + h.eta));
  }
  return ll;
}

Posterior estimate_parameters(const ItmState& state, bool with_theta) {
  const Corpus& corpus = state.corpus();
  detail::EstimateAccumulator acc(corpus.n_resources(), state.n_topics(), corpus.n_users(), state.n_interests(),
                                  corpus.n_tags(), true, with_theta);
  const std::vector<std::int32_t> resource_total = corpus.resource_totals();
  const std::vector<std::int32_t> user_total = corpus.user_totals();
  const auto& h = state.hyperparameters();
  acc.add(state.resource_topic_counts(), resource_total, h.alpha, state.user_interest_counts(), user_total, h.beta,
          state.tag_counts(), state.interest_topic_counts(), h.eta);
  return acc.finish();
}

Hyperparameters resample_hyperparameters(ItmState& state, const HyperparameterSchedule& schedule) {
  const Corpus& corpus = state.corpus();
  Hyperparameters h = state.hyperparameters();
  Rng& rng = state.rng();

  {
    const auto tables = sample_total_tables(rng, state.resource_topic_counts(), h.alpha / state.n_topics());
    const auto totals = corpus.resource_totals();
    h.alpha = resample_group_concentration(rng, h.alpha, totals, tables, schedule.prior, schedule.aux_iterations);
  }
  if (state.n_interests() > 1) {
    const auto tables = sample_total_tables(rng, state.user_interest_counts(), h.beta / state.n_interests());
    const auto totals = corpus.user_totals();
    h.beta = resample_group_concentration(rng, h.beta, totals, tables, schedule.prior, schedule.aux_iterations);
  }
  {
    const auto tables = sample_total_tables(rng, state.tag_counts(), h.eta / corpus.n_tags());
    h.eta = resample_group_concentration(rng, h.eta, state.interest_topic_counts(), tables, schedule.prior,
                                         schedule.aux_iterations);
  }
  state.set_hyperparameters(h);
  return h;
}

ItmResult train_itm(const Corpus& corpus, const ItmConfig& config, const ItmObserver& observer) {
  config.validate();
  ItmState state(corpus, config);
  const std::vector<std::int32_t> resource_total = corpus.resource_totals();
  const std::vector<std::int32_t> user_total = corpus.user_totals();
  detail::EstimateAccumulator acc(corpus.n_resources(), config.n_topics, corpus.n_users(), config.n_interests,
                                  corpus.n_tags(), true, config.estimate_theta);
  ItmResult result;
  auto& diag = result.diagnostics;
  diag.log_likelihood.reserve(config.n_iterations);
  diag.hyperparameters.reserve(config.n_iterations);

  const int averaging_start = config.n_iterations - config.averaging_window;
  for (int it = 0; it < config.n_iterations; ++it) {
    gibbs_sweep(state);
    if (config.hyper.resample && it + 1 > config.hyper.warmup) resample_hyperparameters(state, config.hyper);

    const double ll = log_likelihood(state);
    if (!std::isfinite(ll)) throw NumericalError("non-finite log-likelihood at iteration " + std::to_string(it));
    diag.log_likelihood.push_back(ll);
    diag.hyperparameters.push_back(state.hyperparameters());
    if (!diag.converged_at && diag.log_likelihood.size() > static_cast<std::size_t>(config.convergence_window) &&
        check_converged(diag.log_likelihood, config.convergence_window, config.convergence_threshold)) {
      diag.converged_at = static_cast<std::size_t>(it);
    }

    if (it >= averaging_start) {
      const auto& h = state.hyperparameters();
      acc.add(state.resource_topic_counts(), resource_total, h.alpha, state.user_interest_counts(), user_total,
              h.beta, state.tag_counts(), state.interest_topic_counts(), h.eta);
    }
    if (observer) observer(it, state);
  }

  result.posterior = acc.finish();
  result.topics.assign(state.topics().begin(), state.topics().end());
  result.interests.assign(state.interests().begin(), state.interests().end());
  return result;
}

}  // namespace itm
