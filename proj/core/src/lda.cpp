#include "itm/lda.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "estimate_detail.hpp"
#include "itm/convergence.hpp"
#include "itm/error.hpp"

namespace itm {

void LdaConfig::validate() const {
  ItmConfig as_itm;
  as_itm.n_topics = n_topics;
  as_itm.n_interests = 1;
  as_itm.alpha = alpha;
  as_itm.eta = eta;
  as_itm.n_iterations = n_iterations;
  as_itm.averaging_window = averaging_window;
  as_itm.convergence_window = convergence_window;
  as_itm.convergence_threshold = convergence_threshold;
  as_itm.hyper = hyper;
  as_itm.validate();
}

LdaState::LdaState(const Corpus& corpus, const LdaConfig& config) : LdaState(corpus, config, {}) {}

LdaState::LdaState(const Corpus& corpus, const LdaConfig& config, std::vector<std::uint32_t> topics)
    : corpus_(&corpus),
      n_topics_(config.n_topics),
      n_tags_(corpus.n_tags()),
      alpha_(config.alpha),
      eta_(config.eta),
      rng_(derive_seed(config.seed, "sweeps")) {
  config.validate();
  if (corpus.empty()) throw ValidationError("cannot initialise a sampler on an empty corpus");
  const std::size_t n = corpus.n_triples();
  if (topics.empty()) {
    Rng init(derive_seed(config.seed, "init"));
    std::uniform_int_distribution<std::uint32_t> pick_topic(0, static_cast<std::uint32_t>(n_topics_ - 1));
    topics.resize(n);
    for (auto& z : topics) z = pick_topic(init);
  }
  if (topics.size() != n) throw ValidationError("label vector must cover every tuple");
  topics_ = std::move(topics);

  resource_topic_.assign(corpus.n_resources() * n_topics_, 0);
  tag_counts_.assign(n_tags_ * n_topics_, 0);
  topic_total_.assign(n_topics_, 0);
  inverse_denominator_.assign(n_topics_, 0.0);
  resource_total_.assign(corpus.n_resources(), 0);
  scratch_.assign(n_topics_, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (topics_[i] >= n_topics_) throw ValidationError("label out of range");
    ++resource_total_[corpus.triples()[i].resource];
    add(i, +1);
  }
  for (std::size_t z = 0; z < n_topics_; ++z) refresh_inverse(z);
}

void LdaState::add(std::size_t i, int delta) {
  const Triple& tr = corpus_->triples()[i];
  const std::size_t z = topics_[i];
  resource_topic_[tr.resource * n_topics_ + z] += delta;
  tag_counts_[tr.tag * n_topics_ + z] += delta;
  topic_total_[z] += delta;
}

void LdaState::set_hyperparameters(double alpha, double eta) {
  if (!(alpha > 0.0) || !(eta > 0.0)) throw ValidationError("LDA hyperparameters must be positive");
  alpha_ = alpha;
  if (eta != eta_) {
    eta_ = eta;
    for (std::size_t z = 0; z < n_topics_; ++z) refresh_inverse(z);
  }
}

std::vector<double> lda_conditional(const LdaState& state, std::size_t i) {
  if (i >= state.n_tuples()) throw ValidationError("tuple index out of range");
  const Triple& tr = state.corpus().triples()[i];
  const std::size_t nz = state.n_topics();
  const double nt = static_cast<double>(state.corpus().n_tags());
  const std::uint32_t zi = state.topics()[i];
  const double left_denominator = state.resource_total(tr.resource) + state.alpha() - 1.0;

  std::vector<double> p(nz);
  double total = 0.0;
  for (std::size_t k = 0; k < nz; ++k) {
    const int self = k == zi ? 1 : 0;
    const double n_rk = state.resource_topic(tr.resource, k) - self;
    const double n_kt = state.tag_count(k, tr.tag) - self;
    const double n_k = state.topic_total(k) - self;
    p[k] = (n_rk + state.alpha() / nz) / left_denominator * (n_kt + state.eta() / nt) / (n_k + state.eta());
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

void lda_sweep(LdaState& s) {
  const auto& triples = s.corpus_->triples();
  const std::size_t nz = s.n_topics_;
  const double topic_prior = s.alpha_ / static_cast<double>(nz);
  const double tag_prior = s.eta_ / static_cast<double>(s.n_tags_);
  double* w = s.scratch_.data();

  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& tr = triples[i];
    s.add(i, -1);
    s.refresh_inverse(s.topics_[i]);

    const std::int32_t* by_resource = &s.resource_topic_[tr.resource * nz];
    const std::int32_t* by_tag = &s.tag_counts_[tr.tag * nz];
    const double* inv = s.inverse_denominator_.data();
    double total = 0.0;
    for (std::size_t k = 0; k < nz; ++k) {
      w[k] = (by_resource[k] + topic_prior) * (by_tag[k] + tag_prior) * inv[k];
      total += w[k];
    }
    s.topics_[i] = static_cast<std::uint32_t>(sample_discrete(s.rng_, {w, nz}, total));

    s.add(i, +1);
    s.refresh_inverse(s.topics_[i]);
  }
}

double lda_log_likelihood(const LdaState& state) {
  const double tag_prior = state.eta() / static_cast<double>(state.corpus().n_tags());
  const auto& triples = state.corpus().triples();
  double ll = 0.0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const std::size_t z = state.topics()[i];
    ll += std::log((state.tag_count(z, triples[i].tag) + tag_prior) / (state.topic_total(z) + state.eta()));
  }
  return ll;
}

Posterior lda_estimate_parameters(const LdaState& state, bool with_theta) {
  const Corpus& corpus = state.corpus();
  detail::EstimateAccumulator acc(corpus.n_resources(), state.n_topics(), 0, 1, corpus.n_tags(), false, with_theta);
  acc.add(state.resource_topic_counts(), state.resource_totals(), state.alpha(), {}, {}, 0.0, state.tag_counts(),
          state.topic_totals(), state.eta());
  return acc.finish();
}

Hyperparameters lda_resample_hyperparameters(LdaState& state, const HyperparameterSchedule& schedule) {
  Rng& rng = state.rng();
  double alpha = state.alpha();
  double eta = state.eta();
  {
    const auto tables = sample_total_tables(rng, state.resource_topic_counts(), alpha / state.n_topics());
    alpha = resample_group_concentration(rng, alpha, state.resource_totals(), tables, schedule.prior,
                                         schedule.aux_iterations);
  }
  {
    const auto tables = sample_total_tables(rng, state.tag_counts(), eta / state.corpus().n_tags());
    eta = resample_group_concentration(rng, eta, state.topic_totals(), tables, schedule.prior,
                                       schedule.aux_iterations);
  }
  state.set_hyperparameters(alpha, eta);
  return {alpha, std::numeric_limits<double>::quiet_NaN(), eta};
}

LdaResult train_lda(const Corpus& corpus, const LdaConfig& config, const LdaObserver& observer) {
  config.validate();
  LdaState state(corpus, config);
  detail::EstimateAccumulator acc(corpus.n_resources(), config.n_topics, 0, 1, corpus.n_tags(), false,
                                  config.estimate_theta);
  LdaResult result;
  auto& diag = result.diagnostics;
  diag.log_likelihood.reserve(config.n_iterations);
  diag.hyperparameters.reserve(config.n_iterations);

  const int averaging_start = config.n_iterations - config.averaging_window;
  for (int it = 0; it < config.n_iterations; ++it) {
    lda_sweep(state);
    if (config.hyper.resample && it + 1 > config.hyper.warmup) lda_resample_hyperparameters(state, config.hyper);

    const double ll = lda_log_likelihood(state);
    if (!std::isfinite(ll)) throw NumericalError("non-finite log-likelihood at iteration " + std::to_string(it));
    diag.log_likelihood.push_back(ll);
    diag.hyperparameters.push_back({state.alpha(), std::numeric_limits<double>::quiet_NaN(), state.eta()});
    if (!diag.converged_at && diag.log_likelihood.size() > static_cast<std::size_t>(config.convergence_window) &&
        check_converged(diag.log_likelihood, config.convergence_window, config.convergence_threshold)) {
      diag.converged_at = static_cast<std::size_t>(it);
    }

    if (it >= averaging_start) {
      acc.add(state.resource_topic_counts(), state.resource_totals(), state.alpha(), {}, {}, 0.0,
              state.tag_counts(), state.topic_totals(), state.eta());
    }
    if (observer) observer(it, state);
  }

  result.posterior = acc.finish();
  result.topics.assign(state.topics().begin(), state.topics().end());
  return result;
}

}  // namespace itm
