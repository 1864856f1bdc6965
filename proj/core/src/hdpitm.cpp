#include "itm/hdpitm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "itm/convergence.hpp"
#include "itm/error.hpp"

namespace itm {

double HdpGlobals::topic_mass() const {
  return std::accumulate(topic_weights.begin(), topic_weights.end(), 0.0) + topic_remainder;
}

double HdpGlobals::interest_mass() const {
  return std::accumulate(interest_weights.begin(), interest_weights.end(), 0.0) + interest_remainder;
}

HdpGlobals HdpGlobals::uniform(std::size_t n_topics, std::size_t n_interests, double remainder) {
  HdpGlobals g;
  g.topic_weights.assign(n_topics, n_topics ? (1.0 - remainder) / n_topics : 0.0);
  g.topic_remainder = n_topics ? remainder : 1.0;
  g.interest_weights.assign(n_interests, n_interests ? (1.0 - remainder) / n_interests : 0.0);
  g.interest_remainder = n_interests ? remainder : 1.0;
  return g;
}

void GrowthPolicy::validate() const {
  if (initial_topics == 0 || initial_interests == 0) throw ValidationError("initial dimensions must be >= 1");
  if (max_topics < initial_topics) throw ValidationError("topic cap is below the initial number of topics");
  if (max_interests < initial_interests) {
    throw ValidationError("interest cap is below the initial number of interests");
  }
  if (grow_iterations < 0) throw ValidationError("grow iterations must be >= 0");
  if (averaging_window < 1) throw ValidationError("averaging window must be >= 1");
  if (min_iterations < averaging_window) throw ValidationError("min iterations must cover the averaging window");
  if (max_iterations < min_iterations) throw ValidationError("max iterations must be >= min iterations");
  if (ll_window < 1) throw ValidationError("likelihood window must be >= 1");
  if (ll_threshold < 0.0) throw ValidationError("likelihood threshold must be >= 0");
}

void HdpConfig::validate() const {
  policy.validate();
  if (mode == HdpMode::kHdpLda && policy.initial_interests != 1) {
    throw ValidationError("hdp-lda mode uses exactly one interest");
  }
  for (double v : {eta, gamma_topic, gamma_interest, mu_topic, mu_interest}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("HDP concentrations must be positive");
  }
  if (!(initial_remainder > 0.0 && initial_remainder < 1.0)) {
    throw ValidationError("initial unused mass must be in (0, 1)");
  }
}

// --- state ------------------------------------------------------------------

HdpState::HdpState(const Corpus& corpus, double eta, std::size_t n_topics, std::size_t n_interests,
                   Rng& init_rng)
    : corpus_(&corpus), eta_(eta), n_tags_(corpus.n_tags()) {
  const std::size_t n = corpus.n_triples();
  topics_.resize(n);
  interests_.assign(n, 0);
  if (n > 0 && n_topics == 0) throw ValidationError("need at least one topic to place tuples");
  if (n > 0 && n_interests == 0) throw ValidationError("need at least one interest to place tuples");
  std::uniform_int_distribution<std::uint32_t> pick_topic(0, static_cast<std::uint32_t>(std::max<std::size_t>(n_topics, 1) - 1));
  std::uniform_int_distribution<std::uint32_t> pick_interest(0, static_cast<std::uint32_t>(std::max<std::size_t>(n_interests, 1) - 1));
  for (std::size_t i = 0; i < n; ++i) {
    topics_[i] = pick_topic(init_rng);
    if (n_interests > 1) interests_[i] = pick_interest(init_rng);
  }
  init_tables(n_topics, n_interests);
}

HdpState::HdpState(const Corpus& corpus, double eta, std::size_t n_topics, std::size_t n_interests,
                   std::vector<std::uint32_t> topics, std::vector<std::uint32_t> interests)
    : corpus_(&corpus), eta_(eta), n_tags_(corpus.n_tags()), topics_(std::move(topics)), interests_(std::move(interests)) {
  if (topics_.size() != corpus.n_triples() || interests_.size() != corpus.n_triples()) {
    throw ValidationError("label vectors must cover every tuple");
  }
  init_tables(n_topics, n_interests);
}

void HdpState::init_tables(std::size_t n_topics, std::size_t n_interests) {
  if (!(eta_ > 0.0)) throw ValidationError("eta must be positive");
  resource_total_.assign(corpus_->n_resources(), 0);
  user_total_.assign(corpus_->n_users(), 0);
  ensure_interest_capacity(std::max<std::size_t>(n_interests, 1));
  for (std::size_t j = 0; j < n_interests; ++j) add_interest();
  for (std::size_t k = 0; k < n_topics; ++k) add_topic();
  for (std::size_t i = 0; i < topics_.size(); ++i) {
    if (topics_[i] >= n_topics || interests_[i] >= n_interests) throw ValidationError("label out of range");
    const Triple& tr = corpus_->triples()[i];
    ++resource_total_[tr.resource];
    ++user_total_[tr.user];
    add(i, +1);
  }
}

void HdpState::ensure_interest_capacity(std::size_t n) {
  if (n <= interest_capacity_) return;
  interest_capacity_ = std::max(n, interest_capacity_ * 2);
  for (auto& col : topic_columns_) {
    col.by_interest_tag.resize(interest_capacity_ * n_tags_, 0);
    col.by_interest.resize(interest_capacity_, 0);
  }
}

void HdpState::set_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw NumericalError("eta must be positive and finite");
  eta_ = eta;
}

std::size_t HdpState::add_topic() {
  TopicColumn col;
  col.id = next_topic_id_++;
  col.by_resource.assign(corpus_->n_resources(), 0);
  col.by_interest_tag.assign(interest_capacity_ * n_tags_, 0);
  col.by_interest.assign(interest_capacity_, 0);
  topic_columns_.push_back(std::move(col));
  return topic_columns_.size() - 1;
}

std::size_t HdpState::add_interest() {
  ensure_interest_capacity(interest_columns_.size() + 1);
  InterestColumn col;
  col.id = next_interest_id_++;
  col.by_user.assign(corpus_->n_users(), 0);
  interest_columns_.push_back(std::move(col));
  return interest_columns_.size() - 1;
}

void HdpState::add(std::size_t i, int delta) {
  const Triple& tr = corpus_->triples()[i];
  TopicColumn& topic = topic_columns_[topics_[i]];
  InterestColumn& interest = interest_columns_[interests_[i]];
  const std::size_t j = interests_[i];
  topic.by_resource[tr.resource] += delta;
  topic.by_interest_tag[j * n_tags_ + tr.tag] += delta;
  topic.by_interest[j] += delta;
  topic.total += delta;
  interest.by_user[tr.user] += delta;
  interest.total += delta;
}

void HdpState::assign(std::size_t i, std::uint32_t topic, std::uint32_t interest) {
  if (i >= n_tuples()) throw ValidationError("tuple index out of range");
  if (topic >= n_topics() || interest >= n_interests()) throw ValidationError("label out of range");
  add(i, -1);
  topics_[i] = topic;
  interests_[i] = interest;
  add(i, +1);
}

std::vector<std::size_t> HdpState::remove_empty_topics() {
  std::vector<std::size_t> removed;
  if (std::none_of(topic_columns_.begin(), topic_columns_.end(), [](const auto& c) { return c.total == 0; })) {
    return removed;
  }
  std::vector<std::uint32_t> remap(topic_columns_.size());
  std::vector<TopicColumn> kept;
  kept.reserve(topic_columns_.size());
  for (std::size_t k = 0; k < topic_columns_.size(); ++k) {
    if (topic_columns_[k].total == 0) {
      removed.push_back(k);
      continue;
    }
    remap[k] = static_cast<std::uint32_t>(kept.size());
    kept.push_back(std::move(topic_columns_[k]));
  }
  topic_columns_ = std::move(kept);
  for (auto& z : topics_) z = remap[z];
  return removed;
}

std::vector<std::size_t> HdpState::remove_empty_interests() {
  std::vector<std::size_t> removed;
  if (std::none_of(interest_columns_.begin(), interest_columns_.end(), [](const auto& c) { return c.total == 0; })) {
    return removed;
  }
  std::vector<std::uint32_t> remap(interest_columns_.size());
  std::vector<bool> dropped(interest_columns_.size(), false);
  std::vector<InterestColumn> kept;
  for (std::size_t j = 0; j < interest_columns_.size(); ++j) {
    if (interest_columns_[j].total == 0) {
      removed.push_back(j);
      dropped[j] = true;
      continue;
    }
    remap[j] = static_cast<std::uint32_t>(kept.size());
    kept.push_back(std::move(interest_columns_[j]));
  }
  const std::size_t old_count = interest_columns_.size();
  for (auto& col : topic_columns_) {
    std::size_t dst = 0;
    for (std::size_t j = 0; j < old_count; ++j) {
      if (dropped[j]) continue;
      if (dst != j) {
        std::copy_n(col.by_interest_tag.begin() + j * n_tags_, n_tags_, col.by_interest_tag.begin() + dst * n_tags_);
        col.by_interest[dst] = col.by_interest[j];
      }
      ++dst;
    }
    std::fill(col.by_interest_tag.begin() + dst * n_tags_, col.by_interest_tag.begin() + old_count * n_tags_, 0);
    std::fill(col.by_interest.begin() + dst, col.by_interest.begin() + old_count, 0);
  }
  interest_columns_ = std::move(kept);
  for (auto& x : interests_) x = remap[x];
  return removed;
}

// --- conditionals -------------------------------------------------------------

std::vector<double> hdp_topic_conditional(const HdpState& state, const HdpGlobals& globals, std::size_t i,
                                          bool allow_new) {
  if (i >= state.n_tuples()) throw ValidationError("tuple index out of range");
  if (globals.n_topics() != state.n_topics()) throw ValidationError("globals and state disagree on k_z");
  const Triple& tr = state.corpus().triples()[i];
  const std::size_t nk = state.n_topics();
  const double nt = static_cast<double>(state.corpus().n_tags());
  const double eta = state.eta();
  const double mu = globals.mu_topic;
  const std::uint32_t zi = state.topics()[i];
  const std::uint32_t xi = state.interests()[i];
  const double denominator = state.resource_total(tr.resource) + mu - 1.0;

  std::vector<double> p(nk + 1, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    const int self = k == zi ? 1 : 0;
    const double n_rk = state.resource_topic(tr.resource, k) - self;
    const double n_kxt = state.tag_count(xi, k, tr.tag) - self;
    const double n_kx = state.interest_topic(xi, k) - self;
    p[k] = (n_rk + mu * globals.topic_weights[k]) / denominator * (n_kxt + eta / nt) / (n_kx + eta);
    total += p[k];
  }
  if (allow_new) {
    p[nk] = mu * globals.topic_remainder / denominator / nt;
    total += p[nk];
  }
  if (!(total > 0.0)) throw ValidationError("no topic has positive probability (k_z = 0 and alpha_u = 0?)");
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> hdp_interest_conditional(const HdpState& state, const HdpGlobals& globals, std::size_t i,
                                             bool allow_new) {
  if (i >= state.n_tuples()) throw ValidationError("tuple index out of range");
  if (globals.n_interests() != state.n_interests()) throw ValidationError("globals and state disagree on j_x");
  const Triple& tr = state.corpus().triples()[i];
  const std::size_t nj = state.n_interests();
  const double nt = static_cast<double>(state.corpus().n_tags());
  const double eta = state.eta();
  const double mu = globals.mu_interest;
  const std::uint32_t zi = state.topics()[i];
  const std::uint32_t xi = state.interests()[i];
  const double denominator = state.user_total(tr.user) + mu - 1.0;

  std::vector<double> p(nj + 1, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < nj; ++j) {
    const int self = j == xi ? 1 : 0;
    const double n_uj = state.user_interest(tr.user, j) - self;
    const double n_jzt = state.tag_count(j, zi, tr.tag) - self;
    const double n_jz = state.interest_topic(j, zi) - self;
    p[j] = (n_uj + mu * globals.interest_weights[j]) / denominator * (n_jzt + eta / nt) / (n_jz + eta);
    total += p[j];
  }
  if (allow_new) {
    p[nj] = mu * globals.interest_remainder / denominator / nt;
    total += p[nj];
  }
  if (!(total > 0.0)) throw ValidationError("no interest has positive probability (j_x = 0 and beta_u = 0?)");
  for (double& v : p) v /= total;
  return p;
}

// --- global weights -----------------------------------------------------------

void instantiate_topic_with(HdpGlobals& globals, double a) {
  const double share = a * globals.topic_remainder;
  globals.topic_weights.push_back(share);
  globals.topic_remainder -= share;
  if (globals.topic_remainder < 0.0) globals.topic_remainder = 0.0;
}

void instantiate_interest_with(HdpGlobals& globals, double a) {
  const double share = a * globals.interest_remainder;
  globals.interest_weights.push_back(share);
  globals.interest_remainder -= share;
  if (globals.interest_remainder < 0.0) globals.interest_remainder = 0.0;
}

double instantiate_topic(HdpGlobals& globals, Rng& rng, StickRule rule) {
  const double b = rule == StickRule::kRemainder ? globals.topic_remainder : globals.gamma_topic;
  const double a = b > 0.0 ? sample_beta(rng, 1.0, b) : 1.0;
  instantiate_topic_with(globals, a);
  return a;
}

double instantiate_interest(HdpGlobals& globals, Rng& rng, StickRule rule) {
  const double b = rule == StickRule::kRemainder ? globals.interest_remainder : globals.gamma_interest;
  const double a = b > 0.0 ? sample_beta(rng, 1.0, b) : 1.0;
  instantiate_interest_with(globals, a);
  return a;
}

namespace {

// Draws (w_1..w_K, w_u) ~ Dirichlet(m_1..m_K, gamma); empty components get 0.
void redraw_weights(Rng& rng, std::span<const std::int64_t> tables, double gamma, std::vector<double>& weights,
                    double& remainder) {
  std::vector<double> params;
  params.reserve(tables.size() + 1);
  for (auto m : tables) {
    if (m > 0) params.push_back(static_cast<double>(m));
  }
  params.push_back(gamma);
  const std::vector<double> draw = sample_dirichlet(rng, params);
  std::size_t next = 0;
  for (std::size_t k = 0; k < tables.size(); ++k) weights[k] = tables[k] > 0 ? draw[next++] : 0.0;
  remainder = draw.back();
}

}  // namespace

void resample_globals(const HdpState& state, HdpGlobals& globals, Rng& rng, GammaPrior prior, HdpMode mode,
                      int aux_iterations) {
  if (globals.n_topics() != state.n_topics()) throw ValidationError("globals and state disagree on k_z");
  const Corpus& corpus = state.corpus();

  {
    std::vector<std::int64_t> tables(state.n_topics(), 0);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < state.n_topics(); ++k) {
      const double weight = globals.mu_topic * globals.topic_weights[k];
      for (Id r = 0; r < corpus.n_resources(); ++r) {
        const int n = state.resource_topic(r, k);
        if (n > 0) tables[k] += sample_table_count(rng, n, weight);
      }
      total += tables[k];
    }
    redraw_weights(rng, tables, globals.gamma_topic, globals.topic_weights, globals.topic_remainder);
    const auto occupied = std::count_if(tables.begin(), tables.end(), [](auto m) { return m > 0; });
    globals.gamma_topic = resample_dp_concentration(rng, globals.gamma_topic, occupied, total, prior);
    globals.mu_topic =
        resample_group_concentration(rng, globals.mu_topic, state.resource_totals(), total, prior, aux_iterations);
  }

  if (mode == HdpMode::kHdpLda) return;
  if (globals.n_interests() != state.n_interests()) throw ValidationError("globals and state disagree on j_x");
  {
    std::vector<std::int64_t> tables(state.n_interests(), 0);
    std::int64_t total = 0;
    for (std::size_t j = 0; j < state.n_interests(); ++j) {
      const double weight = globals.mu_interest * globals.interest_weights[j];
      for (Id u = 0; u < corpus.n_users(); ++u) {
        const int n = state.user_interest(u, j);
        if (n > 0) tables[j] += sample_table_count(rng, n, weight);
      }
      total += tables[j];
    }
    redraw_weights(rng, tables, globals.gamma_interest, globals.interest_weights, globals.interest_remainder);
    const auto occupied = std::count_if(tables.begin(), tables.end(), [](auto m) { return m > 0; });
    globals.gamma_interest = resample_dp_concentration(rng, globals.gamma_interest, occupied, total, prior);
    globals.mu_interest =
        resample_group_concentration(rng, globals.mu_interest, state.user_totals(), total, prior, aux_iterations);
  }
}

double resample_eta(HdpState& state, Rng& rng, GammaPrior prior, int aux_iterations) {
  const std::size_t nt = state.corpus().n_tags();
  const double weight = state.eta() / static_cast<double>(nt);
  std::vector<std::int32_t> group_sizes;
  group_sizes.reserve(state.n_topics() * state.n_interests());
  std::vector<std::int32_t> counts(nt);
  std::int64_t tables = 0;
  for (std::size_t k = 0; k < state.n_topics(); ++k) {
    for (std::size_t j = 0; j < state.n_interests(); ++j) {
      group_sizes.push_back(state.interest_topic(j, k));
      for (Id t = 0; t < nt; ++t) counts[t] = state.tag_count(j, k, t);
      tables += sample_total_tables(rng, counts, weight);
    }
  }
  state.set_eta(resample_group_concentration(rng, state.eta(), group_sizes, tables, prior, aux_iterations));
  return state.eta();
}

void prune_empty(HdpState& state, HdpGlobals& globals) {
  const auto removed_topics = state.remove_empty_topics();
  for (auto it = removed_topics.rbegin(); it != removed_topics.rend(); ++it) {
    globals.topic_remainder += globals.topic_weights[*it];
    globals.topic_weights.erase(globals.topic_weights.begin() + static_cast<std::ptrdiff_t>(*it));
  }
  const auto removed_interests = state.remove_empty_interests();
  for (auto it = removed_interests.rbegin(); it != removed_interests.rend(); ++it) {
    globals.interest_remainder += globals.interest_weights[*it];
    globals.interest_weights.erase(globals.interest_weights.begin() + static_cast<std::ptrdiff_t>(*it));
  }
}

// --- sweep --------------------------------------------------------------------

struct HdpSweeper {
  static void run(HdpState& s, HdpGlobals& g, Rng& rng, SweepControl& c) {
    if (g.n_topics() != s.n_topics() || g.n_interests() != s.n_interests()) {
      throw ValidationError("globals and state disagree on dimensions");
    }
    const auto& triples = s.corpus_->triples();
    const std::size_t nt = s.n_tags_;
    const double tag_prior = s.eta_ / static_cast<double>(nt);
    const double eta = s.eta_;
    std::vector<double> w;

    for (std::size_t i = 0; i < triples.size(); ++i) {
      const Triple& tr = triples[i];
      s.add(i, -1);

      // topic
      {
        const std::size_t x = s.interests_[i];
        const std::size_t nk = s.topic_columns_.size();
        w.assign(nk + 1, 0.0);
        double used = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
          const auto& col = s.topic_columns_[k];
          w[k] = (col.by_resource[tr.resource] + g.mu_topic * g.topic_weights[k]) *
                 (col.by_interest_tag[x * nt + tr.tag] + tag_prior) / (col.by_interest[x] + eta);
          used += w[k];
        }
        if (c.allow_new) w[nk] = g.mu_topic * g.topic_remainder / static_cast<double>(nt);
        std::size_t k = sample_discrete(rng, w, used + w[nk]);
        if (k == nk) {
          if (nk >= c.max_topics) {
            c.cap_hit = true;
            c.allow_new = false;
            k = sample_discrete(rng, std::span<const double>(w).first(nk), used);
          } else {
            k = s.add_topic();
            instantiate_topic(g, rng, c.stick_rule);
            ++c.topics_created;
          }
        }
        s.topics_[i] = static_cast<std::uint32_t>(k);
      }

      // interest
      if (c.mode == HdpMode::kHdpItm) {
        const std::size_t nj = s.interest_columns_.size();
        w.assign(nj + 1, 0.0);
        double used = 0.0;
        {
          const auto& topic = s.topic_columns_[s.topics_[i]];
          for (std::size_t j = 0; j < nj; ++j) {
            w[j] = (s.interest_columns_[j].by_user[tr.user] + g.mu_interest * g.interest_weights[j]) *
                   (topic.by_interest_tag[j * nt + tr.tag] + tag_prior) / (topic.by_interest[j] + eta);
            used += w[j];
          }
        }
        if (c.allow_new) w[nj] = g.mu_interest * g.interest_remainder / static_cast<double>(nt);
        std::size_t j = sample_discrete(rng, w, used + w[nj]);
        if (j == nj) {
          if (nj >= c.max_interests) {
            c.cap_hit = true;
            c.allow_new = false;
            j = sample_discrete(rng, std::span<const double>(w).first(nj), used);
          } else {
            j = s.add_interest();
            instantiate_interest(g, rng, c.stick_rule);
            ++c.interests_created;
          }
        }
        s.interests_[i] = static_cast<std::uint32_t>(j);
      }

      s.add(i, +1);
    }
  }
};

void hdp_sweep(HdpState& state, HdpGlobals& globals, Rng& rng, SweepControl& control) {
  HdpSweeper::run(state, globals, rng, control);
}

double hdp_log_likelihood(const HdpState& state) {
  const double eta = state.eta();
  const double tag_prior = eta / static_cast<double>(state.corpus().n_tags());
  const auto& triples = state.corpus().triples();
  double ll = 0.0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const std::size_t k = state.topics()[i];
    const std::size_t j = state.interests()[i];
    ll += std::log((state.tag_count(j, k, triples[i].tag) + tag_prior) / (state.interest_topic(j, k) + eta));
  }
  return ll;
}

Posterior hdp_estimate_parameters(const HdpState& state, const HdpGlobals& globals, bool with_theta) {
  const Corpus& corpus = state.corpus();
  const std::size_t nk = state.n_topics();
  const std::size_t nj = state.n_interests();
  Posterior out;
  out.phi = Matrix(corpus.n_resources(), nk + 1);
  for (Id r = 0; r < corpus.n_resources(); ++r) {
    const double inv = 1.0 / (state.resource_total(r) + globals.mu_topic);
    for (std::size_t k = 0; k < nk; ++k) {
      out.phi(r, k) = (state.resource_topic(r, k) + globals.mu_topic * globals.topic_weights[k]) * inv;
    }
    out.phi(r, nk) = globals.mu_topic * globals.topic_remainder * inv;
  }
  out.psi = Matrix(corpus.n_users(), nj + 1);
  for (Id u = 0; u < corpus.n_users(); ++u) {
    const double inv = 1.0 / (state.user_total(u) + globals.mu_interest);
    for (std::size_t j = 0; j < nj; ++j) {
      out.psi(u, j) = (state.user_interest(u, j) + globals.mu_interest * globals.interest_weights[j]) * inv;
    }
    out.psi(u, nj) = globals.mu_interest * globals.interest_remainder * inv;
  }
  if (with_theta) {
    const double nt = static_cast<double>(corpus.n_tags());
    out.theta = Tensor3(nj, nk, corpus.n_tags());
    for (std::size_t j = 0; j < nj; ++j) {
      for (std::size_t k = 0; k < nk; ++k) {
        const double inv = 1.0 / (state.interest_topic(j, k) + state.eta());
        for (Id t = 0; t < corpus.n_tags(); ++t) out.theta(j, k, t) = (state.tag_count(j, k, t) + state.eta() / nt) * inv;
      }
    }
  }
  out.n_samples_averaged = 1;
  return out;
}

// --- training -----------------------------------------------------------------

namespace {

// Averages estimates whose components come and go, keyed by component id.
class IdKeyedAccumulator {
 public:
  IdKeyedAccumulator(std::size_t n_resources, std::size_t n_users, std::size_t n_tags, bool with_theta)
      : n_resources_(n_resources),
        n_users_(n_users),
        n_tags_(n_tags),
        with_theta_(with_theta),
        phi_rest_(n_resources, 0.0),
        psi_rest_(n_users, 0.0) {}

  void add(const HdpState& state, const HdpGlobals& globals) {
    const Posterior p = hdp_estimate_parameters(state, globals, with_theta_);
    const std::size_t nk = state.n_topics();
    const std::size_t nj = state.n_interests();
    for (std::size_t k = 0; k < nk; ++k) {
      auto& col = phi_[state.topic_id(k)];
      col.resize(n_resources_, 0.0);
      for (std::size_t r = 0; r < n_resources_; ++r) col[r] += p.phi(r, k);
    }
    for (std::size_t r = 0; r < n_resources_; ++r) phi_rest_[r] += p.phi(r, nk);
    for (std::size_t j = 0; j < nj; ++j) {
      auto& col = psi_[state.interest_id(j)];
      col.resize(n_users_, 0.0);
      for (std::size_t u = 0; u < n_users_; ++u) col[u] += p.psi(u, j);
    }
    for (std::size_t u = 0; u < n_users_; ++u) psi_rest_[u] += p.psi(u, nj);
    if (with_theta_) {
      for (std::size_t j = 0; j < nj; ++j) {
        for (std::size_t k = 0; k < nk; ++k) {
          auto& slot = theta_[{state.interest_id(j), state.topic_id(k)}];
          slot.first.resize(n_tags_, 0.0);
          const auto slice = p.theta.slice(j, k);
          for (std::size_t t = 0; t < n_tags_; ++t) slot.first[t] += slice[t];
          ++slot.second;
        }
      }
    }
    ++samples_;
  }

  void finish(HdpResult& out) const {
    const double scale = 1.0 / samples_;
    Posterior& post = out.posterior;
    post.phi = Matrix(n_resources_, phi_.size() + 1);
    std::size_t c = 0;
    for (const auto& [id, col] : phi_) {
      out.topic_ids.push_back(id);
      for (std::size_t r = 0; r < n_resources_; ++r) post.phi(r, c) = col[r] * scale;
      ++c;
    }
    for (std::size_t r = 0; r < n_resources_; ++r) post.phi(r, c) = phi_rest_[r] * scale;

    post.psi = Matrix(n_users_, psi_.size() + 1);
    c = 0;
    for (const auto& [id, col] : psi_) {
      out.interest_ids.push_back(id);
      for (std::size_t u = 0; u < n_users_; ++u) post.psi(u, c) = col[u] * scale;
      ++c;
    }
    for (std::size_t u = 0; u < n_users_; ++u) post.psi(u, c) = psi_rest_[u] * scale;

    if (with_theta_) {
      post.theta = Tensor3(out.interest_ids.size(), out.topic_ids.size(), n_tags_);
      const double uniform = 1.0 / static_cast<double>(n_tags_);
      for (std::size_t j = 0; j < out.interest_ids.size(); ++j) {
        for (std::size_t k = 0; k < out.topic_ids.size(); ++k) {
          auto it = theta_.find({out.interest_ids[j], out.topic_ids[k]});
          for (std::size_t t = 0; t < n_tags_; ++t) {
            // Iterations in which the pair did not exist contribute the prior-only 1/N_T.
            const double sum = it == theta_.end() ? 0.0 : it->second.first[t];
            const int present = it == theta_.end() ? 0 : it->second.second;
            post.theta(j, k, t) = (sum + (samples_ - present) * uniform) * scale;
          }
        }
      }
    }
    post.n_samples_averaged = samples_;
  }

 private:
  std::size_t n_resources_, n_users_, n_tags_;
  bool with_theta_;
  std::map<std::uint64_t, std::vector<double>> phi_;
  std::map<std::uint64_t, std::vector<double>> psi_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::vector<double>, int>> theta_;
  std::vector<double> phi_rest_, psi_rest_;
  int samples_ = 0;
};

}  // namespace

HdpResult train_two_phase(const Corpus& corpus, const HdpConfig& config, const HdpObserver& observer) {
  config.validate();
  if (corpus.empty()) throw ValidationError("cannot train on an empty corpus");
  const GrowthPolicy& policy = config.policy;
  const std::size_t initial_interests = config.mode == HdpMode::kHdpLda ? 1 : policy.initial_interests;

  Rng init_rng(derive_seed(config.seed, "init"));
  Rng rng(derive_seed(config.seed, "sweeps"));
  HdpState state(corpus, config.eta, policy.initial_topics, initial_interests, init_rng);
  HdpGlobals globals = HdpGlobals::uniform(policy.initial_topics, initial_interests, config.initial_remainder);
  if (config.mode == HdpMode::kHdpLda) {
    globals.interest_weights = {1.0};
    globals.interest_remainder = 0.0;
  }
  globals.gamma_topic = config.gamma_topic;
  globals.gamma_interest = config.gamma_interest;
  globals.mu_topic = config.mu_topic;
  globals.mu_interest = config.mu_interest;

  HdpResult result;
  HdpDiagnostics& diag = result.diagnostics;
  IdKeyedAccumulator acc(corpus.n_resources(), corpus.n_users(), corpus.n_tags(), config.estimate_theta);

  bool growing = policy.grow_iterations > 0;
  diag.grow_phase_end = policy.grow_iterations;
  int averaging_start = -1;
  for (int it = 0; it < policy.max_iterations; ++it) {
    if (growing && it >= policy.grow_iterations) growing = false;

    SweepControl control;
    control.allow_new = growing;
    control.max_topics = policy.max_topics;
    control.max_interests = config.mode == HdpMode::kHdpLda ? 1 : policy.max_interests;
    control.stick_rule = config.stick_rule;
    control.mode = config.mode;
    hdp_sweep(state, globals, rng, control);
    if (growing && control.cap_hit) {
      growing = false;
      diag.grow_phase_end = it;
      diag.exited_early = true;
    }

    prune_empty(state, globals);
    if (config.resample_globals) {
      resample_globals(state, globals, rng, config.concentration_prior, config.mode, config.aux_iterations);
      if (config.resample_eta) resample_eta(state, rng, config.concentration_prior, config.aux_iterations);
    }

    const double ll = hdp_log_likelihood(state);
    if (!std::isfinite(ll)) throw NumericalError("non-finite log-likelihood at iteration " + std::to_string(it));
    diag.log_likelihood.push_back(ll);
    diag.n_topics.push_back(state.n_topics());
    diag.n_interests.push_back(state.n_interests());
    HdpGlobals snapshot;
    snapshot.topic_remainder = globals.topic_remainder;
    snapshot.interest_remainder = globals.interest_remainder;
    snapshot.gamma_topic = globals.gamma_topic;
    snapshot.gamma_interest = globals.gamma_interest;
    snapshot.mu_topic = globals.mu_topic;
    snapshot.mu_interest = globals.mu_interest;
    diag.concentrations.push_back(snapshot);
    diag.eta.push_back(state.eta());
    if (observer) observer(it, state, globals);

    const int done = it + 1;
    if (averaging_start >= 0) {
      acc.add(state, globals);
      if (done - averaging_start >= policy.averaging_window) break;
      continue;
    }
    const int window = policy.averaging_window;
    const bool forced = done >= policy.max_iterations - window;
    const bool rule_fires = done >= policy.min_iterations - window && done >= policy.grow_iterations &&
                            diag.log_likelihood.size() > static_cast<std::size_t>(policy.ll_window) &&
                            check_converged(diag.log_likelihood, policy.ll_window, policy.ll_threshold);
    if (forced || rule_fires) averaging_start = done;
  }

  diag.averaging_start = averaging_start;
  diag.iterations = static_cast<int>(diag.log_likelihood.size());
  acc.finish(result);
  result.globals = globals;
  return result;
}

}  // namespace itm
