#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "itm/error.hpp"
#include "itm/itm.hpp"
#include "itm/lda.hpp"
#include "oracles.hpp"

namespace itm {
namespace {

ItmConfig fixed(std::size_t nz, std::size_t nx, double alpha = 1.0, double beta = 1.0, double eta = 1.0) {
  ItmConfig c;
  c.n_topics = nz;
  c.n_interests = nx;
  c.alpha = alpha;
  c.beta = beta;
  c.eta = eta;
  c.hyper.resample = false;
  return c;
}

std::vector<std::uint32_t> as_vector(std::span<const std::uint32_t> s) { return {s.begin(), s.end()}; }

double row_sum(std::span<const double> row) { return std::accumulate(row.begin(), row.end(), 0.0); }

void expect_normalised(const Posterior& p) {
  for (std::size_t r = 0; r < p.phi.rows(); ++r) EXPECT_NEAR(row_sum(p.phi.row(r)), 1.0, 1e-12);
  for (std::size_t u = 0; u < p.psi.rows(); ++u) EXPECT_NEAR(row_sum(p.psi.row(u)), 1.0, 1e-12);
  for (std::size_t x = 0; x < p.theta.dim0(); ++x) {
    for (std::size_t z = 0; z < p.theta.dim1(); ++z) EXPECT_NEAR(row_sum(p.theta.slice(x, z)), 1.0, 1e-12);
  }
  for (double v : p.phi.data()) EXPECT_GT(v, 0.0);
  for (double v : p.psi.data()) EXPECT_GT(v, 0.0);
  for (double v : p.theta.data()) EXPECT_GT(v, 0.0);
}

TEST(ItmInit, SingleTupleIsForced) {
  const Corpus c = fixture::corpus_from({{"r", "u", "t"}});
  const ItmState s(c, fixed(1, 1));
  EXPECT_EQ(as_vector(s.topics()), std::vector<std::uint32_t>{0});
  EXPECT_EQ(as_vector(s.interests()), std::vector<std::uint32_t>{0});
  EXPECT_EQ(s.resource_topic(0, 0), 1);
}

TEST(ItmInit, SameSeedSameState) {
  const auto data = fixture::small_synthetic(3);
  ItmConfig config = fixed(5, 3);
  config.seed = 77;
  const ItmState a(data.corpus, config), b(data.corpus, config);
  EXPECT_EQ(as_vector(a.topics()), as_vector(b.topics()));
  EXPECT_EQ(as_vector(a.interests()), as_vector(b.interests()));
  config.seed = 78;
  const ItmState d(data.corpus, config);
  EXPECT_NE(as_vector(a.topics()), as_vector(d.topics()));
}

TEST(ItmInit, CountsConsistentOnThousandTuples) {
  CorpusBuilder b;
  for (int i = 0; i < 1000; ++i) {
    b.add("r" + std::to_string(i % 37), "u" + std::to_string(i % 53), "t" + std::to_string((i * 7) % 61));
  }
  const Corpus c = std::move(b).build();
  const ItmState s(c, fixed(10, 4));
  EXPECT_TRUE(oracle::counts_consistent(s));
}

TEST(ItmInit, RejectsBadConfig) {
  const Corpus c = fixture::six_tuples();
  EXPECT_THROW(ItmState(c, fixed(0, 1)), ValidationError);
  EXPECT_THROW(ItmState(c, fixed(1, 0)), ValidationError);
  EXPECT_THROW(ItmState(c, fixed(2, 2, -1.0)), ValidationError);
  ItmConfig config = fixed(2, 2);
  config.averaging_window = config.n_iterations + 1;
  EXPECT_THROW(config.validate(), ValidationError);
  EXPECT_THROW(ItmState(c, fixed(2, 2), {0, 0, 0}, {0, 0, 0}), ValidationError);
  EXPECT_THROW(ItmState(c, fixed(2, 2), {0, 0, 0, 0, 0, 5}, {0, 0, 0, 0, 0, 0}), ValidationError);
}

TEST(ItmConditional, SingleTupleIsUniform) {
  const Corpus c = fixture::corpus_from({{"r", "u", "t"}});
  for (std::size_t n : {1u, 2u, 5u}) {
    const ItmState s(c, fixed(n, n + 1, 0.7, 1.3, 2.1));
    for (double p : conditional_topic_distribution(s, 0)) EXPECT_NEAR(p, 1.0 / n, 1e-15);
    for (double p : conditional_interest_distribution(s, 0)) EXPECT_NEAR(p, 1.0 / (n + 1), 1e-15);
  }
}

TEST(ItmConditional, TwoTuplesSharingEverything) {
  // Same resource, user and tag; N_T = 1; the other tuple sits at label 0.
  // Topic weights: (1 + 1/2) / 2 * 1 = 3/4 and (1/2) / 2 * 1 = 1/4.
  const Corpus c = fixture::corpus_from({{"r", "u", "t"}, {"r", "u", "t"}});
  const ItmState s(c, fixed(2, 2), {0, 1}, {0, 1});
  const auto pz = conditional_topic_distribution(s, 1);
  const auto jz = oracle::conditional_from_joint(c, {0, 1}, {0, 1}, 2, 2, 1, 1, 1, 1, true);
  EXPECT_NEAR(pz[0], jz[0], 1e-14);
  EXPECT_NEAR(pz[0], 0.75, 1e-14);
  EXPECT_NEAR(pz[1], 0.25, 1e-14);

  const ItmState m(c, fixed(2, 2), {0, 1}, {0, 1});
  const auto px = conditional_interest_distribution(m, 1);
  const auto jx = oracle::conditional_from_joint(c, {0, 1}, {0, 1}, 2, 2, 1, 1, 1, 1, false);
  EXPECT_NEAR(px[0], jx[0], 1e-14);
  EXPECT_NEAR(px[1], jx[1], 1e-14);
}

TEST(ItmConditional, InterestMirrorOfTwoTupleCase) {
  // Interest factor (1 + 1/2) / 2 versus (1/2) / 2; both tuples on topic 0 so
  // the tag factor is (1 + 1) / (1 + 1) for interest 0 and (0 + 1) / (0 + 1).
  const Corpus c = fixture::corpus_from({{"r", "u", "t"}, {"r", "u", "t"}});
  const ItmState s(c, fixed(2, 2), {0, 0}, {0, 1});
  const auto px = conditional_interest_distribution(s, 1);
  EXPECT_NEAR(px[0], 0.75, 1e-14);
  EXPECT_NEAR(px[1], 0.25, 1e-14);
}

TEST(ItmConditional, MatchesJointRatiosOnRandomStates) {
  const Corpus c = fixture::six_tuples();
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = 0.2 + 3 * uniform01(rng), beta = 0.2 + 3 * uniform01(rng), eta = 0.2 + 3 * uniform01(rng);
    std::vector<std::uint32_t> z(6), x(6);
    for (auto& v : z) v = rng() % 3;
    for (auto& v : x) v = rng() % 2;
    const ItmState s(c, fixed(3, 2, alpha, beta, eta), z, x);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto pz = conditional_topic_distribution(s, i);
      const auto oz = oracle::conditional_from_joint(c, z, x, 3, 2, alpha, beta, eta, i, true);
      const auto px = conditional_interest_distribution(s, i);
      const auto ox = oracle::conditional_from_joint(c, z, x, 3, 2, alpha, beta, eta, i, false);
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(pz[k], oz[k], 1e-12);
      for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(px[j], ox[j], 1e-12);
      EXPECT_NEAR(row_sum(pz), 1.0, 1e-12);
      EXPECT_NEAR(row_sum(px), 1.0, 1e-12);
    }
  }
}

TEST(ItmConditional, EquivariantUnderTopicRelabelling) {
  const auto data = fixture::small_synthetic(4);
  const ItmConfig config = fixed(4, 2, 0.8, 1.1, 2.0);
  const ItmState s(data.corpus, config);
  const std::vector<std::uint32_t> perm{2, 0, 3, 1};
  std::vector<std::uint32_t> z = as_vector(s.topics());
  for (auto& v : z) v = perm[v];
  const ItmState t(data.corpus, config, z, as_vector(s.interests()));
  for (std::size_t i = 0; i < s.n_tuples(); i += 7) {
    const auto a = conditional_topic_distribution(s, i);
    const auto b = conditional_topic_distribution(t, i);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[perm[k]], 1e-14);
  }
}

TEST(ItmConditional, IndexOutOfRange) {
  const Corpus c = fixture::six_tuples();
  const ItmState s(c, fixed(2, 2));
  EXPECT_THROW(conditional_topic_distribution(s, 6), ValidationError);
  EXPECT_THROW(conditional_interest_distribution(s, 6), ValidationError);
}

TEST(ItmSweep, CountsConsistentAfterEverySweep) {
  const auto data = fixture::small_synthetic(5);
  ItmConfig config = fixed(4, 3);
  config.n_iterations = 30;
  config.averaging_window = 5;
  config.hyper.resample = true;
  config.hyper.warmup = 2;
  int checked = 0;
  train_itm(data.corpus, config, [&](int, const ItmState& s) {
    ASSERT_TRUE(oracle::counts_consistent(s));
    ++checked;
  });
  EXPECT_EQ(checked, 30);
}

TEST(ItmSweep, AssignKeepsCountsConsistent) {
  const Corpus c = fixture::six_tuples();
  ItmState s(c, fixed(3, 2));
  Rng rng(1);
  for (int step = 0; step < 200; ++step) {
    s.assign(rng() % 6, rng() % 3, rng() % 2);
    ASSERT_TRUE(oracle::counts_consistent(s));
  }
}

TEST(ItmSweep, SingleLabelIsFixedPoint) {
  const auto data = fixture::small_synthetic(6);
  ItmState s(data.corpus, fixed(1, 1));
  const double before = log_likelihood(s);
  for (int i = 0; i < 3; ++i) gibbs_sweep(s);
  for (auto z : s.topics()) EXPECT_EQ(z, 0u);
  for (auto x : s.interests()) EXPECT_EQ(x, 0u);
  EXPECT_EQ(log_likelihood(s), before);
}

TEST(ItmLikelihood, SingleTuple) {
  const Corpus one = fixture::corpus_from({{"r", "u", "t"}});
  EXPECT_EQ(log_likelihood(ItmState(one, fixed(1, 1, 1, 1, 3.0))), 0.0);

  const Corpus two_tags(Dictionary::from_names({"r"}), Dictionary::from_names({"u"}),
                        Dictionary::from_names({"t0", "t1"}), {{0, 0, 0}});
  EXPECT_NEAR(log_likelihood(ItmState(two_tags, fixed(1, 1))), std::log(0.75), 1e-15);
}

TEST(ItmLikelihood, InvariantUnderJointRelabelling) {
  const auto data = fixture::small_synthetic(7);
  const ItmConfig config = fixed(4, 3, 1.0, 1.0, 1.7);
  const ItmState s(data.corpus, config);
  std::vector<std::uint32_t> z = as_vector(s.topics()), x = as_vector(s.interests());
  for (auto& v : z) v = 3 - v;
  for (auto& v : x) v = (v + 1) % 3;
  EXPECT_EQ(log_likelihood(s), log_likelihood(ItmState(data.corpus, config, z, x)));
}

TEST(ItmEstimate, HandPluggedPhi) {
  CorpusBuilder b;
  for (int i = 0; i < 10; ++i) b.add("r", "u", "t" + std::to_string(i));
  const Corpus c = std::move(b).build();
  std::vector<std::uint32_t> z{0, 0, 0, 0, 0, 1, 2, 3, 4, 5};
  const ItmState s(c, fixed(10, 1), z, std::vector<std::uint32_t>(10, 0));
  const Posterior p = estimate_parameters(s);
  EXPECT_NEAR(p.phi(0, 0), 5.1 / 11, 1e-15);
  EXPECT_NEAR(p.phi(0, 9), 0.1 / 11, 1e-15);
}

TEST(ItmEstimate, EmptyResourceIsUniform) {
  const Corpus c(Dictionary::from_names({"used", "unused"}), Dictionary::from_names({"u"}),
                 Dictionary::from_names({"t"}), {{0, 0, 0}, {0, 0, 0}});
  const Posterior p = estimate_parameters(ItmState(c, fixed(4, 2)));
  for (std::size_t z = 0; z < 4; ++z) EXPECT_NEAR(p.phi(1, z), 0.25, 1e-15);
}

TEST(ItmEstimate, RowsSumToOne) {
  const auto data = fixture::small_synthetic(8);
  ItmState s(data.corpus, fixed(5, 3, 0.3, 2.0, 0.9));
  for (int i = 0; i < 5; ++i) gibbs_sweep(s);
  const Posterior p = estimate_parameters(s);
  EXPECT_EQ(p.theta.dim0(), 3u);
  EXPECT_EQ(p.theta.dim1(), 5u);
  expect_normalised(p);
  EXPECT_TRUE(estimate_parameters(s, false).theta.empty());
}

TEST(ItmHyper, OutputsPositive) {
  const auto data = fixture::small_synthetic(9);
  ItmState s(data.corpus, fixed(4, 3));
  for (int i = 0; i < 50; ++i) {
    gibbs_sweep(s);
    const Hyperparameters h = resample_hyperparameters(s, HyperparameterSchedule{});
    ASSERT_GT(h.alpha, 0.0);
    ASSERT_GT(h.beta, 0.0);
    ASSERT_GT(h.eta, 0.0);
    ASSERT_EQ(s.hyperparameters(), h);
    ASSERT_TRUE(oracle::counts_consistent(s));
  }
}

TEST(ItmHyper, SingleInterestLeavesBetaAlone) {
  const auto data = fixture::small_synthetic(10);
  ItmState s(data.corpus, fixed(4, 1, 1.0, 0.37, 1.0));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(resample_hyperparameters(s, HyperparameterSchedule{}).beta, 0.37);
}

TEST(ItmTrain, Deterministic) {
  const auto data = fixture::small_synthetic(11);
  ItmConfig config;
  config.n_topics = 4;
  config.n_interests = 2;
  config.n_iterations = 40;
  config.averaging_window = 10;
  config.seed = 5;
  const ItmResult a = train_itm(data.corpus, config), b = train_itm(data.corpus, config);
  EXPECT_EQ(a.posterior, b.posterior);
  EXPECT_EQ(a.diagnostics.log_likelihood, b.diagnostics.log_likelihood);
  EXPECT_EQ(a.posterior.n_samples_averaged, 10);
  expect_normalised(a.posterior);
  config.seed = 6;
  EXPECT_NE(train_itm(data.corpus, config).posterior, a.posterior);
}

TEST(ItmTrain, WindowOfOneIsTheLastEstimate) {
  const auto data = fixture::small_synthetic(12);
  ItmConfig config;
  config.n_topics = 4;
  config.n_interests = 3;
  config.n_iterations = 25;
  config.averaging_window = 1;
  config.hyper.warmup = 3;
  const ItmResult r = train_itm(data.corpus, config);
  ItmConfig at_end = config;
  const Hyperparameters& h = r.diagnostics.hyperparameters.back();
  at_end.alpha = h.alpha;
  at_end.beta = h.beta;
  at_end.eta = h.eta;
  const Posterior last = estimate_parameters(ItmState(data.corpus, at_end, r.topics, r.interests));
  ASSERT_EQ(last.phi.data().size(), r.posterior.phi.data().size());
  for (std::size_t i = 0; i < last.phi.data().size(); ++i) EXPECT_NEAR(last.phi.data()[i], r.posterior.phi.data()[i], 1e-15);
  for (std::size_t i = 0; i < last.psi.data().size(); ++i) EXPECT_NEAR(last.psi.data()[i], r.posterior.psi.data()[i], 1e-15);
  for (std::size_t i = 0; i < last.theta.data().size(); ++i) {
    EXPECT_NEAR(last.theta.data()[i], r.posterior.theta.data()[i], 1e-15);
  }
}

TEST(ItmTrain, DiagnosticsCoverEveryIteration) {
  const auto data = fixture::small_synthetic(13);
  ItmConfig config;
  config.n_topics = 3;
  config.n_interests = 2;
  config.n_iterations = 30;
  config.averaging_window = 5;
  const ItmResult r = train_itm(data.corpus, config);
  EXPECT_EQ(r.diagnostics.log_likelihood.size(), 30u);
  EXPECT_EQ(r.diagnostics.hyperparameters.size(), 30u);
  for (int i = 0; i < config.hyper.warmup; ++i) {
    EXPECT_EQ(r.diagnostics.hyperparameters[i], (Hyperparameters{1.0, 1.0, 1.0}));
  }
}

TEST(ItmTrain, SingleInterestMatchesLdaBitForBit) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto data = fixture::small_synthetic(seed);
    ItmConfig ic;
    ic.n_topics = 5;
    ic.n_interests = 1;
    ic.n_iterations = 60;
    ic.averaging_window = 20;
    ic.seed = seed * 10;
    LdaConfig lc;
    lc.n_topics = 5;
    lc.n_iterations = 60;
    lc.averaging_window = 20;
    lc.seed = seed * 10;
    const ItmResult a = train_itm(data.corpus, ic);
    const LdaResult b = train_lda(data.corpus, lc);
    EXPECT_EQ(a.topics, b.topics);
    EXPECT_EQ(a.posterior.phi, b.posterior.phi);
    EXPECT_EQ(a.posterior.theta, b.posterior.theta);
  }
}

// Empirical joint-label distribution of a long unthinned chain against the
// enumerated posterior on the six-tuple fixture.
TEST(ItmExactPosterior, LongChainTotalVariation) {
  const Corpus c = fixture::six_tuples();
  const auto exact = oracle::enumerate_itm_posterior(c, 2, 2, 1.0, 1.0, 1.0);
  ItmConfig config = fixed(2, 2);
  config.seed = 2024;
  ItmState s(c, config);
  for (int i = 0; i < 1000; ++i) gibbs_sweep(s);
  std::vector<double> hist(exact.size(), 0.0);
  const int sweeps = 2'000'000;
  for (int it = 0; it < sweeps; ++it) {
    gibbs_sweep(s);
    std::size_t code = 0;
    for (std::size_t i = 6; i-- > 0;) code = code * 4 + s.topics()[i] * 2 + s.interests()[i];
    hist[code] += 1.0;
  }
  for (double& h : hist) h /= sweeps;
  EXPECT_LT(oracle::total_variation(hist, exact), 0.05);
}

}  // namespace
}  // namespace itm
