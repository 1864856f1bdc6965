#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "itm/error.hpp"
#include "itm/eval.hpp"
#include "itm/lda.hpp"
#include "oracles.hpp"

namespace itm {
namespace {

LdaConfig fixed(std::size_t nz, double alpha = 1.0, double eta = 1.0) {
  LdaConfig c;
  c.n_topics = nz;
  c.alpha = alpha;
  c.eta = eta;
  c.hyper.resample = false;
  return c;
}

TEST(LdaConditional, SingleTupleIsUniform) {
  const Corpus c = fixture::corpus_from({{"r", "u", "t"}});
  const LdaState s(c, fixed(4, 0.3, 2.0));
  for (double p : lda_conditional(s, 0)) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(LdaConditional, TwoTupleFixture) {
  const Corpus c = fixture::corpus_from({{"r", "u", "t"}, {"r", "u", "t"}});
  const LdaState s(c, fixed(2), {0, 1});
  const auto p = lda_conditional(s, 1);
  EXPECT_NEAR(p[0], 0.75, 1e-14);
  EXPECT_NEAR(p[1], 0.25, 1e-14);
  EXPECT_THROW(lda_conditional(s, 2), ValidationError);
}

TEST(LdaConditional, MatchesJointRatios) {
  const Corpus c = fixture::six_tuples();
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = 0.1 + 2 * uniform01(rng), eta = 0.1 + 2 * uniform01(rng);
    std::vector<std::uint32_t> z(6);
    for (auto& v : z) v = rng() % 3;
    const LdaState s(c, fixed(3, alpha, eta), z);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto p = lda_conditional(s, i);
      const auto o = oracle::conditional_from_joint(c, z, std::vector<std::uint32_t>(6, 0), 3, 1, alpha, 1.0, eta, i,
                                                    true);
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p[k], o[k], 1e-12);
    }
  }
}

TEST(LdaConditional, EqualsItmWithOneInterest) {
  const auto data = fixture::small_synthetic(14);
  LdaConfig lc = fixed(5, 0.6, 1.4);
  const LdaState lda(data.corpus, lc);
  ItmConfig ic;
  ic.n_topics = 5;
  ic.n_interests = 1;
  ic.alpha = 0.6;
  ic.eta = 1.4;
  const std::vector<std::uint32_t> z(lda.topics().begin(), lda.topics().end());
  const ItmState itm(data.corpus, ic, z, std::vector<std::uint32_t>(z.size(), 0));
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto a = lda_conditional(lda, i);
    const auto b = conditional_topic_distribution(itm, i);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(a[k], b[k]);
  }
  EXPECT_DOUBLE_EQ(lda_log_likelihood(lda), log_likelihood(itm));
}

TEST(LdaSweep, CountsConsistentAgainstRecount) {
  const auto data = fixture::small_synthetic(15);
  LdaConfig config = fixed(4);
  config.n_iterations = 20;
  config.averaging_window = 5;
  config.hyper.resample = true;
  config.hyper.warmup = 2;
  train_lda(data.corpus, config, [](int, const LdaState& s) {
    const auto c = oracle::recount(s.corpus(), s.topics(), std::vector<std::uint32_t>(s.n_tuples(), 0), 4, 1);
    for (Id r = 0; r < s.corpus().n_resources(); ++r) {
      int total = 0;
      for (std::size_t z = 0; z < 4; ++z) {
        ASSERT_EQ(s.resource_topic(r, z), c.resource_topic[r * 4 + z]);
        total += s.resource_topic(r, z);
      }
      ASSERT_EQ(total, s.resource_total(r));
    }
    for (std::size_t z = 0; z < 4; ++z) {
      int margin = 0;
      for (Id t = 0; t < s.corpus().n_tags(); ++t) {
        ASSERT_EQ(s.tag_count(z, t), c.tag[z * s.corpus().n_tags() + t]);
        margin += s.tag_count(z, t);
      }
      ASSERT_EQ(margin, s.topic_total(z));
    }
  });
}

TEST(LdaTrain, DeterministicAndNormalised) {
  const auto data = fixture::small_synthetic(16);
  LdaConfig config;
  config.n_topics = 4;
  config.n_iterations = 40;
  config.averaging_window = 10;
  config.seed = 9;
  const LdaResult a = train_lda(data.corpus, config), b = train_lda(data.corpus, config);
  EXPECT_EQ(a.posterior, b.posterior);
  EXPECT_TRUE(a.posterior.psi.empty());
  EXPECT_EQ(a.posterior.theta.dim0(), 1u);
  for (std::size_t r = 0; r < a.posterior.phi.rows(); ++r) {
    const auto row = a.posterior.phi.row(r);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
  for (std::size_t z = 0; z < 4; ++z) {
    const auto row = a.posterior.theta.slice(0, z);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
  for (const auto& h : a.diagnostics.hyperparameters) EXPECT_TRUE(std::isnan(h.beta));
}

TEST(LdaTrain, TenAndThirtyTopicsRunOnASyntheticCell) {
  SynthConfig sc;
  sc.seed = 4;
  const auto data = generate_corpus(generate_ground_truth(sc), sc);
  for (std::size_t k : {10u, 30u}) {
    LdaConfig config;
    config.n_topics = k;
    config.n_iterations = 30;
    config.averaging_window = 10;
    const LdaResult r = train_lda(data.corpus, config);
    EXPECT_EQ(r.posterior.phi.cols(), k);
    EXPECT_GE(deviation_delta(r.posterior.phi, generate_ground_truth(sc).phi_actual), 0.0);
  }
}

TEST(LdaExactPosterior, LongChainTotalVariation) {
  const Corpus c = fixture::six_tuples();
  const auto exact = oracle::enumerate_lda_posterior(c, 2, 1.0, 1.0);
  LdaConfig config = fixed(2);
  config.seed = 7;
  LdaState s(c, config);
  for (int i = 0; i < 1000; ++i) lda_sweep(s);
  std::vector<double> hist(exact.size(), 0.0);
  const int sweeps = 500'000;
  for (int it = 0; it < sweeps; ++it) {
    lda_sweep(s);
    std::size_t code = 0;
    for (std::size_t i = 6; i-- > 0;) code = code * 2 + s.topics()[i];
    hist[code] += 1.0;
  }
  for (double& h : hist) h /= sweeps;
  EXPECT_LT(oracle::total_variation(hist, exact), 0.02);
}

}  // namespace
}  // namespace itm
