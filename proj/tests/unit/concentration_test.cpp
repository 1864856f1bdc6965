#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "itm/concentration.hpp"
#include "itm/itm.hpp"
#include "oracles.hpp"

namespace itm {
namespace {

TEST(Concentration, NoDataGivesThePrior) {
  Rng rng(1);
  const GammaPrior prior{2.0, 4.0};
  const std::vector<std::int32_t> empty_groups(5, 0);
  const int n = 100000;
  double s = 0.0, s2 = 0.0, d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = resample_group_concentration(rng, 3.0, empty_groups, 0, prior);
    s += c;
    s2 += c * c;
    d += resample_dp_concentration(rng, 3.0, 0, 0, prior);
  }
  EXPECT_NEAR(s / n, 0.5, 0.01);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 0.125, 0.01);
  EXPECT_NEAR(d / n, 0.5, 0.01);
}

TEST(Concentration, OutputsAlwaysPositive) {
  Rng rng(2);
  const std::vector<std::int32_t> groups{1, 50, 3, 0, 200};
  double c = 1.0, dp = 1.0;
  for (int i = 0; i < 2000; ++i) {
    // At least one table per non-empty group.
    c = resample_group_concentration(rng, c, groups, 4 + i % 40, GammaPrior{});
    dp = resample_dp_concentration(rng, dp, 1 + i % 7, 100, GammaPrior{});
    ASSERT_GT(c, 0.0);
    ASSERT_GT(dp, 0.0);
  }
}

TEST(Concentration, TotalTablesBoundedByCounts) {
  Rng rng(3);
  const std::vector<std::int32_t> counts{0, 1, 5, 0, 12};
  for (int i = 0; i < 1000; ++i) {
    const auto t = sample_total_tables(rng, counts, 0.7);
    ASSERT_GE(t, 3);
    ASSERT_LE(t, 18);
  }
}

TEST(Concentration, DpConcentrationTracksComponentCount) {
  Rng rng(4);
  double few = 0.0, many = 0.0, c1 = 1.0, c2 = 1.0;
  for (int i = 0; i < 5000; ++i) {
    c1 = resample_dp_concentration(rng, c1, 2, 1000, GammaPrior{});
    c2 = resample_dp_concentration(rng, c2, 60, 1000, GammaPrior{});
    if (i >= 500) {
      few += c1;
      many += c2;
    }
  }
  EXPECT_LT(few, many);
}

// Each topic's tag group puts 59 of 60 tuples on a single tag, so the
// tag-layer mass should be pulled well below 1.
Corpus concentrated_corpus(std::vector<std::uint32_t>& topics) {
  CorpusBuilder b;
  for (int i = 0; i < 120; ++i) {
    const int z = i % 2;
    const int tag = 2 * z + (i < 2 ? 1 : 0);
    b.add("r" + std::to_string(i % 4), "u" + std::to_string(i % 5), "t" + std::to_string(tag));
    topics.push_back(static_cast<std::uint32_t>(z));
  }
  return std::move(b).build();
}

TEST(Concentration, EtaPosteriorMatchesQuadrature) {
  std::vector<std::uint32_t> topics;
  const Corpus corpus = concentrated_corpus(topics);
  ItmConfig config;
  config.n_topics = 2;
  config.n_interests = 1;
  const ItmState base(corpus, config, topics, std::vector<std::uint32_t>(topics.size(), 0));

  std::vector<std::vector<int>> groups(2, std::vector<int>(corpus.n_tags(), 0));
  for (std::size_t i = 0; i < corpus.n_triples(); ++i) ++groups[topics[i]][corpus.triples()[i].tag];
  const double oracle = oracle::concentration_posterior_below(groups, corpus.n_tags(), 1.0, 1.0, 1.0);
  ASSERT_GE(oracle, 0.9);

  HyperparameterSchedule schedule;
  int below = 0;
  const int draws = 2000;
  for (int d = 0; d < draws; ++d) {
    // A short chain of updates forgets the starting value of 1.0.
    ItmState s = base;
    s.rng().seed(derive_seed(99, "draw", d));
    double eta = 1.0;
    for (int step = 0; step < 30; ++step) eta = resample_hyperparameters(s, schedule).eta;
    if (eta < 1.0) ++below;
  }
  const double frac = static_cast<double>(below) / draws;
  EXPECT_GE(frac, 0.9);
  EXPECT_NEAR(frac, oracle, 0.03);
}

TEST(Concentration, EtaDecreasesInNinetyPercentOfHundredDraws) {
  std::vector<std::uint32_t> topics;
  const Corpus corpus = concentrated_corpus(topics);
  ItmConfig config;
  config.n_topics = 2;
  config.n_interests = 1;
  ItmState s(corpus, config, topics, std::vector<std::uint32_t>(topics.size(), 0));
  int below = 0;
  for (int d = 0; d < 100; ++d) {
    s.set_hyperparameters({1.0, 1.0, 1.0});
    if (resample_hyperparameters(s, HyperparameterSchedule{}).eta < 1.0) ++below;
  }
  EXPECT_GE(below, 90);
}

}  // namespace
}  // namespace itm
