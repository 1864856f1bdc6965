#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "itm/corpus.hpp"
#include "itm/error.hpp"

namespace itm {
namespace {

TEST(Corpus, SingleLine) {
  const Corpus c = fixture::parse("urlA\tu1\tjaguar\n");
  EXPECT_EQ(corpus_stats(c), (CorpusStats{1, 1, 1, 1}));
}

TEST(Corpus, PostLineExpandsToSharedPair) {
  const Corpus c = fixture::parse("urlA\tu1\tjaguar,cars\n", InputFormat::kPosts);
  ASSERT_EQ(c.n_triples(), 2u);
  EXPECT_EQ(c.triples()[0].resource, c.triples()[1].resource);
  EXPECT_EQ(c.triples()[0].user, c.triples()[1].user);
  EXPECT_NE(c.triples()[0].tag, c.triples()[1].tag);
}

TEST(Corpus, DuplicateLinesAreDistinctTuples) {
  const Corpus c = fixture::parse("urlA\tu1\tjaguar\nurlA\tu1\tjaguar\n");
  EXPECT_EQ(c.n_triples(), 2u);
  EXPECT_EQ(c.n_tags(), 1u);
}

TEST(Corpus, IdsInFirstAppearanceOrder) {
  const Corpus c = fixture::parse("b\tx\tt2\na\ty\tt1\nb\ty\tt1\n");
  EXPECT_EQ(c.resources().name(0), "b");
  EXPECT_EQ(c.resources().name(1), "a");
  EXPECT_EQ(c.tags().name(0), "t2");
  EXPECT_EQ(c.triples()[2], (Triple{0, 1, 1}));
}

TEST(Corpus, SkipsCommentsBlankLinesAndCarriageReturns) {
  const Corpus c = fixture::parse("# header\n\nr\tu\tt\r\n");
  EXPECT_EQ(c.n_triples(), 1u);
  EXPECT_EQ(c.tags().name(0), "t");
}

TEST(Corpus, NamesAreCaseSensitive) {
  const Corpus c = fixture::parse("r\tu\ttravel\nr\tu\tTravel\n");
  EXPECT_EQ(c.n_tags(), 2u);
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  try {
    fixture::parse("r\tu\tt\n# c\nr\tu\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(fixture::parse("r\tu\t\n"), ParseError);
  EXPECT_THROW(fixture::parse("r\tu\ta,,b\n", InputFormat::kPosts), ParseError);
  EXPECT_THROW(fixture::parse("\tu\tt\n"), ParseError);
}

TEST(Corpus, EmptyStreamIsAnError) {
  EXPECT_THROW(fixture::parse(""), ValidationError);
  EXPECT_THROW(fixture::parse("# only a comment\n"), ValidationError);
}

TEST(Corpus, RepeatedTagInPostKeptOnce) {
  const Corpus c = fixture::parse("r\tu\ta,b,a\n", InputFormat::kPosts);
  EXPECT_EQ(c.n_triples(), 2u);
}

TEST(Corpus, MissingFileIsIoError) {
  EXPECT_THROW(read_corpus("/nonexistent/corpus.tsv", InputFormat::kTriples), IoError);
}

TEST(Corpus, UnknownFormatName) {
  EXPECT_EQ(parse_input_format("posts"), InputFormat::kPosts);
  EXPECT_THROW(parse_input_format("csv"), ValidationError);
}

TEST(Corpus, TripleIdOutsideVocabularyRejected) {
  Dictionary d;
  d.intern("x");
  EXPECT_THROW(Corpus(d, d, d, {{0, 0, 1}}), ValidationError);
}

TEST(CorpusStats, EmptyCorpusIsAllZeros) { EXPECT_EQ(corpus_stats(Corpus{}), (CorpusStats{0, 0, 0, 0})); }

TEST(CorpusStats, HandCountedFixture) {
  const Corpus c = fixture::parse("r1\tu1\ta\nr1\tu2\tb\nr2\tu1\ta\nr2\tu3\tc\nr1\tu1\tb\n");
  EXPECT_EQ(corpus_stats(c), (CorpusStats{2, 3, 3, 5}));
  std::ostringstream out;
  write_stats_csv(out, corpus_stats(c));
  EXPECT_EQ(out.str(), "resources,users,tags,triples\n2,3,3,5\n");
}

TEST(CorpusStats, TotalsPerResourceAndUser) {
  const Corpus c = fixture::six_tuples();
  EXPECT_EQ(c.resource_totals(), (std::vector<int>{3, 3}));
  EXPECT_EQ(c.user_totals(), (std::vector<int>{3, 3}));
}

// Random post files for the property tests below.
std::vector<Post> random_posts(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<Id> res(0, 9), usr(0, 14), tag(0, 29);
  std::uniform_int_distribution<int> len(1, 6);
  std::vector<Post> posts;
  for (std::size_t i = 0; i < n; ++i) {
    Post p{res(rng), usr(rng), {}};
    const int k = len(rng);
    while (static_cast<int>(p.tags.size()) < k) {
      const Id t = tag(rng);
      if (std::find(p.tags.begin(), p.tags.end(), t) == p.tags.end()) p.tags.push_back(t);
    }
    posts.push_back(std::move(p));
  }
  return posts;
}

Dictionary numbered(char prefix, std::size_t n) {
  Dictionary d;
  for (std::size_t i = 0; i < n; ++i) d.intern(std::string(1, prefix) + std::to_string(i));
  return d;
}

TEST(CorpusProperty, PostAndTripleFormatsAgree) {
  std::mt19937_64 rng(11);
  const auto rd = numbered('r', 10), ud = numbered('u', 15), td = numbered('t', 30);
  for (int trial = 0; trial < 20; ++trial) {
    const auto posts = random_posts(rng, 50);
    std::ostringstream post_text, triple_text;
    write_posts(post_text, posts, rd, ud, td);
    for (const auto& p : posts) {
      for (Id t : p.tags) triple_text << rd.name(p.resource) << '\t' << ud.name(p.user) << '\t' << td.name(t) << '\n';
    }
    const Corpus a = fixture::parse(post_text.str(), InputFormat::kPosts);
    const Corpus b = fixture::parse(triple_text.str(), InputFormat::kTriples);
    EXPECT_EQ(a, b);

    std::size_t tag_total = 0;
    for (const auto& p : posts) tag_total += p.tags.size();
    EXPECT_EQ(a.n_triples(), tag_total);
    EXPECT_EQ(expand_posts(posts).size(), tag_total);
  }
}

TEST(CorpusProperty, InterningRoundTrip) {
  std::mt19937_64 rng(5);
  const auto posts = random_posts(rng, 200);
  std::ostringstream text;
  write_posts(text, posts, numbered('r', 10), numbered('u', 15), numbered('t', 30));
  const Corpus c = fixture::parse(text.str(), InputFormat::kPosts);
  for (const Dictionary* d : {&c.resources(), &c.users(), &c.tags()}) {
    for (Id id = 0; id < d->size(); ++id) EXPECT_EQ(d->find(d->name(id)), id);
  }
  for (const auto& t : c.triples()) {
    EXPECT_LT(t.resource, c.n_resources());
    EXPECT_LT(t.user, c.n_users());
    EXPECT_LT(t.tag, c.n_tags());
  }
}

}  // namespace
}  // namespace itm
