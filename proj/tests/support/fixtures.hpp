#pragma once

#include <array>
#include <initializer_list>
#include <sstream>
#include <string>

#include "itm/corpus.hpp"
#include "itm/synth.hpp"

namespace itm::fixture {

inline Corpus corpus_from(std::initializer_list<std::array<const char*, 3>> rows) {
  CorpusBuilder b;
  for (const auto& r : rows) b.add(r[0], r[1], r[2]);
  return std::move(b).build();
}

inline Corpus parse(const std::string& text, InputFormat format = InputFormat::kTriples) {
  std::istringstream in(text);
  return parse_triples(in, format);
}

/// Six tuples over two resources, two users and three tags.
inline Corpus six_tuples() {
  return corpus_from({{"r0", "u0", "t0"},
                      {"r0", "u0", "t1"},
                      {"r0", "u1", "t0"},
                      {"r1", "u1", "t2"},
                      {"r1", "u0", "t2"},
                      {"r1", "u1", "t1"}});
}

/// A small synthetic cell, quick to train on.
inline SynthCorpus small_synthetic(std::uint64_t seed, double ambiguity = 0.5, double variation = 0.5) {
  SynthConfig c;
  c.n_resources = 12;
  c.n_users = 30;
  c.n_tags = 40;
  c.n_topics = 4;
  c.n_interests = 4;
  c.resource_groups = 3;
  c.ambiguity = ambiguity;
  c.variation = variation;
  c.seed = seed;
  return generate_corpus(generate_ground_truth(c), c);
}

}  // namespace itm::fixture
