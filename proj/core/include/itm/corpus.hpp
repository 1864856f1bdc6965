#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace itm {

using Id = std::uint32_t;

/// One annotation event: a user applied a tag to a resource.
struct Triple {
  Id resource = 0;
  Id user = 0;
  Id tag = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

/// A bookmark: one user's tag set on one resource. Tags are unique.
struct Post {
  Id resource = 0;
  Id user = 0;
  std::vector<Id> tags;

  friend bool operator==(const Post&, const Post&) = default;
};

/// Bijection between dense ids and the original identifier strings.
/// Ids are handed out in first-appearance order.
class Dictionary {
 public:
  Id intern(std::string_view name);
  std::optional<Id> find(std::string_view name) const;
  const std::string& name(Id id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  static Dictionary from_names(std::vector<std::string> names);

  friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Id> index_;
};

enum class InputFormat { kTriples, kPosts };

/// Immutable annotation corpus: the flat multiset of triples the samplers
/// sweep plus the three vocabularies.
class Corpus {
 public:
  Corpus() = default;
  Corpus(Dictionary resources, Dictionary users, Dictionary tags, std::vector<Triple> triples);

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  std::size_t n_triples() const noexcept { return triples_.size(); }
  std::size_t n_resources() const noexcept { return resources_.size(); }
  std::size_t n_users() const noexcept { return users_.size(); }
  std::size_t n_tags() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  const Dictionary& resources() const noexcept { return resources_; }
  const Dictionary& users() const noexcept { return users_; }
  const Dictionary& tags() const noexcept { return tags_; }

  /// Tuples per resource / per user (N_r, N_u).
  std::vector<int> resource_totals() const;
  std::vector<int> user_totals() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  Dictionary resources_, users_, tags_;
  std::vector<Triple> triples_;
};

/// Incrementally builds a Corpus from string records.
class CorpusBuilder {
 public:
  void add(std::string_view resource, std::string_view user, std::string_view tag);
  Corpus build() &&;

 private:
  Dictionary resources_, users_, tags_;
  std::vector<Triple> triples_;
};

/// Parses `resource<TAB>user<TAB>tag` lines (kTriples) or
/// `resource<TAB>user<TAB>tag1,tag2,...` lines (kPosts). Lines starting with
/// '#' and blank lines are skipped; repeated tags inside one post are dropped.
/// Throws ParseError on a malformed line and ValidationError on an empty corpus.
Corpus parse_triples(std::istream& in, InputFormat format);
Corpus read_corpus(const std::filesystem::path& path, InputFormat format);

InputFormat parse_input_format(std::string_view name);

/// Writes posts in post format using the corpus-independent vocabularies.
void write_posts(std::ostream& out, const std::vector<Post>& posts, const Dictionary& resources,
                 const Dictionary& users, const Dictionary& tags);

/// Expands posts into triples, one per tag, in post order.
std::vector<Triple> expand_posts(const std::vector<Post>& posts);

struct CorpusStats {
  std::size_t resources = 0;
  std::size_t users = 0;
  std::size_t tags = 0;
  std::size_t triples = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats corpus_stats(const Corpus& corpus);

/// CSV with header `resources,users,tags,triples`.
void write_stats_csv(std::ostream& out, const CorpusStats& stats);

}  // namespace itm
