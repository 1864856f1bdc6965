#include "itm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "itm/error.hpp"

namespace itm {

Id Dictionary::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  const Id id = static_cast<Id>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<Id> Dictionary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Dictionary Dictionary::from_names(std::vector<std::string> names) {
  Dictionary dict;
  for (auto& name : names) {
    if (dict.find(name)) throw ValidationError("duplicate dictionary entry: " + name);
    dict.intern(name);
  }
  return dict;
}

Corpus::Corpus(Dictionary resources, Dictionary users, Dictionary tags, std::vector<Triple> triples)
    : resources_(std::move(resources)),
      users_(std::move(users)),
      tags_(std::move(tags)),
      triples_(std::move(triples)) {
  for (const auto& t : triples_) {
    if (t.resource >= resources_.size() || t.user >= users_.size() || t.tag >= tags_.size()) {
      throw ValidationError("triple id outside its vocabulary");
    }
  }
}

std::vector<int> Corpus::resource_totals() const {
  std::vector<int> totals(n_resources(), 0);
  for (const auto& t : triples_) ++totals[t.resource];
  return totals;
}

std::vector<int> Corpus::user_totals() const {
  std::vector<int> totals(n_users(), 0);
  for (const auto& t : triples_) ++totals[t.user];
  return totals;
}

void CorpusBuilder::add(std::string_view resource, std::string_view user, std::string_view tag) {
  triples_.push_back({resources_.intern(resource), users_.intern(user), tags_.intern(tag)});
}

Corpus CorpusBuilder::build() && {
  return Corpus(std::move(resources_), std::move(users_), std::move(tags_), std::move(triples_));
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Corpus parse_triples(std::istream& in, InputFormat format) {
  CorpusBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> seen_tags;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;

    const auto fields = split(view, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, "empty resource or user field");

    if (format == InputFormat::kTriples) {
      if (fields[2].empty()) throw ParseError(line_no, "empty tag field");
      builder.add(fields[0], fields[1], fields[2]);
      continue;
    }

    seen_tags.clear();
    for (std::string_view tag : split(fields[2], ',')) {
      if (tag.empty()) throw ParseError(line_no, "empty tag in tag list");
      if (std::find(seen_tags.begin(), seen_tags.end(), tag) != seen_tags.end()) continue;
      seen_tags.push_back(tag);
      builder.add(fields[0], fields[1], tag);
    }
  }
  if (in.bad()) throw IoError("read failure while parsing corpus");
  Corpus corpus = std::move(builder).build();
  if (corpus.empty()) throw ValidationError("empty corpus: no annotation records found");
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return parse_triples(in, format);
}

InputFormat parse_input_format(std::string_view name) {
  if (name == "triples") return InputFormat::kTriples;
  if (name == "posts") return InputFormat::kPosts;
  throw ValidationError("unknown input format '" + std::string(name) + "' (expected triples|posts)");
}

void write_posts(std::ostream& out, const std::vector<Post>& posts, const Dictionary& resources,
                 const Dictionary& users, const Dictionary& tags) {
  for (const auto& post : posts) {
    out << resources.name(post.resource) << '\t' << users.name(post.user) << '\t';
    for (std::size_t i = 0; i < post.tags.size(); ++i) {
      if (i) out << ',';
      out << tags.name(post.tags[i]);
    }
    out << '\n';
  }
}

std::vector<Triple> expand_posts(const std::vector<Post>& posts) {
  std::vector<Triple> triples;
  for (const auto& post : posts) {
    for (Id tag : post.tags) triples.push_back({post.resource, post.user, tag});
  }
  return triples;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  return {corpus.n_resources(), corpus.n_users(), corpus.n_tags(), corpus.n_triples()};
}

void write_stats_csv(std::ostream& out, const CorpusStats& stats) {
  out << "resources,users,tags,triples\n"
      << stats.resources << ',' << stats.users << ',' << stats.tags << ',' << stats.triples << '\n';
}

}  // namespace itm
