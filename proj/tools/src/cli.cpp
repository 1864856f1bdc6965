#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "itm/corpus.hpp"
#include "itm/error.hpp"
#include "itm/eval.hpp"
#include "itm/format.hpp"
#include "itm/snapshot.hpp"
#include "itm/synth.hpp"
#include "manifest.hpp"
#include "runner.hpp"

namespace fs = std::filesystem;

namespace itm::cli {

namespace {

struct SynthFlags {
  std::size_t resources = 40;
  std::size_t topics = 10;
  std::size_t users = 100;
  std::size_t interests = 10;
  std::size_t tags = 100;
  double threshold = 1.5;
  int draws = 7;
  std::size_t groups = 5;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--resources", resources, "Number of resources")->capture_default_str();
    cmd->add_option("--topics", topics, "Number of true topics")->capture_default_str();
    cmd->add_option("--users", users, "Number of users")->capture_default_str();
    cmd->add_option("--interests", interests, "Number of user interests (must equal --topics)")->capture_default_str();
    cmd->add_option("--tags", tags, "Number of tags")->capture_default_str();
    cmd->add_option("--threshold", threshold, "Match threshold as a multiple of the mean match")->capture_default_str();
    cmd->add_option("--draws", draws, "Tag draws per post before dedupe")->capture_default_str();
    cmd->add_option("--groups", groups, "Resource groups sharing a topic base")->capture_default_str();
  }

  SynthConfig config() const {
    SynthConfig c;
    c.n_resources = resources;
    c.n_topics = topics;
    c.n_users = users;
    c.n_interests = interests;
    c.n_tags = tags;
    c.threshold_factor = threshold;
    c.draws_per_post = draws;
    c.resource_groups = groups;
    return c;
  }
};

struct GridFlags {
  std::vector<std::string> models{"lda10", "lda30", "itm10x3"};
  int runs = 1;
  int iters = 1000;
  int avg = 100;
  bool per_pair = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--models", models, "Model specs: ldaN, itmNxM, hdp-lda, hdpitm, hdp-lda+lda, hdpitm+itm")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--runs", runs, "Chains per cell and model")->capture_default_str();
    cmd->add_option("--iters", iters, "Sweeps per chain")->capture_default_str();
    cmd->add_option("--avg", avg, "Final sweeps averaged into phi")->capture_default_str();
    cmd->add_flag("--per-pair", per_pair, "Report the deviation averaged per resource pair");
  }
};

struct Options {
  std::uint64_t seed = 0;

  // stats
  std::string stats_input;
  std::string stats_format = "triples";
  std::string stats_out;

  // generate
  std::string gen_out;
  bool grid_default = false;
  std::vector<double> ambiguity;
  std::vector<double> variation;
  SynthFlags gen_synth;

  // train
  std::string train_input;
  std::string train_format = "triples";
  std::string train_out;
  std::string model;
  std::size_t topics = 10;
  std::size_t interests = 3;
  int iters = 1000;
  int avg = 100;
  double alpha = 1.0;
  double beta = 1.0;
  double eta = 1.0;
  bool fixed_hyper = false;
  std::size_t init_topics = 100;
  std::size_t init_interests = 20;
  std::size_t cap_topics = 400;
  std::size_t cap_interests = 80;
  int grow_iters = 100;
  int min_iters = 400;
  int max_iters = 600;
  std::string stick_rule = "remainder";

  // eval
  std::string posterior;
  std::string truth;
  std::string eval_out;
  bool per_pair = false;
  std::string seed_resource;
  std::size_t top = 100;
  std::string relevant;
  std::size_t k_max = 100;
  std::string data_dir;
  GridFlags eval_grid;

  // grid
  std::string grid_out;
  std::vector<double> values{std::begin(kDefaultGridValues), std::end(kDefaultGridValues)};
  SynthFlags grid_synth;
  GridFlags grid;
};

std::string cell_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "cell_%02zu", index);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

/// Rebuilds `corpus` over fixed vocabularies so that ids match a truth file.
Corpus align_corpus(const Corpus& corpus, const Dictionary& resources, const Dictionary& users, const Dictionary& tags) {
  std::vector<Triple> triples;
  triples.reserve(corpus.n_triples());
  const auto lookup = [](const Dictionary& dict, const std::string& name, const char* what) {
    const auto id = dict.find(name);
    if (!id) throw ValidationError(std::string("unknown ") + what + " '" + name + "' in corpus");
    return *id;
  };
  for (const Triple& t : corpus.triples()) {
    triples.push_back({lookup(resources, corpus.resources().name(t.resource), "resource"),
                       lookup(users, corpus.users().name(t.user), "user"),
                       lookup(tags, corpus.tags().name(t.tag), "tag")});
  }
  return Corpus(resources, users, tags, std::move(triples));
}

Dictionary numbered(char prefix, std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = prefix + std::to_string(i);
  return Dictionary::from_names(std::move(names));
}

/// Learned phi rows re-ordered to the truth's resource names. Resources the
/// posterior never saw get the uniform prior-mean row.
Matrix phi_for_names(const Snapshot& snap, const std::vector<std::string>& names) {
  const Matrix phi = snap.as_matrix("phi");
  auto it = snap.names.find("resources");
  if (it == snap.names.end()) {
    if (phi.rows() != names.size()) throw ValidationError("phi has " + std::to_string(phi.rows()) + " rows, truth has " + std::to_string(names.size()));
    return phi;
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < it->second.size(); ++r) index[it->second[r]] = r;
  Matrix out(names.size(), phi.cols(), 1.0 / static_cast<double>(phi.cols()));
  for (std::size_t r = 0; r < names.size(); ++r) {
    auto found = index.find(names[r]);
    if (found == index.end()) continue;
    std::copy(phi.row(found->second).begin(), phi.row(found->second).end(), out.row(r).begin());
  }
  return out;
}

struct CellData {
  double ambiguity = 0.0;
  double variation = 0.0;
  Corpus corpus;
  GroundTruth truth;
};

std::vector<DeltaRecord> evaluate_grid(const std::vector<CellData>& cells, const GridFlags& flags, std::uint64_t seed) {
  if (flags.runs < 1) throw ValidationError("--runs must be >= 1");
  std::vector<ModelSpec> specs;
  for (const auto& m : flags.models) specs.push_back(parse_model_spec(m));
  TrainSettings settings;
  settings.iterations = flags.iters;
  settings.averaging = flags.avg;

  const std::size_t per_cell = specs.size() * static_cast<std::size_t>(flags.runs);
  std::vector<DeltaRecord> records(cells.size() * per_cell);
  parallel_for(records.size(), [&](std::size_t unit) {
    const std::size_t c = unit / per_cell;
    const std::size_t m = (unit % per_cell) / static_cast<std::size_t>(flags.runs);
    const int run = static_cast<int>(unit % static_cast<std::size_t>(flags.runs));
    const std::uint64_t chain_seed = derive_seed(seed, "run", c * static_cast<std::size_t>(flags.runs) + run);
    TrainSettings s = settings;
    s.estimate_theta = false;
    const TrainOutcome outcome = train_model(cells[c].corpus, specs[m], s, chain_seed);
    records[unit] = {cells[c].ambiguity, cells[c].variation, specs[m].label, run,
                     deviation_delta(outcome.posterior.phi, cells[c].truth.phi_actual, flags.per_pair)};
  });
  return records;
}

void write_cells_csv(const fs::path& path, const std::vector<GridCell>& cells) {
  auto out = open_out(path);
  out << "cell,ambiguity,variation,posts,triples\n";
  for (const auto& c : cells) {
    out << cell_name(c.index) << ',' << format_double(c.ambiguity) << ',' << format_double(c.variation) << ','
        << c.data.posts.size() << ',' << c.data.corpus.n_triples() << '\n';
  }
}

std::vector<GridCell> generate_grid(const SynthConfig& base, const std::vector<double>& amb,
                                    const std::vector<double>& var, std::uint64_t seed) {
  std::vector<SynthConfig> configs;
  if (amb == var) {
    configs = grid_configs(base, amb, seed);
  } else {
    for (double a : amb) {
      for (double v : var) {
        SynthConfig c = base;
        c.ambiguity = a;
        c.variation = v;
        c.seed = derive_seed(seed, "cell", configs.size());
        c.validate();
        configs.push_back(c);
      }
    }
  }
  if (configs.empty()) throw ValidationError("empty parameter grid");
  std::vector<GridCell> cells(configs.size());
  parallel_for(configs.size(), [&](std::size_t i) { cells[i] = generate_cell(configs[i], i); });
  return cells;
}

class Session {
 public:
  Session(Options& o, std::ostream& out, std::string config_text, std::vector<std::string> argv)
      : o_(o), out_(out), config_(std::move(config_text)), argv_(std::move(argv)) {
    manifest_.started = utc_timestamp();
    manifest_.config = config_;
    manifest_.argv = argv_;
    manifest_.master_seed = o.seed;
  }

  void stats() {
    manifest_.command = "stats";
    const Corpus corpus = read_corpus(o_.stats_input, parse_input_format(o_.stats_format));
    const CorpusStats st = corpus_stats(corpus);
    if (o_.stats_out.empty()) {
      write_stats_csv(out_, st);
      return;
    }
    const fs::path dir(o_.stats_out);
    ensure_dir(dir);
    auto f = open_out(dir / "stats.csv");
    write_stats_csv(f, st);
    f.close();
    finish(dir, {o_.stats_input}, {"stats.csv"});
  }

  void generate() {
    manifest_.command = "generate";
    std::vector<double> amb = o_.ambiguity;
    std::vector<double> var = o_.variation;
    const std::vector<double> defaults(std::begin(kDefaultGridValues), std::end(kDefaultGridValues));
    if (o_.grid_default || amb.empty()) amb = defaults;
    if (o_.grid_default || var.empty()) var = defaults;
    const auto cells = generate_grid(o_.gen_synth.config(), amb, var, o_.seed);

    const fs::path dir(o_.gen_out);
    ensure_dir(dir);
    std::vector<fs::path> outputs;
    for (const auto& c : cells) {
      const std::string name = cell_name(c.index);
      auto posts = open_out(dir / (name + ".posts.tsv"));
      write_posts(posts, c.data.posts, c.data.corpus.resources(), c.data.corpus.users(), c.data.corpus.tags());
      posts.close();
      save_snapshot(dir / (name + ".truth.snap"), truth_snapshot(c.truth, c.config));
      outputs.push_back(name + ".posts.tsv");
      outputs.push_back(name + ".truth.snap");
    }
    write_cells_csv(dir / "cells.csv", cells);
    outputs.push_back("cells.csv");
    finish(dir, {}, outputs);
  }

  void train() {
    manifest_.command = "train";
    ModelSpec spec;
    spec.kind = parse_model_kind(o_.model);
    spec.label = o_.model;
    spec.topics = o_.topics;
    spec.interests = spec.kind == ModelKind::kLda ? 1 : o_.interests;
    TrainSettings s;
    s.iterations = o_.iters;
    s.averaging = o_.avg;
    s.resample = !o_.fixed_hyper;
    s.alpha = o_.alpha;
    s.beta = o_.beta;
    s.eta = o_.eta;
    s.init_topics = o_.init_topics;
    s.init_interests = o_.init_interests;
    s.cap_topics = o_.cap_topics;
    s.cap_interests = o_.cap_interests;
    s.grow_iterations = o_.grow_iters;
    s.min_iterations = o_.min_iters;
    s.max_iterations = o_.max_iters;
    if (o_.stick_rule == "remainder") {
      s.stick_rule = StickRule::kRemainder;
    } else if (o_.stick_rule == "standard") {
      s.stick_rule = StickRule::kStandard;
    } else {
      throw ValidationError("--stick-rule must be remainder or standard");
    }

    const Corpus corpus = read_corpus(o_.train_input, parse_input_format(o_.train_format));
    const TrainOutcome outcome = train_model(corpus, spec, s, o_.seed);

    const fs::path dir(o_.train_out);
    ensure_dir(dir);
    save_snapshot(dir / "posterior.snap", posterior_snapshot(o_.model, outcome.posterior, corpus, outcome.attributes));
    auto diag = open_out(dir / "diagnostics.csv");
    diag << outcome.diagnostics_csv;
    diag.close();
    finish(dir, {o_.train_input}, {"posterior.snap", "diagnostics.csv"});
  }

  void eval_delta() {
    manifest_.command = "eval delta";
    const Snapshot learned = load_snapshot(o_.posterior);
    const Snapshot truth = load_snapshot(o_.truth);
    const GroundTruth gt = truth_from_snapshot(truth);
    const auto& names = truth.names.at("resources");
    const Matrix phi = phi_for_names(learned, names);
    DeltaRecord rec{truth.attribute("ambiguity"), truth.attribute("variation"),
                    learned.model.empty() ? learned.kind : learned.model, 0,
                    deviation_delta(phi, gt.phi_actual, o_.per_pair)};
    const fs::path dir(o_.eval_out);
    ensure_dir(dir);
    auto f = open_out(dir / "delta.csv");
    write_delta_csv(f, {rec});
    f.close();
    finish(dir, {o_.posterior, o_.truth}, {"delta.csv"});
  }

  void eval_rank() {
    manifest_.command = "eval rank";
    const Snapshot snap = load_snapshot(o_.posterior);
    const Dictionary resources = resource_names(snap);
    const RankedList ranked = rank_by_similarity(snap.as_matrix("phi"), seed_id(resources));
    const fs::path dir(o_.eval_out);
    ensure_dir(dir);
    auto f = open_out(dir / "ranked.csv");
    write_ranked_csv(f, ranked, resources, o_.top);
    f.close();
    finish(dir, {o_.posterior}, {"ranked.csv"});
  }

  void eval_precision() {
    manifest_.command = "eval precision";
    const Snapshot snap = load_snapshot(o_.posterior);
    const Dictionary resources = resource_names(snap);
    const RankedList ranked = rank_by_similarity(snap.as_matrix("phi"), seed_id(resources));
    std::ifstream in(o_.relevant);
    if (!in) throw IoError("cannot open " + o_.relevant);
    std::set<Id> relevant;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (auto id = resources.find(line)) relevant.insert(*id);
    }
    const fs::path dir(o_.eval_out);
    ensure_dir(dir);
    auto f = open_out(dir / "precision.csv");
    write_precision_csv(f, precision_curve(ranked, relevant, o_.k_max));
    f.close();
    finish(dir, {o_.posterior, o_.relevant}, {"precision.csv"});
  }

  void eval_grid() {
    manifest_.command = "eval grid";
    const fs::path data(o_.data_dir);
    std::ifstream index(data / "cells.csv");
    if (!index) throw IoError("cannot open " + (data / "cells.csv").string());
    std::vector<CellData> cells;
    std::vector<fs::path> inputs{data / "cells.csv"};
    std::string line;
    std::getline(index, line);
    while (std::getline(index, line)) {
      if (line.empty()) continue;
      const std::string name = line.substr(0, line.find(','));
      const fs::path posts = data / (name + ".posts.tsv");
      const fs::path truth_path = data / (name + ".truth.snap");
      const Snapshot truth = load_snapshot(truth_path);
      CellData cell;
      cell.ambiguity = truth.attribute("ambiguity");
      cell.variation = truth.attribute("variation");
      cell.truth = truth_from_snapshot(truth);
      cell.corpus = align_corpus(read_corpus(posts, InputFormat::kPosts), numbered('r', cell.truth.phi_actual.rows()),
                                 numbered('u', cell.truth.psi_actual.rows()), numbered('t', cell.truth.theta_actual.cols()));
      cells.push_back(std::move(cell));
      inputs.push_back(posts);
      inputs.push_back(truth_path);
    }
    const auto records = evaluate_grid(cells, o_.eval_grid, o_.seed);
    const fs::path dir(o_.eval_out);
    ensure_dir(dir);
    auto f = open_out(dir / "delta.csv");
    write_delta_csv(f, records);
    f.close();
    finish(dir, inputs, {"delta.csv"});
  }

  void grid() {
    manifest_.command = "grid";
    const auto generated = generate_grid(o_.grid_synth.config(), o_.values, o_.values, o_.seed);
    std::vector<CellData> cells;
    for (const auto& g : generated) cells.push_back({g.ambiguity, g.variation, g.data.corpus, g.truth});
    const auto records = evaluate_grid(cells, o_.grid, o_.seed);
    const fs::path dir(o_.grid_out);
    ensure_dir(dir);
    write_cells_csv(dir / "cells.csv", generated);
    auto f = open_out(dir / "delta.csv");
    write_delta_csv(f, records);
    f.close();
    finish(dir, {}, {"cells.csv", "delta.csv"});
  }

 private:
  Dictionary resource_names(const Snapshot& snap) const {
    auto it = snap.names.find("resources");
    if (it != snap.names.end()) return Dictionary::from_names(it->second);
    return numbered('r', snap.matrix("phi").shape.at(0));
  }

  Id seed_id(const Dictionary& resources) const {
    auto id = resources.find(o_.seed_resource);
    if (!id) throw ValidationError("unknown seed resource '" + o_.seed_resource + "'");
    return *id;
  }

  void finish(const fs::path& dir, std::vector<fs::path> inputs, std::vector<fs::path> outputs) {
    manifest_.inputs = std::move(inputs);
    manifest_.outputs = std::move(outputs);
    manifest_.finished = utc_timestamp();
    write_manifest(dir, manifest_);
  }

  Options& o_;
  std::ostream& out_;
  std::string config_;
  std::vector<std::string> argv_;
  RunManifest manifest_;
};

/// Global options plus those of the subcommand that ran, in a form
/// `itm --config` reads back.
std::string replay_config(const CLI::App& app) {
  std::string active;
  const CLI::App* leaf = &app;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    active += (active.empty() ? "" : ".") + leaf->get_name();
  }
  std::istringstream all(app.config_to_str(true, false));
  std::string globals;
  std::string section_lines;
  std::string section;
  std::string line;
  while (std::getline(all, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string where = section;
    if (const auto dot = key.rfind('.'); dot != std::string::npos) {
      where += (where.empty() ? "" : ".") + key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    const std::string value = line.substr(eq + 1);
    if (where.empty()) {
      globals += key + '=' + value + '\n';
    } else if (where == active) {
      // Unset list options are dropped; an empty string does not read back as a list.
      const CLI::Option* opt = leaf->get_option_no_throw("--" + key);
      const bool empty = value == "\"\"" || value == "''";
      if (empty && opt != nullptr && opt->get_items_expected_max() > 1) continue;
      section_lines += key + '=' + value + '\n';
    }
  }
  return globals + "[" + active + "]\n" + section_lines;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Topic models over <resource, user, tag> annotations"};
  app.name("itm");
  app.set_config("--config", "", "Read options from a config file such as a run.ini written by a previous run");
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Print corpus statistics");
  stats->add_option("--input", o.stats_input, "Annotation file")->required();
  stats->add_option("--format", o.stats_format, "triples or posts")->capture_default_str();
  stats->add_option("--out", o.stats_out, "Write stats.csv and a manifest into this directory");

  auto* generate = app.add_subcommand("generate", "Generate synthetic corpora and ground truths");
  generate->add_option("--out", o.gen_out, "Output directory")->required();
  generate->add_flag("--grid-default", o.grid_default, "Use the 5x5 grid {1, 0.5, 0.1, 0.05, 0.01}");
  generate->add_option("--ambiguity", o.ambiguity, "Tag ambiguity values")->delimiter(',');
  generate->add_option("--variation", o.variation, "Interest variation values")->delimiter(',');
  o.gen_synth.add_to(generate);

  auto* train = app.add_subcommand("train", "Train a model and write a posterior snapshot");
  train->add_option("--input", o.train_input, "Annotation file")->required();
  train->add_option("--format", o.train_format, "triples or posts")->capture_default_str();
  train->add_option("--out", o.train_out, "Output directory")->required();
  train->add_option("--model", o.model, "lda, itm, hdp-lda or hdpitm")->required();
  train->add_option("--topics", o.topics, "Topics (lda, itm)")->capture_default_str();
  train->add_option("--interests", o.interests, "Interests (itm)")->capture_default_str();
  train->add_option("--iters", o.iters, "Sweeps (lda, itm)")->capture_default_str();
  train->add_option("--avg", o.avg, "Final sweeps averaged into the estimates")->capture_default_str();
  train->add_option("--alpha", o.alpha, "Initial resource-topic prior mass")->capture_default_str();
  train->add_option("--beta", o.beta, "Initial user-interest prior mass")->capture_default_str();
  train->add_option("--eta", o.eta, "Initial tag prior mass")->capture_default_str();
  train->add_flag("--fixed-hyper", o.fixed_hyper, "Do not resample hyperparameters");
  train->add_option("--init-topics", o.init_topics, "Initial topics (hdp)")->capture_default_str();
  train->add_option("--init-interests", o.init_interests, "Initial interests (hdpitm)")->capture_default_str();
  train->add_option("--cap-topics", o.cap_topics, "Topic cap during growth (hdp)")->capture_default_str();
  train->add_option("--cap-interests", o.cap_interests, "Interest cap during growth (hdpitm)")->capture_default_str();
  train->add_option("--grow-iters", o.grow_iters, "Sweeps that may create components (hdp)")->capture_default_str();
  train->add_option("--min-iters", o.min_iters, "Minimum total sweeps (hdp)")->capture_default_str();
  train->add_option("--max-iters", o.max_iters, "Maximum total sweeps (hdp)")->capture_default_str();
  train->add_option("--stick-rule", o.stick_rule, "remainder or standard (hdp)")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate posteriors");
  eval->require_subcommand(1);
  auto* delta = eval->add_subcommand("delta", "Deviation between learned and true topic distributions");
  delta->add_option("--posterior", o.posterior, "Learned snapshot (a truth snapshot is accepted too)")->required();
  delta->add_option("--truth", o.truth, "Truth snapshot")->required();
  delta->add_option("--out", o.eval_out, "Output directory")->required();
  delta->add_flag("--per-pair", o.per_pair, "Average over resource pairs instead of summing");
  auto* rank = eval->add_subcommand("rank", "Rank resources by similarity to a seed");
  rank->add_option("--posterior", o.posterior, "Snapshot")->required();
  rank->add_option("--seed-resource", o.seed_resource, "Seed resource name")->required();
  rank->add_option("--top", o.top, "Rows to write")->capture_default_str();
  rank->add_option("--out", o.eval_out, "Output directory")->required();
  auto* precision = eval->add_subcommand("precision", "Relevant hits among the top k of a ranking");
  precision->add_option("--posterior", o.posterior, "Snapshot")->required();
  precision->add_option("--seed-resource", o.seed_resource, "Seed resource name")->required();
  precision->add_option("--relevant", o.relevant, "File with one relevant resource name per line")->required();
  precision->add_option("--k", o.k_max, "Largest k")->capture_default_str();
  precision->add_option("--out", o.eval_out, "Output directory")->required();
  auto* egrid = eval->add_subcommand("grid", "Train and score models on every cell of a generated grid");
  egrid->add_option("--data", o.data_dir, "Directory written by generate")->required();
  egrid->add_option("--out", o.eval_out, "Output directory")->required();
  o.eval_grid.add_to(egrid);

  auto* grid = app.add_subcommand("grid", "Generate a grid and score models on it in one run");
  grid->add_option("--out", o.grid_out, "Output directory")->required();
  grid->add_option("--values", o.values, "Parameter values for both grid axes")->delimiter(',')->capture_default_str();
  o.grid_synth.add_to(grid);
  o.grid.add_to(grid);

  for (CLI::App* cmd : {stats, generate, train, eval, delta, rank, precision, egrid, grid}) cmd->configurable();

  std::vector<const char*> argv{"itm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp from the subcommand.
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    Session session(o, out, replay_config(app), args);
    if (stats->parsed()) {
      session.stats();
    } else if (generate->parsed()) {
      session.generate();
    } else if (train->parsed()) {
      session.train();
    } else if (delta->parsed()) {
      session.eval_delta();
    } else if (rank->parsed()) {
      session.eval_rank();
    } else if (precision->parsed()) {
      session.eval_precision();
    } else if (egrid->parsed()) {
      session.eval_grid();
    } else if (grid->parsed()) {
      session.grid();
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace itm::cli
