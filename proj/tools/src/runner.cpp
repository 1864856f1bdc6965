#include "runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>
#include <vector>

#include "itm/error.hpp"
#include "itm/format.hpp"
#include "itm/lda.hpp"

namespace itm::cli {

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::string flat_diagnostics(const TrainDiagnostics& d) {
  std::ostringstream out;
  out << "iteration,log_likelihood,alpha,beta,eta\n";
  for (std::size_t i = 0; i < d.log_likelihood.size(); ++i) {
    const auto& h = d.hyperparameters[i];
    out << i << ',' << format_double(d.log_likelihood[i]) << ',' << cell(h.alpha) << ',' << cell(h.beta) << ','
        << cell(h.eta) << '\n';
  }
  return out.str();
}

std::string hdp_diagnostics(const HdpDiagnostics& d, bool with_interests) {
  std::ostringstream out;
  out << "iteration,log_likelihood,alpha,beta,eta,n_topics,n_interests\n";
  for (std::size_t i = 0; i < d.log_likelihood.size(); ++i) {
    const auto& c = d.concentrations[i];
    out << i << ',' << format_double(d.log_likelihood[i]) << ',' << format_double(c.mu_topic) << ','
        << (with_interests ? format_double(c.mu_interest) : std::string()) << ',' << format_double(d.eta[i]) << ','
        << d.n_topics[i] << ',' << d.n_interests[i] << '\n';
  }
  return out.str();
}

}  // namespace

ModelSpec parse_model_spec(std::string_view text) {
  static const std::regex lda(R"(lda(\d+))");
  static const std::regex itm(R"(itm(\d+)x(\d+))");
  const std::string s(text);
  std::smatch m;
  ModelSpec spec;
  spec.label = s;
  if (std::regex_match(s, m, lda)) {
    spec.kind = ModelKind::kLda;
    spec.topics = std::stoul(m[1]);
    spec.interests = 1;
  } else if (std::regex_match(s, m, itm)) {
    spec.kind = ModelKind::kItm;
    spec.topics = std::stoul(m[1]);
    spec.interests = std::stoul(m[2]);
  } else if (s == "hdp-lda" || s == "hdp-lda+lda") {
    spec.kind = ModelKind::kHdpLda;
    spec.two_phase = s.ends_with("+lda");
  } else if (s == "hdpitm" || s == "hdpitm+itm") {
    spec.kind = ModelKind::kHdpItm;
    spec.two_phase = s.ends_with("+itm");
  } else {
    throw ValidationError("unknown model spec '" + s + "'");
  }
  if (spec.topics == 0 || spec.interests == 0) throw ValidationError("model dimensions must be >= 1 in '" + s + "'");
  return spec;
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLda: return "lda";
    case ModelKind::kItm: return "itm";
    case ModelKind::kHdpLda: return "hdp-lda";
    case ModelKind::kHdpItm: return "hdpitm";
  }
  return "";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lda") return ModelKind::kLda;
  if (name == "itm") return ModelKind::kItm;
  if (name == "hdp-lda") return ModelKind::kHdpLda;
  if (name == "hdpitm") return ModelKind::kHdpItm;
  throw ValidationError("unknown model '" + std::string(name) + "' (expected lda, itm, hdp-lda or hdpitm)");
}

TrainOutcome train_model(const Corpus& corpus, const ModelSpec& spec, const TrainSettings& s, std::uint64_t seed) {
  TrainOutcome out;
  HyperparameterSchedule hyper;
  hyper.resample = s.resample;

  if (spec.kind == ModelKind::kLda) {
    LdaConfig c;
    c.n_topics = spec.topics;
    c.alpha = s.alpha;
    c.eta = s.eta;
    c.n_iterations = s.iterations;
    c.averaging_window = s.averaging;
    c.seed = seed;
    c.hyper = hyper;
    c.estimate_theta = s.estimate_theta;
    LdaResult r = train_lda(corpus, c);
    out.posterior = std::move(r.posterior);
    out.diagnostics_csv = flat_diagnostics(r.diagnostics);
    const auto& h = r.diagnostics.hyperparameters.back();
    out.attributes = {{"N_Z", double(spec.topics)}, {"alpha", h.alpha}, {"eta", h.eta}, {"iterations", double(s.iterations)}};
    return out;
  }
  if (spec.kind == ModelKind::kItm) {
    ItmConfig c;
    c.n_topics = spec.topics;
    c.n_interests = spec.interests;
    c.alpha = s.alpha;
    c.beta = s.beta;
    c.eta = s.eta;
    c.n_iterations = s.iterations;
    c.averaging_window = s.averaging;
    c.seed = seed;
    c.hyper = hyper;
    c.estimate_theta = s.estimate_theta;
    ItmResult r = train_itm(corpus, c);
    out.posterior = std::move(r.posterior);
    out.diagnostics_csv = flat_diagnostics(r.diagnostics);
    const auto& h = r.diagnostics.hyperparameters.back();
    out.attributes = {{"N_Z", double(spec.topics)}, {"N_X", double(spec.interests)}, {"alpha", h.alpha},
                      {"beta", h.beta},           {"eta", h.eta},                   {"iterations", double(s.iterations)}};
    return out;
  }

  HdpConfig c;
  c.mode = spec.kind == ModelKind::kHdpLda ? HdpMode::kHdpLda : HdpMode::kHdpItm;
  c.eta = s.eta;
  c.seed = seed;
  c.stick_rule = s.stick_rule;
  c.resample_globals = s.resample;
  c.estimate_theta = s.estimate_theta;
  GrowthPolicy& p = c.policy;
  p.initial_topics = s.init_topics;
  p.initial_interests = c.mode == HdpMode::kHdpLda ? 1 : s.init_interests;
  p.max_topics = s.cap_topics;
  p.max_interests = c.mode == HdpMode::kHdpLda ? 1 : s.cap_interests;
  p.averaging_window = s.averaging;
  p.min_iterations = s.min_iterations >= 0 ? s.min_iterations : s.iterations;
  p.max_iterations = s.max_iterations >= 0 ? s.max_iterations : std::max(s.iterations, p.min_iterations);
  if (s.grow_iterations >= 0) {
    p.grow_iterations = s.grow_iterations;
  } else {
    p.grow_iterations = spec.two_phase ? p.max_iterations / 2 : p.max_iterations;
  }
  HdpResult r = train_two_phase(corpus, c);
  out.posterior = std::move(r.posterior);
  out.diagnostics_csv = hdp_diagnostics(r.diagnostics, c.mode == HdpMode::kHdpItm);
  out.attributes = {{"k_z", double(r.topic_ids.size())},
                    {"j_x", double(r.interest_ids.size())},
                    {"gamma_z", r.globals.gamma_topic},
                    {"gamma_x", r.globals.gamma_interest},
                    {"mu_z", r.globals.mu_topic},
                    {"mu_x", r.globals.mu_interest},
                    {"eta", r.diagnostics.eta.back()},
                    {"iterations", double(r.diagnostics.iterations)},
                    {"grow_phase_end", double(r.diagnostics.grow_phase_end)},
                    {"averaging_start", double(r.diagnostics.averaging_start)}};
  return out;
}

std::size_t worker_count() {
  const char* env = std::getenv("ITM_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ValidationError("ITM_WORKERS must be a positive integer");
  return static_cast<std::size_t>(n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (workers <= 1) {
    loop();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(loop);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace itm::cli
