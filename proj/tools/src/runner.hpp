#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "itm/corpus.hpp"
#include "itm/hdpitm.hpp"
#include "itm/itm.hpp"

namespace itm::cli {

enum class ModelKind { kLda, kItm, kHdpLda, kHdpItm };

struct ModelSpec {
  std::string label;
  ModelKind kind = ModelKind::kItm;
  std::size_t topics = 10;
  std::size_t interests = 3;
  bool two_phase = false;  ///< hdp-lda+lda, hdpitm+itm
};

/// "lda10", "itm10x3", "hdp-lda", "hdpitm", "hdp-lda+lda", "hdpitm+itm".
ModelSpec parse_model_spec(std::string_view text);
std::string_view model_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct TrainSettings {
  int iterations = 1000;
  int averaging = 100;
  bool resample = true;
  bool estimate_theta = true;
  double alpha = 1.0;
  double beta = 1.0;
  double eta = 1.0;
  // HDP only
  std::size_t init_topics = 10;
  std::size_t init_interests = 3;
  std::size_t cap_topics = 400;
  std::size_t cap_interests = 80;
  int grow_iterations = -1;  ///< -1: all iterations for plain HDP, half for two-phase
  int min_iterations = -1;   ///< -1: equal to iterations
  int max_iterations = -1;
  StickRule stick_rule = StickRule::kRemainder;
};

struct TrainOutcome {
  Posterior posterior;
  std::string diagnostics_csv;
  std::map<std::string, double> attributes;
};

TrainOutcome train_model(const Corpus& corpus, const ModelSpec& spec, const TrainSettings& settings,
                         std::uint64_t seed);

/// ITM_WORKERS, default 1.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. The first
/// exception thrown by any unit is rethrown after all threads finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace itm::cli
