#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evemb/corpus_io.hpp"
#include "evemb/model.hpp"

namespace evemb {

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// Ratios with empty denominators are 0.
  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
  /// Tally of prediction/gold pairs; both vectors must have the same length.
  static Metrics tally(const std::vector<bool>& predicted, const std::vector<bool>& gold);

  /// "precision=%.4f recall=%.4f f1=%.4f tp=%d fp=%d fn=%d tn=%d"
  std::string format() const;
};

/// e1 precedes e2 iff its score is strictly higher. Ties predict false.
bool predict_pair(const Event& e1, const Event& e2, const ModelParams& params, Mode mode);

/// Throws std::invalid_argument on an empty pair list.
Metrics evaluate(std::span<const LabeledPair> pairs, const ModelParams& params, Mode mode);

/// Verb-pair precedence counts: counts[(a, b)] is how often predicate a
/// occurs anywhere before predicate b within one training sequence.
struct BLModel {
  std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
  std::uint64_t seed = 0;

  std::uint64_t count(const std::string& before, const std::string& after) const;
};

BLModel train_bl(std::span<const EventSequence> sequences, std::uint64_t seed);
BLModel train_bl(const Corpus& corpus, std::uint64_t seed);

/// Majority of the two precedence counts; ties and identical verbs fall to
/// a fair coin drawn from (bl.seed, draw_index), so results do not depend on
/// call order.
bool predict_bl(const BLModel& bl, const Event& e1, const Event& e2, std::uint64_t draw_index);

/// Pair i uses draw index i.
Metrics evaluate_bl(std::span<const LabeledPair> pairs, const BLModel& bl);

/// One row of the per-scenario comparison table.
struct ScenarioResult {
  std::string scenario;
  Metrics bl;
  Metrics ee_verb;
  Metrics ee;
};

/// Precision, recall and F1 blocks (BL, EE_verb, EE) in percent, one row per
/// scenario plus an "Average" row of per-scenario means.
std::string format_results_table(std::span<const ScenarioResult> rows);

}  // namespace evemb
