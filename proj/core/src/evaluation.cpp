#include "evemb/evaluation.hpp"

#include <cstdio>
#include <stdexcept>

#include "evemb/random.hpp"

namespace evemb {

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m{tp, fp, fn, tn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

Metrics Metrics::tally(const std::vector<bool>& predicted, const std::vector<bool>& gold) {
  if (predicted.size() != gold.size()) throw std::invalid_argument("prediction and gold counts differ");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i]) {
      gold[i] ? ++tp : ++fp;
    } else {
      gold[i] ? ++fn : ++tn;
    }
  }
  return from_counts(tp, fp, fn, tn);
}

std::string Metrics::format() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "precision=%.4f recall=%.4f f1=%.4f tp=%zu fp=%zu fn=%zu tn=%zu", precision,
                recall, f1, tp, fp, fn, tn);
  return buf;
}

bool predict_pair(const Event& e1, const Event& e2, const ModelParams& params, Mode mode) {
  return score_event(e1, params, mode) > score_event(e2, params, mode);
}

Metrics evaluate(std::span<const LabeledPair> pairs, const ModelParams& params, Mode mode) {
  if (pairs.empty()) throw std::invalid_argument("no evaluation pairs");
  std::vector<bool> predicted(pairs.size());
  std::vector<bool> gold(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    predicted[i] = predict_pair(pairs[i].e1, pairs[i].e2, params, mode);
    gold[i] = pairs[i].gold;
  }
  return Metrics::tally(predicted, gold);
}

std::uint64_t BLModel::count(const std::string& before, const std::string& after) const {
  const auto it = counts.find({before, after});
  return it == counts.end() ? 0 : it->second;
}

BLModel train_bl(std::span<const EventSequence> sequences, std::uint64_t seed) {
  BLModel bl;
  bl.seed = seed;
  for (const EventSequence& seq : sequences) {
    const auto& ev = seq.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      for (std::size_t j = i + 1; j < ev.size(); ++j) {
        ++bl.counts[{ev[i].predicate.str(), ev[j].predicate.str()}];
      }
    }
  }
  return bl;
}

BLModel train_bl(const Corpus& corpus, std::uint64_t seed) {
  const auto sequences = corpus.sequences();
  return train_bl(sequences, seed);
}

bool predict_bl(const BLModel& bl, const Event& e1, const Event& e2, std::uint64_t draw_index) {
  const std::string& v1 = e1.predicate.str();
  const std::string& v2 = e2.predicate.str();
  if (v1 != v2) {
    const std::uint64_t forward = bl.count(v1, v2);
    const std::uint64_t backward = bl.count(v2, v1);
    if (forward != backward) return forward > backward;
  }
  return (mix64(bl.seed ^ mix64(draw_index)) >> 63) != 0;
}

Metrics evaluate_bl(std::span<const LabeledPair> pairs, const BLModel& bl) {
  if (pairs.empty()) throw std::invalid_argument("no evaluation pairs");
  std::vector<bool> predicted(pairs.size());
  std::vector<bool> gold(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    predicted[i] = predict_bl(bl, pairs[i].e1, pairs[i].e2, i);
    gold[i] = pairs[i].gold;
  }
  return Metrics::tally(predicted, gold);
}

std::string format_results_table(std::span<const ScenarioResult> rows) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-14s | %-23s | %-23s | %-23s\n", "Scenario", "Precision (%)", "Recall (%)",
                "F1 (%)");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-14s | %7s %7s %7s | %7s %7s %7s | %7s %7s %7s\n", "", "BL", "EE_verb", "EE",
                "BL", "EE_verb", "EE", "BL", "EE_verb", "EE");
  out += buf;

  auto line = [&buf, &out](const std::string& name, const double (&v)[9]) {
    std::snprintf(buf, sizeof buf, "%-14s | %7.1f %7.1f %7.1f | %7.1f %7.1f %7.1f | %7.1f %7.1f %7.1f\n",
                  name.c_str(), v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
    out += buf;
  };

  double sum[9] = {};
  for (const ScenarioResult& r : rows) {
    const double v[9] = {100 * r.bl.precision, 100 * r.ee_verb.precision, 100 * r.ee.precision,
                         100 * r.bl.recall,    100 * r.ee_verb.recall,    100 * r.ee.recall,
                         100 * r.bl.f1,        100 * r.ee_verb.f1,        100 * r.ee.f1};
    for (int k = 0; k < 9; ++k) sum[k] += v[k];
    line(r.scenario, v);
  }
  if (!rows.empty()) {
    double avg[9];
    for (int k = 0; k < 9; ++k) avg[k] = sum[k] / static_cast<double>(rows.size());
    line("Average", avg);
  }
  return out;
}

}  // namespace evemb
