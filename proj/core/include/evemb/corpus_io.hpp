#pragma once

// Text formats.
//
// Corpus: a scenario starts with "#scenario <id>". Each following non-blank
// line is one event: tab-separated lemmas, predicate first, then argument
// heads. A blank line ends an event sequence; repeated blank lines are
// ignored; a new header or end of input ends the scenario.
//
//   #scenario coffee
//   go<TAB>maker
//   fill<TAB>water<TAB>maker
//
// Pairs: "<scenario>\t<event 1>\t<event 2>\t<1|0>", with the lemmas of an
// event separated by single spaces.
//
// Embeddings: "<lemma> v1 ... vd" per line, whitespace separated; d is taken
// from the first line.
//
// Model: "EEMODEL v1", "dims d h e", "vocab N", N lines "<lemma> v1 ... vd",
// "unk v1 ... vd", then blocks R, T, A, b_h, b_x, w, each a label line
// followed by one line per row. Reals are written in shortest round-trip
// form, so read_model(write_model(p)) == p bit for bit.
//
// Every parser throws evemb::ParseError carrying the offending line number.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evemb/model.hpp"

namespace evemb {

struct Corpus {
  std::map<std::string, std::vector<EventSequence>> scenarios;

  /// All sequences, scenarios in key order, file order within a scenario.
  std::vector<EventSequence> sequences() const;
  std::size_t sequence_count() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct LabeledPair {
  std::string scenario;
  Event e1;
  Event e2;
  bool gold = false;  // true iff e1 stereotypically precedes e2

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

/// Tab-separated event line. Throws ParseError(line_no, ...) on empty tokens.
Event parse_event_line(std::string_view line, std::size_t line_no);
std::string format_event_line(const Event& event);

Corpus parse_corpus(std::istream& in);
Corpus parse_corpus(std::string_view text);
void write_corpus(std::ostream& out, const Corpus& corpus);

EmbeddingTable parse_embeddings(std::istream& in);
EmbeddingTable parse_embeddings(std::string_view text);
/// Word lines only; unk is recomputed as the mean on the next parse.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

std::vector<LabeledPair> parse_pairs(std::istream& in);
std::vector<LabeledPair> parse_pairs(std::string_view text);
void write_pairs(std::ostream& out, std::span<const LabeledPair> pairs);

void write_model(std::ostream& out, const ModelParams& params);
ModelParams read_model(std::istream& in);
ModelParams read_model(std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

struct SynthConfig {
  int num_event_types = 10;     // L >= 2
  int esds_per_scenario = 30;   // >= 1
  double dropout = 0.0;         // [0, 1)
  int lexical_variants = 1;     // >= 1 predicate spellings per event type
  bool arg_determined = false;  // event types share predicates, differ by argument
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  Corpus corpus;
  std::vector<LabeledPair> pairs;  // every unordered type pair in both orientations
};

/// Scripts drawn from a latent total order over event types. Each sequence
/// keeps every type independently with probability 1 - dropout (at least one
/// survives) and spells its predicate with a seeded choice of variant.
///
/// Without arg_determined every type has its own predicate plus one
/// argument drawn once per type from a small shared pool, so arguments are
/// only weakly informative. With arg_determined the types
/// at latent positions p and L-1-p share a predicate and differ only in their
/// argument, so predicate-order statistics are symmetric and carry no signal.
SyntheticData generate_synthetic(const SynthConfig& config);

inline constexpr std::string_view kSyntheticScenario = "synthetic";

}  // namespace evemb
