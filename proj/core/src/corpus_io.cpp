#include "evemb/corpus_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unordered_set>

#include "evemb/error.hpp"

namespace evemb {

namespace {

constexpr std::string_view kScenarioHeader = "#scenario ";
constexpr std::string_view kModelMagic = "EEMODEL v1";

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\v' || c == '\f';
}

/// Line reader that tracks 1-based line numbers and strips a trailing CR.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::size_t number() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

std::vector<std::string_view> split_exact(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) parts.push_back(text.substr(start, i - start));
  }
  return parts;
}

Lemma make_lemma(std::string_view token, std::size_t line_no) {
  try {
    return Lemma(token);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

Event make_event(const std::vector<std::string_view>& tokens, std::size_t line_no, std::string_view what) {
  for (std::string_view t : tokens) {
    if (t.empty()) throw ParseError(line_no, "empty token in " + std::string(what));
  }
  Event ev{make_lemma(tokens.front(), line_no), {}};
  ev.args.reserve(tokens.size() - 1);
  for (std::size_t i = 1; i < tokens.size(); ++i) ev.args.push_back(make_lemma(tokens[i], line_no));
  return ev;
}

double parse_real(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError(line_no, "not a finite real number: '" + std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token, std::size_t line_no) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line_no, "not an integer: '" + std::string(token) + "'");
  }
  return value;
}

void write_row(std::ostream& out, const auto& values) {
  for (Index i = 0; i < values.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_real(values(i));
  }
}

}  // namespace

std::vector<EventSequence> Corpus::sequences() const {
  std::vector<EventSequence> all;
  all.reserve(sequence_count());
  for (const auto& [id, seqs] : scenarios) all.insert(all.end(), seqs.begin(), seqs.end());
  return all;
}

std::size_t Corpus::sequence_count() const {
  std::size_t n = 0;
  for (const auto& [id, seqs] : scenarios) n += seqs.size();
  return n;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("failed to format real");
  return std::string(buf, ptr);
}

Event parse_event_line(std::string_view line, std::size_t line_no) {
  return make_event(split_exact(line, '\t'), line_no, "event line");
}

std::string format_event_line(const Event& event) {
  std::string line = event.predicate.str();
  for (const Lemma& arg : event.args) {
    line += '\t';
    line += arg.str();
  }
  return line;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  LineReader reader(in);
  std::string line;
  std::vector<EventSequence>* scenario = nullptr;
  std::string scenario_id;
  EventSequence current;

  auto flush = [&]() {
    if (!current.events.empty()) {
      scenario->push_back(std::move(current));
      current = EventSequence{scenario_id, {}};
    }
  };

  while (reader.next(line)) {
    if (line.starts_with('#')) {
      if (!line.starts_with(kScenarioHeader)) {
        throw ParseError(reader.number(), "malformed header (expected '#scenario <id>')");
      }
      const std::string_view id = std::string_view(line).substr(kScenarioHeader.size());
      if (id.empty() || split_whitespace(id).size() != 1 || split_whitespace(id).front() != id) {
        throw ParseError(reader.number(), "malformed header: scenario id must be one non-empty token");
      }
      if (scenario != nullptr) flush();
      scenario_id = std::string(id);
      scenario = &corpus.scenarios[scenario_id];
      current = EventSequence{scenario_id, {}};
      continue;
    }
    if (is_blank(line)) {
      if (scenario != nullptr) flush();
      continue;
    }
    if (scenario == nullptr) throw ParseError(reader.number(), "event outside scenario");
    current.events.push_back(parse_event_line(line, reader.number()));
  }
  if (scenario != nullptr) flush();
  return corpus;
}

Corpus parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& [id, seqs] : corpus.scenarios) {
    out << kScenarioHeader << id << '\n';
    for (const EventSequence& seq : seqs) {
      for (const Event& ev : seq.events) out << format_event_line(ev) << '\n';
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingTable parse_embeddings(std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::vector<Lemma> words;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  Index dim = -1;

  while (reader.next(line)) {
    if (is_blank(line)) continue;
    const auto fields = split_whitespace(line);
    const auto n = static_cast<Index>(fields.size()) - 1;
    if (dim < 0) {
      if (n < 1) throw ParseError(reader.number(), "embedding line has no vector components");
      dim = n;
    } else if (n != dim) {
      throw ParseError(reader.number(), "expected " + std::to_string(dim) + " vector components, found " +
                                            std::to_string(n));
    }
    words.push_back(make_lemma(fields.front(), reader.number()));
    if (!seen.insert(words.back().str()).second) {
      throw ParseError(reader.number(), "duplicate lemma '" + words.back().str() + "'");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) values.push_back(parse_real(fields[i], reader.number()));
  }
  if (dim < 0) throw ParseError(0, "embedding file is empty; cannot infer dimension");

  const auto count = static_cast<Index>(words.size());
  const Matrix vectors = Eigen::Map<const Matrix>(values.data(), dim, count);
  try {
    EmbeddingTable table(std::move(words), vectors, Vector::Zero(dim));
    table.reset_unk_to_mean();
    return table;
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

EmbeddingTable parse_embeddings(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_embeddings(in);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i].str() << ' ';
    write_row(out, table.column(i));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Pairs

std::vector<LabeledPair> parse_pairs(std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::vector<LabeledPair> pairs;
  while (reader.next(line)) {
    if (is_blank(line)) continue;
    const auto fields = split_exact(line, '\t');
    if (fields.size() < 4) {
      throw ParseError(reader.number(), "expected 4 tab-separated fields, found " + std::to_string(fields.size()));
    }
    if (fields.size() > 4) {
      throw ParseError(reader.number(), "expected 4 tab-separated fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(reader.number(), "empty scenario field");
    bool gold = false;
    if (fields[3] == "1") {
      gold = true;
    } else if (fields[3] != "0") {
      throw ParseError(reader.number(), "label must be 0 or 1, found '" + std::string(fields[3]) + "'");
    }
    pairs.push_back(LabeledPair{std::string(fields[0]),
                                make_event(split_exact(fields[1], ' '), reader.number(), "event field 1"),
                                make_event(split_exact(fields[2], ' '), reader.number(), "event field 2"),
                                gold});
  }
  return pairs;
}

std::vector<LabeledPair> parse_pairs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_pairs(in);
}

void write_pairs(std::ostream& out, std::span<const LabeledPair> pairs) {
  auto field = [](const Event& ev) {
    std::string s = ev.predicate.str();
    for (const Lemma& a : ev.args) s += ' ' + a.str();
    return s;
  };
  for (const LabeledPair& p : pairs) {
    out << p.scenario << '\t' << field(p.e1) << '\t' << field(p.e2) << '\t' << (p.gold ? '1' : '0') << '\n';
  }
}

// ---------------------------------------------------------------------------
// Model

void write_model(std::ostream& out, const ModelParams& params) {
  if (!params.consistent()) throw std::invalid_argument("write_model: inconsistent or non-finite parameters");
  const Dims dims = params.dims();
  const EmbeddingTable& table = params.table;
  out << kModelMagic << '\n';
  out << "dims " << dims.d << ' ' << dims.h << ' ' << dims.e << '\n';
  out << "vocab " << table.size() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i].str() << ' ';
    write_row(out, table.column(i));
    out << '\n';
  }
  out << "unk ";
  write_row(out, table.unk());
  out << '\n';

  auto matrix_block = [&out](std::string_view label, const Matrix& m) {
    out << label << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
      write_row(out, m.row(r));
      out << '\n';
    }
  };
  auto vector_block = [&out](std::string_view label, const Vector& v) {
    out << label << '\n';
    write_row(out, v);
    out << '\n';
  };
  matrix_block("R", params.R);
  matrix_block("T", params.T);
  matrix_block("A", params.A);
  vector_block("b_h", params.b_h);
  vector_block("b_x", params.b_x);
  vector_block("w", params.w);
}

ModelParams read_model(std::istream& in) {
  LineReader reader(in);
  std::string line;

  auto require_line = [&](std::string_view what) -> std::string& {
    if (!reader.next(line)) throw ParseError(reader.number() + 1, "unexpected end of model file, expected " + std::string(what));
    return line;
  };
  auto reals = [&](std::string_view text, Index expected, std::string_view what) {
    const auto fields = split_exact(text, ' ');
    if (static_cast<Index>(fields.size()) != expected || (expected == 0 && !text.empty())) {
      throw ParseError(reader.number(), std::string(what) + ": expected " + std::to_string(expected) +
                                            " values, found " + std::to_string(fields.size()));
    }
    Vector v(expected);
    for (Index i = 0; i < expected; ++i) v(i) = parse_real(fields[static_cast<std::size_t>(i)], reader.number());
    return v;
  };
  auto positive = [&](std::string_view token) {
    const long long v = parse_integer(token, reader.number());
    if (v <= 0) throw ParseError(reader.number(), "dimension must be positive");
    return static_cast<Index>(v);
  };

  if (require_line("magic line") != kModelMagic) {
    throw ParseError(reader.number(), "bad magic line (expected '" + std::string(kModelMagic) + "')");
  }

  const auto dims_fields = split_exact(require_line("dims line"), ' ');
  if (dims_fields.size() != 4 || dims_fields[0] != "dims") {
    throw ParseError(reader.number(), "expected 'dims d h e'");
  }
  const Dims dims{positive(dims_fields[1]), positive(dims_fields[2]), positive(dims_fields[3])};

  const auto vocab_fields = split_exact(require_line("vocab line"), ' ');
  if (vocab_fields.size() != 2 || vocab_fields[0] != "vocab") throw ParseError(reader.number(), "expected 'vocab N'");
  const long long n_words = parse_integer(vocab_fields[1], reader.number());
  if (n_words < 0) throw ParseError(reader.number(), "vocabulary size must be non-negative");

  std::vector<Lemma> words;
  words.reserve(static_cast<std::size_t>(n_words));
  Matrix vectors(dims.d, static_cast<Index>(n_words));
  for (Index i = 0; i < n_words; ++i) {
    const std::string_view text = require_line("vocabulary line");
    const std::size_t sp = text.find(' ');
    if (sp == std::string_view::npos) throw ParseError(reader.number(), "vocabulary line has no vector");
    words.push_back(make_lemma(text.substr(0, sp), reader.number()));
    vectors.col(i) = reals(text.substr(sp + 1), dims.d, "embedding");
  }

  const std::string_view unk_line = require_line("unk line");
  if (!unk_line.starts_with("unk ")) throw ParseError(reader.number(), "expected 'unk' line");
  const Vector unk = reals(unk_line.substr(4), dims.d, "unk");

  EmbeddingTable table = [&] {
    try {
      return EmbeddingTable(std::move(words), vectors, unk);
    } catch (const std::invalid_argument& e) {
      throw ParseError(reader.number(), e.what());
    }
  }();
  ModelParams params = zero_params(dims, std::move(table));

  auto label = [&](std::string_view name) {
    if (require_line(name) != name) {
      throw ParseError(reader.number(), "expected block label '" + std::string(name) + "'");
    }
  };
  auto matrix_block = [&](std::string_view name, Matrix& m) {
    label(name);
    for (Index r = 0; r < m.rows(); ++r) m.row(r) = reals(require_line(name), m.cols(), name).transpose();
  };
  auto vector_block = [&](std::string_view name, Vector& v) {
    label(name);
    v = reals(require_line(name), v.size(), name);
  };
  matrix_block("R", params.R);
  matrix_block("T", params.T);
  matrix_block("A", params.A);
  vector_block("b_h", params.b_h);
  vector_block("b_x", params.b_x);
  vector_block("w", params.w);

  while (reader.next(line)) {
    if (!is_blank(line)) throw ParseError(reader.number(), "trailing content after model");
  }
  return params;
}

ModelParams read_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_model(in);
}

}  // namespace evemb
