#include "evemb/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evemb/random.hpp"

namespace evemb {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

char fold(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool same_shape(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace

Lemma::Lemma(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty lemma");
  text_.reserve(text.size());
  for (char c : text) {
    if (is_space(c)) throw std::invalid_argument("lemma contains whitespace: '" + std::string(text) + "'");
    text_.push_back(fold(c));
  }
}

std::string_view to_string(Mode mode) {
  return mode == Mode::full ? "full" : "verb";
}

Mode parse_mode(std::string_view text) {
  if (text == "full") return Mode::full;
  if (text == "verb" || text == "verb_only") return Mode::verb_only;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected full or verb)");
}

EmbeddingTable::EmbeddingTable(Index dim) : storage_(Matrix::Zero(dim, 1)) {
  if (dim < 0) throw std::invalid_argument("negative embedding dimension");
}

EmbeddingTable::EmbeddingTable(std::vector<Lemma> words, const Matrix& vectors, const Vector& unk)
    : words_(std::move(words)) {
  if (vectors.cols() != static_cast<Index>(words_.size())) {
    throw std::invalid_argument("embedding table: word count and vector count differ");
  }
  if (unk.size() != vectors.rows()) {
    throw std::invalid_argument("embedding table: unk vector has the wrong dimension");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i].str(), i).second) {
      throw std::invalid_argument("embedding table: duplicate word '" + words_[i].str() + "'");
    }
  }
  storage_.resize(vectors.rows(), vectors.cols() + 1);
  storage_.leftCols(vectors.cols()) = vectors;
  storage_.col(vectors.cols()) = unk;
}

std::size_t EmbeddingTable::slot(const Lemma& lemma) const {
  const auto it = index_.find(lemma.str());
  return it == index_.end() ? unk_slot() : it->second;
}

void EmbeddingTable::reset_unk_to_mean() {
  const auto n = static_cast<Index>(words_.size());
  if (n == 0) {
    unk().setZero();
  } else {
    unk() = storage_.leftCols(n).rowwise().sum() / static_cast<double>(n);
  }
}

bool ModelParams::consistent() const {
  const Dims d = dims();
  if (d.d <= 0 || d.h <= 0 || d.e <= 0) return false;
  if (R.rows() != d.h || R.cols() != d.d) return false;
  if (T.rows() != d.h || T.cols() != d.d) return false;
  if (A.rows() != d.e || A.cols() != d.h) return false;
  if (b_h.size() != d.h || b_x.size() != d.e || w.size() != d.e) return false;
  return table.storage().allFinite() && R.allFinite() && T.allFinite() && A.allFinite() &&
         b_h.allFinite() && b_x.allFinite() && w.allFinite();
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (!(a.table == b.table)) return false;
  if (!same_shape(a.R, b.R) || !same_shape(a.T, b.T) || !same_shape(a.A, b.A)) return false;
  if (a.b_h.size() != b.b_h.size() || a.b_x.size() != b.b_x.size() || a.w.size() != b.w.size()) {
    return false;
  }
  return a.R == b.R && a.T == b.T && a.A == b.A && a.b_h == b.b_h && a.b_x == b.b_x && a.w == b.w;
}

ModelParams zero_params(const Dims& dims, EmbeddingTable table) {
  if (table.dim() != dims.d) throw std::invalid_argument("table dimension differs from dims.d");
  ModelParams p{std::move(table),
                Matrix::Zero(dims.h, dims.d),
                Matrix::Zero(dims.h, dims.d),
                Matrix::Zero(dims.e, dims.h),
                Vector::Zero(dims.h),
                Vector::Zero(dims.e),
                Vector::Zero(dims.e)};
  return p;
}

double sigmoid(double z) noexcept {
  // Only exp of a non-positive argument is taken, so nothing overflows.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

Vector lookup_lemma(const EmbeddingTable& table, const Lemma& lemma) {
  return table.column(table.slot(lemma));
}

Activations forward(const Event& event, const ModelParams& params, Mode mode) {
  const EmbeddingTable& table = params.table;
  Activations act;
  act.predicate_slot = table.slot(event.predicate);
  act.arg_sum = Vector::Zero(table.dim());
  if (mode == Mode::full) {
    act.arg_slots.reserve(event.args.size());
    for (const Lemma& arg : event.args) {
      const std::size_t s = table.slot(arg);
      act.arg_slots.push_back(s);
      act.arg_sum += table.column(s);
    }
  }
  // T * sum(c_k) == sum(T * c_k): one product instead of one per argument.
  Vector pre = params.R * table.column(act.predicate_slot) + params.b_h;
  if (!act.arg_slots.empty()) pre.noalias() += params.T * act.arg_sum;
  act.hidden = pre.unaryExpr([](double z) { return sigmoid(z); });
  Vector pre_x = params.A * act.hidden + params.b_x;
  act.x = pre_x.unaryExpr([](double z) { return sigmoid(z); });
  act.score = params.w.dot(act.x);
  return act;
}

Vector embed_event(const Event& event, const ModelParams& params, Mode mode) {
  return forward(event, params, mode).x;
}

double score_event(const Event& event, const ModelParams& params, Mode mode) {
  return forward(event, params, mode).score;
}

std::vector<Lemma> collect_vocabulary(std::span<const EventSequence> sequences) {
  std::vector<Lemma> vocab;
  for (const EventSequence& seq : sequences) {
    for (const Event& ev : seq.events) {
      vocab.push_back(ev.predicate);
      vocab.insert(vocab.end(), ev.args.begin(), ev.args.end());
    }
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

ModelParams init_params(const Dims& dims, std::uint64_t seed, std::span<const Lemma> vocab,
                        const EmbeddingTable* pretrained) {
  if (dims.d <= 0 || dims.h <= 0 || dims.e <= 0) {
    throw std::invalid_argument("dimensions must be positive");
  }
  if (pretrained != nullptr && pretrained->dim() != dims.d) {
    throw std::invalid_argument("pretrained embeddings have dimension " +
                                std::to_string(pretrained->dim()) + ", expected " +
                                std::to_string(dims.d));
  }

  std::vector<Lemma> words(vocab.begin(), vocab.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());

  Rng rng(seed);
  Matrix vectors(dims.d, static_cast<Index>(words.size()));
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto col = vectors.col(static_cast<Index>(i));
    if (pretrained != nullptr && pretrained->contains(words[i])) {
      col = pretrained->column(pretrained->slot(words[i]));
    } else {
      for (Index k = 0; k < dims.d; ++k) col(k) = uniform(rng, -0.1, 0.1);
    }
  }
  EmbeddingTable table(std::move(words), vectors, Vector::Zero(dims.d));
  table.reset_unk_to_mean();

  ModelParams p = zero_params(dims, std::move(table));
  auto fill = [&rng](Matrix& m, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = uniform(rng, -bound, bound);
    }
  };
  fill(p.R, dims.d);
  fill(p.T, dims.d);
  fill(p.A, dims.h);
  return p;
}

}  // namespace evemb
