#pragma once

// Event representation and scoring.
//
// An event (predicate lemma plus argument-head lemmas) is mapped to a vector
// by a two-layer composition network:
//
//   hidden = sigmoid(R * c(predicate) + sum_k T * c(arg_k) + b_h)
//   x      = sigmoid(A * hidden + b_x)
//   score  = w . x
//
// where c() is the word embedding table. Predicates and arguments use
// separate transforms (R and T). Sorting events by score gives the predicted
// temporal order.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace evemb {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A lower-cased token with no whitespace. Construction folds ASCII case and
/// throws std::invalid_argument on empty or whitespace-bearing text.
class Lemma {
 public:
  explicit Lemma(std::string_view text);

  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const Lemma&, const Lemma&) = default;
  friend std::strong_ordering operator<=>(const Lemma&, const Lemma&) = default;

 private:
  std::string text_;
};

struct Event {
  Lemma predicate;
  std::vector<Lemma> args;

  friend bool operator==(const Event&, const Event&) = default;
};

/// One event sequence description: events listed in gold temporal order.
struct EventSequence {
  std::string scenario;
  std::vector<Event> events;

  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

enum class Mode { full, verb_only };

std::string_view to_string(Mode mode);
/// Accepts "full", "verb" and "verb_only"; throws std::invalid_argument otherwise.
Mode parse_mode(std::string_view text);

struct Dims {
  Index d = 50;  // word embedding
  Index h = 50;  // hidden layer
  Index e = 50;  // event vector

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Word embeddings plus an out-of-vocabulary vector.
///
/// Vectors are stored column-wise in a d x (N + 1) matrix. Column i < N holds
/// words()[i]; column N holds the unk vector. A "slot" is a column index, so
/// unknown lemmas resolve to `unk_slot()` and can be trained like any word.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(Index dim = 0);
  /// `vectors` is d x N, one column per word. Throws std::invalid_argument on
  /// duplicate words or a column-count mismatch.
  EmbeddingTable(std::vector<Lemma> words, const Matrix& vectors, const Vector& unk);

  Index dim() const noexcept { return storage_.rows(); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<Lemma>& words() const noexcept { return words_; }

  bool contains(const Lemma& lemma) const { return index_.contains(lemma.str()); }
  std::size_t slot(const Lemma& lemma) const;
  std::size_t unk_slot() const noexcept { return words_.size(); }

  auto column(std::size_t slot) const { return storage_.col(static_cast<Index>(slot)); }
  auto column(std::size_t slot) { return storage_.col(static_cast<Index>(slot)); }
  auto unk() const { return column(unk_slot()); }
  auto unk() { return column(unk_slot()); }

  /// All columns including unk, d x (N + 1).
  const Matrix& storage() const noexcept { return storage_; }
  Matrix& storage() noexcept { return storage_; }

  /// Sets unk to the componentwise mean of the word vectors (zero if empty).
  void reset_unk_to_mean();

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.words_ == b.words_ && a.storage_.rows() == b.storage_.rows() &&
           a.storage_.cols() == b.storage_.cols() && a.storage_ == b.storage_;
  }

 private:
  std::vector<Lemma> words_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix storage_;
};

/// Everything learned: embeddings C, transforms R (h x d), T (h x d),
/// A (e x h), biases and the ranking vector w.
struct ModelParams {
  EmbeddingTable table;
  Matrix R;
  Matrix T;
  Matrix A;
  Vector b_h;
  Vector b_x;
  Vector w;

  Dims dims() const { return {table.dim(), R.rows(), A.rows()}; }
  /// True when every block agrees with dims() and all entries are finite.
  bool consistent() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Parameters of the given shape, all zero, with the given table.
ModelParams zero_params(const Dims& dims, EmbeddingTable table);

/// Intermediate values of one forward pass, kept for backpropagation.
struct Activations {
  std::size_t predicate_slot = 0;
  std::vector<std::size_t> arg_slots;  // one per argument occurrence
  Vector arg_sum;                      // sum of argument embeddings (d)
  Vector hidden;                       // h
  Vector x;                            // e
  double score = 0.0;
};

/// Logistic function, 1 / (1 + exp(-z)), evaluated without overflow.
double sigmoid(double z) noexcept;

/// Stored vector for the lemma, or the unk vector.
Vector lookup_lemma(const EmbeddingTable& table, const Lemma& lemma);

Activations forward(const Event& event, const ModelParams& params, Mode mode);

/// Event vector x, components in (0, 1).
Vector embed_event(const Event& event, const ModelParams& params, Mode mode);

double score_event(const Event& event, const ModelParams& params, Mode mode);

/// Sorted, deduplicated predicate and argument lemmas of the sequences.
std::vector<Lemma> collect_vocabulary(std::span<const EventSequence> sequences);

/// Seeded initialization. Word vectors come from `pretrained` when it holds
/// the lemma, otherwise uniform in [-0.1, 0.1]; unk is their mean. R, T and A
/// are uniform in +-1/sqrt(fan_in); biases and w start at zero. Vocabulary
/// order in the result is sorted lemma order. Throws std::invalid_argument
/// on a dimension mismatch or non-positive dims.
ModelParams init_params(const Dims& dims, std::uint64_t seed, std::span<const Lemma> vocab,
                        const EmbeddingTable* pretrained = nullptr);

}  // namespace evemb
