#pragma once

// Online large-margin ranking over event sequences.
//
// For every sequence the events are scored, each gold-ordered pair (i < j)
// whose gap s_i - s_j falls below the margin gamma counts as a violation, and
// the hinge sum over violations, sum(gamma - (s_i - s_j)), is backpropagated
// through w, the event layer, the hidden layer, R/T and the embedding rows.
// One SGD step with L2 weight decay follows each sequence.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "evemb/model.hpp"

namespace evemb {

struct Hyperparams {
  double gamma = 1.0;   // ranking margin, > 0
  double eta = 0.01;    // learning rate, > 0
  double lambda = 1e-4; // weight decay, >= 0
  int epochs = 200;
  std::uint64_t seed = 0;
  Mode mode = Mode::full;
  bool freeze_embeddings = false;
  bool shuffle = false;  // seeded reshuffle of sequence order every epoch
  Dims dims{};

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// Same shapes as ModelParams. Embedding gradients are sparse: only slots
/// that were touched by the forward pass appear in `embedding`.
struct Gradients {
  Matrix R;
  Matrix T;
  Matrix A;
  Vector b_h;
  Vector b_x;
  Vector w;
  std::map<std::size_t, Vector> embedding;  // slot -> d-vector

  static Gradients zeros_like(const ModelParams& params);

  /// d x slots matrix with untouched columns zero.
  Matrix dense_embedding(Index dim, std::size_t slots) const;
};

struct Violations {
  std::size_t count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // 0-based, i < j
};

/// Pairs i < j with scores[i] - scores[j] < gamma. Each unordered pair is
/// visited once and self-pairs are excluded.
Violations ranking_violations(std::span<const double> scores, double gamma);

/// Hinge surrogate: sum over violated pairs of gamma - (scores[i] - scores[j]).
double sequence_loss(std::span<const double> scores, double gamma);

std::vector<double> score_sequence(const EventSequence& seq, const ModelParams& params, Mode mode);

struct SequenceGradient {
  double loss = 0.0;
  std::size_t violations = 0;
  Gradients grads;
};

/// Exact gradient of sequence_loss with respect to every parameter. Sequences
/// shorter than two events give zero loss and zero gradients.
SequenceGradient sequence_gradients(const EventSequence& seq, const ModelParams& params,
                                    const Hyperparams& hyper);

/// theta <- theta - eta * (g + lambda * theta) for every scalar, embeddings
/// and biases included. With `update_embeddings` false the embedding table is
/// left untouched (frozen pretrained vectors).
void apply_update(ModelParams& params, const Gradients& grads, double eta, double lambda,
                  bool update_embeddings = true);

struct EpochStats {
  std::size_t violations = 0;  // summed over sequences, before each update
  double loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

/// Runs `hyper.epochs` passes, one update per sequence in corpus order (or a
/// seeded shuffle of it). Throws std::invalid_argument on an empty corpus or
/// when `init` does not match hyper.dims.
TrainResult train(std::span<const EventSequence> corpus, const Hyperparams& hyper, ModelParams init);

}  // namespace evemb
