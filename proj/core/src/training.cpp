#include "evemb/training.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "evemb/random.hpp"

namespace evemb {

void Hyperparams::validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0) throw std::invalid_argument("gamma must be finite and > 0");
  if (!std::isfinite(eta) || eta <= 0.0) throw std::invalid_argument("eta must be finite and > 0");
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (dims.d <= 0 || dims.h <= 0 || dims.e <= 0) throw std::invalid_argument("dims must be positive");
}

Gradients Gradients::zeros_like(const ModelParams& params) {
  return Gradients{Matrix::Zero(params.R.rows(), params.R.cols()),
                   Matrix::Zero(params.T.rows(), params.T.cols()),
                   Matrix::Zero(params.A.rows(), params.A.cols()),
                   Vector::Zero(params.b_h.size()),
                   Vector::Zero(params.b_x.size()),
                   Vector::Zero(params.w.size()),
                   {}};
}

Matrix Gradients::dense_embedding(Index dim, std::size_t slots) const {
  Matrix dense = Matrix::Zero(dim, static_cast<Index>(slots));
  for (const auto& [slot, g] : embedding) {
    if (slot >= slots) throw std::out_of_range("embedding gradient slot out of range");
    dense.col(static_cast<Index>(slot)) = g;
  }
  return dense;
}

Violations ranking_violations(std::span<const double> scores, double gamma) {
  Violations v;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = i + 1; j < scores.size(); ++j) {
      if (scores[i] - scores[j] < gamma) v.pairs.emplace_back(i, j);
    }
  }
  v.count = v.pairs.size();
  return v;
}

double sequence_loss(std::span<const double> scores, double gamma) {
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = i + 1; j < scores.size(); ++j) {
      const double gap = scores[i] - scores[j];
      if (gap < gamma) loss += gamma - gap;
    }
  }
  return loss;
}

std::vector<double> score_sequence(const EventSequence& seq, const ModelParams& params, Mode mode) {
  std::vector<double> scores;
  scores.reserve(seq.events.size());
  for (const Event& ev : seq.events) scores.push_back(score_event(ev, params, mode));
  return scores;
}

SequenceGradient sequence_gradients(const EventSequence& seq, const ModelParams& params,
                                    const Hyperparams& hyper) {
  SequenceGradient out{0.0, 0, Gradients::zeros_like(params)};
  const std::size_t n = seq.events.size();
  if (n < 2) return out;

  std::vector<Activations> acts;
  acts.reserve(n);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    acts.push_back(forward(seq.events[i], params, hyper.mode));
    scores[i] = acts.back().score;
  }

  // dL/ds: each violated pair (i, j) adds -1 to s_i and +1 to s_j.
  std::vector<double> dscore(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = scores[i] - scores[j];
      if (gap < hyper.gamma) {
        out.loss += hyper.gamma - gap;
        ++out.violations;
        dscore[i] -= 1.0;
        dscore[j] += 1.0;
      }
    }
  }
  if (out.violations == 0) return out;

  Gradients& g = out.grads;
  const EmbeddingTable& table = params.table;
  const bool embeddings = !hyper.freeze_embeddings;
  auto add_embedding = [&g, &table](std::size_t slot, const Vector& delta) {
    auto [it, fresh] = g.embedding.try_emplace(slot);
    if (fresh) it->second = Vector::Zero(table.dim());
    it->second += delta;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (dscore[i] == 0.0) continue;
    const Activations& a = acts[i];
    g.w += dscore[i] * a.x;

    const Vector dpre_x = (dscore[i] * params.w).cwiseProduct(a.x.cwiseProduct((1.0 - a.x.array()).matrix()));
    g.A.noalias() += dpre_x * a.hidden.transpose();
    g.b_x += dpre_x;

    const Vector dhidden = params.A.transpose() * dpre_x;
    const Vector dpre_h = dhidden.cwiseProduct(a.hidden.cwiseProduct((1.0 - a.hidden.array()).matrix()));
    g.R.noalias() += dpre_h * table.column(a.predicate_slot).transpose();
    g.b_h += dpre_h;
    if (!a.arg_slots.empty()) g.T.noalias() += dpre_h * a.arg_sum.transpose();

    if (embeddings) {
      add_embedding(a.predicate_slot, params.R.transpose() * dpre_h);
      if (!a.arg_slots.empty()) {
        const Vector darg = params.T.transpose() * dpre_h;
        for (std::size_t slot : a.arg_slots) add_embedding(slot, darg);
      }
    }
  }
  return out;
}

void apply_update(ModelParams& params, const Gradients& grads, double eta, double lambda,
                  bool update_embeddings) {
  auto step = [eta, lambda](auto& theta, const auto& grad) {
    theta -= eta * (grad + lambda * theta);
  };
  step(params.R, grads.R);
  step(params.T, grads.T);
  step(params.A, grads.A);
  step(params.b_h, grads.b_h);
  step(params.b_x, grads.b_x);
  step(params.w, grads.w);

  if (!update_embeddings) return;
  Matrix& storage = params.table.storage();
  auto touched = grads.embedding.begin();
  for (Index c = 0; c < storage.cols(); ++c) {
    auto col = storage.col(c);
    if (touched != grads.embedding.end() && touched->first == static_cast<std::size_t>(c)) {
      col -= eta * (touched->second + lambda * col);
      ++touched;
    } else if (lambda != 0.0) {
      col -= eta * (lambda * col);
    }
  }
  if (touched != grads.embedding.end()) {
    throw std::out_of_range("embedding gradient slot out of range");
  }
}

TrainResult train(std::span<const EventSequence> corpus, const Hyperparams& hyper, ModelParams init) {
  hyper.validate();
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (!(init.dims() == hyper.dims)) {
    throw std::invalid_argument("initial parameters do not match the configured dimensions");
  }

  TrainResult result{std::move(init), {}};
  result.history.reserve(static_cast<std::size_t>(hyper.epochs));

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix64(hyper.seed));

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    if (hyper.shuffle) shuffle(std::span<std::size_t>(order), rng);
    EpochStats stats;
    for (std::size_t k : order) {
      const SequenceGradient sg = sequence_gradients(corpus[k], result.params, hyper);
      stats.violations += sg.violations;
      stats.loss += sg.loss;
      apply_update(result.params, sg.grads, hyper.eta, hyper.lambda, !hyper.freeze_embeddings);
    }
    result.history.push_back(stats);
  }
  return result;
}

}  // namespace evemb
