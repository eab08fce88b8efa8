#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "evemb/corpus_io.hpp"
#include "evemb/random.hpp"
#include "evemb/training.hpp"
#include "finite_difference.hpp"

using namespace evemb;
using evemb::testkit::finite_difference_gradients;
using evemb::testkit::max_abs_error;
using evemb::testkit::max_relative_error;
using evemb::testkit::random_gradient_case;

namespace {

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

/// Independent enumeration over every i < j.
PairList brute_force_violations(const std::vector<double>& t, double gamma) {
  PairList pairs;
  for (std::size_t j = 0; j < t.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (t[i] - t[j] < gamma) pairs.emplace_back(i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Event make_event(std::string_view pred, std::vector<std::string_view> args = {}) {
  Event ev{Lemma(pred), {}};
  for (auto a : args) ev.args.emplace_back(a);
  return ev;
}

Hyperparams small_hyper(Mode mode = Mode::full) {
  Hyperparams h;
  h.dims = {3, 4, 2};
  h.mode = mode;
  return h;
}

bool gradients_equal(const Gradients& a, const Gradients& b) {
  if (a.embedding.size() != b.embedding.size()) return false;
  for (const auto& [slot, g] : a.embedding) {
    const auto it = b.embedding.find(slot);
    if (it == b.embedding.end() || it->second != g) return false;
  }
  return a.R == b.R && a.T == b.T && a.A == b.A && a.b_h == b.b_h && a.b_x == b.b_x && a.w == b.w;
}

bool all_zero(const Gradients& g) {
  bool embeddings_zero = true;
  for (const auto& [slot, v] : g.embedding) embeddings_zero = embeddings_zero && v.isZero(0.0);
  return embeddings_zero && g.R.isZero(0.0) && g.T.isZero(0.0) && g.A.isZero(0.0) && g.b_h.isZero(0.0) &&
         g.b_x.isZero(0.0) && g.w.isZero(0.0);
}

}  // namespace

TEST(RankingViolations, WellSeparatedScores) {
  const std::vector<double> t = {3.0, 2.0, 1.0};
  EXPECT_EQ(ranking_violations(t, 0.5).count, 0u);
}

TEST(RankingViolations, ReversedPair) {
  const std::vector<double> t = {1.0, 2.0};
  const Violations v = ranking_violations(t, 0.5);
  EXPECT_EQ(v.count, 1u);
  EXPECT_EQ(v.pairs, (PairList{{0, 1}}));
}

TEST(RankingViolations, OnlyTheNarrowGap) {
  const std::vector<double> t = {2.0, 1.8, 1.0};
  const Violations v = ranking_violations(t, 0.5);
  EXPECT_EQ(v.count, 1u);
  EXPECT_EQ(v.pairs, (PairList{{0, 1}}));
}

TEST(RankingViolations, SingleEventHasNoPairs) {
  const std::vector<double> t = {4.0};
  EXPECT_EQ(ranking_violations(t, 1.0).count, 0u);
}

TEST(RankingViolations, MatchesBruteForceOnRandomArrays) {
  Rng rng(2024);
  const double gammas[] = {0.1, 0.5, 1.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + uniform_index(rng, 12);
    std::vector<double> t(n);
    for (double& s : t) s = uniform(rng, -2.0, 2.0);
    const double gamma = gammas[uniform_index(rng, 3)];
    const Violations v = ranking_violations(t, gamma);
    PairList got = v.pairs;
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, brute_force_violations(t, gamma));
    ASSERT_EQ(v.count, got.size());
  }
}

TEST(SequenceLoss, Examples) {
  EXPECT_EQ(sequence_loss(std::vector<double>{3.0, 2.0, 1.0}, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(sequence_loss(std::vector<double>{1.0, 2.0}, 0.5), 1.5);
  EXPECT_NEAR(sequence_loss(std::vector<double>{2.0, 1.8, 1.0}, 0.5), 0.3, 1e-12);
}

TEST(SequenceLoss, ZeroExactlyWhenNoViolations) {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + uniform_index(rng, 8);
    std::vector<double> t(n);
    for (double& s : t) s = uniform(rng, -3.0, 3.0);
    const double loss = sequence_loss(t, 0.5);
    EXPECT_GE(loss, 0.0);
    EXPECT_EQ(loss == 0.0, ranking_violations(t, 0.5).count == 0);
  }
}

TEST(SequenceGradients, MatchFiniteDifferences) {
  const Hyperparams hyper = small_hyper();
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, seed);
    const SequenceGradient sg = sequence_gradients(gc.sequence, gc.params, hyper);
    const Gradients fd = finite_difference_gradients(gc.sequence, gc.params, hyper, 1e-5);
    EXPECT_LE(max_relative_error(sg.grads, fd, gc.params), 1e-4) << "seed " << seed;
    EXPECT_NEAR(sg.loss, sequence_loss(score_sequence(gc.sequence, gc.params, hyper.mode), hyper.gamma), 1e-15);
  }
}

TEST(SequenceGradients, MatchFiniteDifferencesVerbOnly) {
  const Hyperparams hyper = small_hyper(Mode::verb_only);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto gc = random_gradient_case(hyper.dims, 4, hyper.gamma, hyper.mode, seed);
    const SequenceGradient sg = sequence_gradients(gc.sequence, gc.params, hyper);
    const Gradients fd = finite_difference_gradients(gc.sequence, gc.params, hyper, 1e-5);
    EXPECT_LE(max_relative_error(sg.grads, fd, gc.params), 1e-4) << "seed " << seed;
    EXPECT_TRUE(sg.grads.T.isZero(0.0));
  }
}

TEST(SequenceGradients, SatisfiedMarginsGiveZeroGradients) {
  const Hyperparams hyper = small_hyper();
  auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, 3);
  // Replace the events so scores are strictly ordered, then widen the gaps by scaling w.
  gc.sequence.events = {make_event("go"), make_event("fill"), make_event("turn")};
  std::vector<double> s = score_sequence(gc.sequence, gc.params, hyper.mode);
  std::vector<std::size_t> idx = {0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&s](auto a, auto b) { return s[a] > s[b]; });
  std::vector<Event> ordered;
  for (auto i : idx) ordered.push_back(gc.sequence.events[i]);
  gc.sequence.events = ordered;
  s = score_sequence(gc.sequence, gc.params, hyper.mode);
  const double min_gap = std::min(s[0] - s[1], s[1] - s[2]);
  ASSERT_GT(min_gap, 0.0);
  gc.params.w *= 2.0 * hyper.gamma / min_gap;

  const SequenceGradient sg = sequence_gradients(gc.sequence, gc.params, hyper);
  EXPECT_EQ(sg.violations, 0u);
  EXPECT_EQ(sg.loss, 0.0);
  EXPECT_TRUE(all_zero(sg.grads));
  EXPECT_TRUE(sg.grads.embedding.empty());
}

TEST(SequenceGradients, ShortSequencesAreInert) {
  const Hyperparams hyper = small_hyper();
  auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, 4);
  gc.sequence.events.erase(gc.sequence.events.begin() + 1, gc.sequence.events.end());
  const SequenceGradient sg = sequence_gradients(gc.sequence, gc.params, hyper);
  EXPECT_EQ(sg.loss, 0.0);
  EXPECT_TRUE(all_zero(sg.grads));
  gc.sequence.events.clear();
  EXPECT_TRUE(all_zero(sequence_gradients(gc.sequence, gc.params, hyper).grads));
}

TEST(SequenceGradients, FrozenEmbeddingsMaskOnlyTheTable) {
  Hyperparams hyper = small_hyper();
  const auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, 5);
  const SequenceGradient learned = sequence_gradients(gc.sequence, gc.params, hyper);
  hyper.freeze_embeddings = true;
  const SequenceGradient frozen = sequence_gradients(gc.sequence, gc.params, hyper);

  EXPECT_FALSE(learned.grads.embedding.empty());
  EXPECT_TRUE(frozen.grads.embedding.empty());
  EXPECT_EQ(frozen.grads.R, learned.grads.R);
  EXPECT_EQ(frozen.grads.T, learned.grads.T);
  EXPECT_EQ(frozen.grads.A, learned.grads.A);
  EXPECT_EQ(frozen.grads.b_h, learned.grads.b_h);
  EXPECT_EQ(frozen.grads.b_x, learned.grads.b_x);
  EXPECT_EQ(frozen.grads.w, learned.grads.w);
}

TEST(SequenceGradients, UntouchedEmbeddingRowsAbsent) {
  const Hyperparams hyper = small_hyper();
  const auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, 6);
  const SequenceGradient sg = sequence_gradients(gc.sequence, gc.params, hyper);
  for (const auto& [slot, g] : sg.grads.embedding) {
    bool used = false;
    for (const Event& ev : gc.sequence.events) {
      used = used || gc.params.table.slot(ev.predicate) == slot;
      for (const Lemma& a : ev.args) used = used || gc.params.table.slot(a) == slot;
    }
    EXPECT_TRUE(used) << "slot " << slot;
  }
}

TEST(FiniteDifferences, ExactForRankingVector) {
  // The score is linear in w, so for fixed x the hinge loss is linear in w
  // (away from kinks) and central differences are exact up to rounding.
  const Hyperparams hyper = small_hyper();
  const auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, 12);
  const Gradients fd = finite_difference_gradients(gc.sequence, gc.params, hyper, 1e-5);

  std::vector<Vector> xs;
  for (const Event& ev : gc.sequence.events) xs.push_back(embed_event(ev, gc.params, hyper.mode));
  const std::vector<double> s = score_sequence(gc.sequence, gc.params, hyper.mode);
  Vector expected = Vector::Zero(hyper.dims.e);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i] - s[j] < hyper.gamma) expected += xs[j] - xs[i];
    }
  }
  EXPECT_LE((fd.w - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FiniteDifferences, SecondOrderAccurate) {
  const Hyperparams hyper = small_hyper();
  const auto gc = random_gradient_case(hyper.dims, 3, hyper.gamma, hyper.mode, 21, 0.1);
  const Gradients exact = sequence_gradients(gc.sequence, gc.params, hyper).grads;
  const double coarse = max_abs_error(exact, finite_difference_gradients(gc.sequence, gc.params, hyper, 1e-2), gc.params);
  const double fine = max_abs_error(exact, finite_difference_gradients(gc.sequence, gc.params, hyper, 5e-3), gc.params);
  ASSERT_GT(coarse, 1e-9);
  EXPECT_NEAR(coarse / fine, 4.0, 0.5);
}

TEST(ApplyUpdate, ZeroGradientNoDecayIsIdentity) {
  const auto gc = random_gradient_case({3, 4, 2}, 3, 1.0, Mode::full, 1);
  ModelParams p = gc.params;
  apply_update(p, Gradients::zeros_like(p), 0.1, 0.0);
  EXPECT_TRUE(p == gc.params);
}

TEST(ApplyUpdate, ScalarArithmetic) {
  ModelParams p = zero_params({1, 1, 1}, EmbeddingTable(1));
  p.w(0) = 1.0;
  Gradients g = Gradients::zeros_like(p);
  g.w(0) = 0.2;

  ModelParams plain = p;
  apply_update(plain, g, 0.1, 0.0);
  EXPECT_NEAR(plain.w(0), 0.98, 1e-15);

  ModelParams decayed = p;
  apply_update(decayed, g, 0.1, 0.1);
  EXPECT_NEAR(decayed.w(0), 0.97, 1e-15);
}

TEST(ApplyUpdate, SparseEmbeddingStep) {
  Matrix v(2, 2);
  v << 1, 2,
       3, 4;
  ModelParams p = zero_params({2, 1, 1}, EmbeddingTable({Lemma("a"), Lemma("b")}, v, Vector::Ones(2)));
  Gradients g = Gradients::zeros_like(p);
  g.embedding[1] = Vector::Constant(2, 10.0);
  apply_update(p, g, 0.1, 0.5);
  // touched: theta - 0.1 * (10 + 0.5 theta); untouched: theta - 0.05 theta
  EXPECT_NEAR(p.table.column(0)(0), 0.95, 1e-15);
  EXPECT_NEAR(p.table.column(1)(0), 2.0 - 0.1 * (10.0 + 1.0), 1e-15);
  EXPECT_NEAR(p.table.column(1)(1), 4.0 - 0.1 * (10.0 + 2.0), 1e-15);
  EXPECT_NEAR(p.table.unk()(0), 0.95, 1e-15);

  Gradients bad = Gradients::zeros_like(p);
  bad.embedding[7] = Vector::Zero(2);
  EXPECT_THROW(apply_update(p, bad, 0.1, 0.0), std::out_of_range);
}

TEST(ApplyUpdate, GeometricDecayWithZeroGradients) {
  const auto gc = random_gradient_case({3, 4, 2}, 3, 1.0, Mode::full, 2);
  ModelParams p = gc.params;
  const double eta = 0.1, lambda = 0.5;
  const Gradients zero = Gradients::zeros_like(p);
  for (int k = 1; k <= 20; ++k) {
    apply_update(p, zero, eta, lambda);
    const double factor = std::pow(1.0 - eta * lambda, k);
    EXPECT_LE((p.R - factor * gc.params.R).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((p.w - factor * gc.params.w).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((p.b_h - factor * gc.params.b_h).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((p.table.storage() - factor * gc.params.table.storage()).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(ApplyUpdate, FrozenTableUntouched) {
  const auto gc = random_gradient_case({3, 4, 2}, 3, 1.0, Mode::full, 2);
  ModelParams p = gc.params;
  Gradients g = Gradients::zeros_like(p);
  g.embedding[0] = Vector::Ones(3);
  apply_update(p, g, 0.1, 0.5, false);
  EXPECT_EQ(p.table, gc.params.table);
  EXPECT_NE(p.R, gc.params.R);
}

TEST(Train, ZeroEpochsReturnsInit) {
  Hyperparams h = small_hyper();
  h.epochs = 0;
  const std::vector<EventSequence> corpus = {{"s", {make_event("go"), make_event("fill")}}};
  const ModelParams init = init_params(h.dims, 1, collect_vocabulary(corpus));
  const TrainResult r = train(corpus, h, init);
  EXPECT_TRUE(r.params == init);
  EXPECT_TRUE(r.history.empty());
}

TEST(Train, TwoEventSequenceConverges) {
  // w starts at zero, so only w moves at first; one pair per epoch at eta = 0.01
  // needs a few thousand epochs to clear the margin.
  Hyperparams h;
  const std::vector<EventSequence> corpus = {{"s", {make_event("board", {"bus"}), make_event("pay", {"fare"})}}};
  const ModelParams init = init_params(h.dims, h.seed, collect_vocabulary(corpus));

  const TrainResult early = train(corpus, h, init);
  ASSERT_EQ(early.history.size(), 200u);
  for (std::size_t k = 1; k < early.history.size(); ++k) {
    EXPECT_LE(early.history[k].loss, early.history[k - 1].loss);
  }
  EXPECT_LT(early.history.back().loss, early.history.front().loss);
  EXPECT_GT(score_event(corpus[0].events[0], early.params, h.mode),
            score_event(corpus[0].events[1], early.params, h.mode));

  h.epochs = 5000;
  const TrainResult r = train(corpus, h, init);
  EXPECT_EQ(r.history.back().violations, 0u);
  EXPECT_GE(score_event(corpus[0].events[0], r.params, h.mode),
            score_event(corpus[0].events[1], r.params, h.mode) + h.gamma);
}

TEST(Train, DeterministicAndShuffleAware) {
  SynthConfig sc;
  sc.num_event_types = 6;
  sc.esds_per_scenario = 8;
  sc.dropout = 0.3;
  sc.seed = 5;
  const auto seqs = generate_synthetic(sc).corpus.sequences();
  Hyperparams h;
  h.dims = {8, 8, 8};
  h.epochs = 20;
  h.seed = 17;
  const ModelParams init = init_params(h.dims, h.seed, collect_vocabulary(seqs));

  const TrainResult a = train(seqs, h, init);
  const TrainResult b = train(seqs, h, init);
  EXPECT_TRUE(a.params == b.params);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].violations, b.history[i].violations);
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
  }

  h.shuffle = true;
  const TrainResult c = train(seqs, h, init);
  const TrainResult d = train(seqs, h, init);
  EXPECT_TRUE(c.params == d.params);
  EXPECT_FALSE(c.params == a.params);
}

TEST(Train, SeparableCorpusStaysSolvedWithoutDecay) {
  SynthConfig sc;
  sc.num_event_types = 5;
  sc.esds_per_scenario = 6;
  sc.seed = 9;
  const auto seqs = generate_synthetic(sc).corpus.sequences();
  Hyperparams h;
  h.lambda = 0.0;
  h.dims = {10, 10, 10};
  h.epochs = 300;
  const TrainResult r = train(seqs, h, init_params(h.dims, 3, collect_vocabulary(seqs)));

  std::size_t first_zero = r.history.size();
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    if (r.history[i].violations == 0) {
      first_zero = i;
      break;
    }
  }
  ASSERT_LT(first_zero, r.history.size());
  for (std::size_t i = first_zero; i < r.history.size(); ++i) {
    EXPECT_EQ(r.history[i].violations, 0u);
    EXPECT_EQ(r.history[i].loss, 0.0);
  }
}

TEST(Train, RejectsBadInput) {
  Hyperparams h = small_hyper();
  const std::vector<EventSequence> empty;
  const std::vector<EventSequence> corpus = {{"s", {make_event("go"), make_event("fill")}}};
  const ModelParams init = init_params(h.dims, 1, collect_vocabulary(corpus));
  EXPECT_THROW(train(empty, h, init), std::invalid_argument);

  Hyperparams other = h;
  other.dims = {3, 4, 3};
  EXPECT_THROW(train(corpus, other, init), std::invalid_argument);

  Hyperparams bad_gamma = h;
  bad_gamma.gamma = 0.0;
  EXPECT_THROW(train(corpus, bad_gamma, init), std::invalid_argument);
}
