#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "evemb/corpus_io.hpp"
#include "evemb/random.hpp"

namespace evemb {

namespace {

constexpr int kDistractorPool = 3;

std::string predicate_name(int group, int variant) {
  std::string name = "verb" + std::to_string(group);
  if (variant > 0) name += "_v" + std::to_string(variant);
  return name;
}

/// How each event type is spelled, minus the per-mention choices.
struct TypeSpec {
  int predicate_group = 0;
  std::string argument;
};

class Renderer {
 public:
  Renderer(const SynthConfig& config, std::vector<TypeSpec> types, Rng& rng)
      : config_(config), types_(std::move(types)), rng_(rng) {}

  Event render(int type) {
    const TypeSpec& spec = types_[static_cast<std::size_t>(type)];
    const auto variant = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(config_.lexical_variants)));
    Event ev{Lemma(predicate_name(spec.predicate_group, variant)), {}};
    ev.args.emplace_back(spec.argument);
    return ev;
  }

 private:
  const SynthConfig& config_;
  std::vector<TypeSpec> types_;
  Rng& rng_;
};

}  // namespace

void SynthConfig::validate() const {
  if (num_event_types < 2) throw std::invalid_argument("num_event_types must be >= 2");
  if (esds_per_scenario < 1) throw std::invalid_argument("esds_per_scenario must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (lexical_variants < 1) throw std::invalid_argument("lexical_variants must be >= 1");
}

SyntheticData generate_synthetic(const SynthConfig& config) {
  config.validate();
  const int L = config.num_event_types;
  Rng rng(config.seed);

  // latent[p] is the type id at latent position p. Type ids are shuffled
  // against positions so lemma names say nothing about the order.
  std::vector<int> latent(static_cast<std::size_t>(L));
  std::iota(latent.begin(), latent.end(), 0);
  shuffle(std::span<int>(latent), rng);

  std::vector<TypeSpec> types(static_cast<std::size_t>(L));
  for (int p = 0; p < L; ++p) {
    const int type = latent[static_cast<std::size_t>(p)];
    TypeSpec& spec = types[static_cast<std::size_t>(type)];
    if (config.arg_determined) {
      // Positions p and L-1-p share a predicate. The group sequence along
      // the latent order is a palindrome, so every predicate pair occurs
      // equally often in both orders.
      const int mirror = std::min(p, L - 1 - p);
      spec.predicate_group = latent[static_cast<std::size_t>(mirror)];
      spec.argument = "obj" + std::to_string(type);
    } else {
      spec.predicate_group = type;
      spec.argument = "item" + std::to_string(uniform_index(rng, kDistractorPool));
    }
  }
  Renderer renderer(config, std::move(types), rng);

  SyntheticData data;
  auto& sequences = data.corpus.scenarios[std::string(kSyntheticScenario)];
  sequences.reserve(static_cast<std::size_t>(config.esds_per_scenario));
  for (int k = 0; k < config.esds_per_scenario; ++k) {
    std::vector<int> kept;
    while (kept.empty()) {
      for (int p = 0; p < L; ++p) {
        if (uniform01(rng) >= config.dropout) kept.push_back(latent[static_cast<std::size_t>(p)]);
      }
    }
    EventSequence seq{std::string(kSyntheticScenario), {}};
    seq.events.reserve(kept.size());
    for (int type : kept) seq.events.push_back(renderer.render(type));
    sequences.push_back(std::move(seq));
  }

  data.pairs.reserve(static_cast<std::size_t>(L * (L - 1)));
  for (int p = 0; p < L; ++p) {
    for (int q = p + 1; q < L; ++q) {
      const Event before = renderer.render(latent[static_cast<std::size_t>(p)]);
      const Event after = renderer.render(latent[static_cast<std::size_t>(q)]);
      data.pairs.push_back({std::string(kSyntheticScenario), before, after, true});
      data.pairs.push_back({std::string(kSyntheticScenario), after, before, false});
    }
  }
  return data;
}

}  // namespace evemb
