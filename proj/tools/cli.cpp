#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>

#include "evemb/corpus_io.hpp"
#include "evemb/error.hpp"
#include "evemb/evaluation.hpp"
#include "evemb/model.hpp"
#include "evemb/training.hpp"

namespace evemb::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Parse>
auto read_file(const std::string& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for reading");
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << contents;
  if (!out.flush()) throw DataError(path + ": write failed");
}

Dims parse_dims(const std::string& text) {
  std::vector<Index> values;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      values.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw UsageError("--dims expects three positive integers d,h,e, got '" + text + "'");
    }
  }
  if (values.size() != 3) throw UsageError("--dims expects three positive integers d,h,e, got '" + text + "'");
  return {values[0], values[1], values[2]};
}

Mode parse_mode_flag(const std::string& text) {
  try {
    return parse_mode(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string dims_string(const Dims& d) {
  return std::to_string(d.d) + "," + std::to_string(d.h) + "," + std::to_string(d.e);
}

/// Options shared by `train` and `report`.
struct HyperOptions {
  std::string mode = "full";
  std::string dims = "50,50,50";
  Hyperparams hyper;

  void add_to(CLI::App& cmd, bool with_mode) {
    if (with_mode) cmd.add_option("--mode", mode, "full or verb")->capture_default_str();
    cmd.add_option("--gamma", hyper.gamma, "ranking margin")->capture_default_str();
    cmd.add_option("--eta", hyper.eta, "learning rate")->capture_default_str();
    cmd.add_option("--lambda", hyper.lambda, "weight decay")->capture_default_str();
    cmd.add_option("--epochs", hyper.epochs, "training epochs")->capture_default_str();
    cmd.add_option("--dims", dims, "d,h,e")->capture_default_str();
    cmd.add_option("--seed", hyper.seed, "random seed")->capture_default_str();
    cmd.add_flag("--freeze-embeddings", hyper.freeze_embeddings, "keep word vectors fixed");
    cmd.add_flag("--shuffle", hyper.shuffle, "seeded reshuffle of sequences every epoch");
  }

  Hyperparams resolve() {
    hyper.mode = parse_mode_flag(mode);
    hyper.dims = parse_dims(dims);
    try {
      hyper.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return hyper;
  }
};

std::string describe(const Hyperparams& h) {
  std::ostringstream s;
  s << "mode=" << to_string(h.mode) << " gamma=" << format_real(h.gamma) << " eta=" << format_real(h.eta)
    << " lambda=" << format_real(h.lambda) << " epochs=" << h.epochs << " dims=" << dims_string(h.dims)
    << " seed=" << h.seed << " freeze_embeddings=" << (h.freeze_embeddings ? 1 : 0)
    << " shuffle=" << (h.shuffle ? 1 : 0);
  return s.str();
}

/// `embeddings_path` only labels errors from a mismatched pretrained table.
TrainResult train_model(std::span<const EventSequence> sequences, const Hyperparams& hyper,
                        const EmbeddingTable* pretrained, const std::string& embeddings_path) {
  const std::vector<Lemma> vocab = collect_vocabulary(sequences);
  ModelParams init = [&] {
    try {
      return init_params(hyper.dims, hyper.seed, vocab, pretrained);
    } catch (const std::invalid_argument& e) {
      throw DataError(embeddings_path + ": " + e.what());
    }
  }();
  return train(sequences, hyper, std::move(init));
}

// ---------------------------------------------------------------------------

struct TrainCommand {
  std::string corpus;
  std::string out_path;
  std::string embeddings;
  HyperOptions options;

  void run(std::ostream& out, std::ostream& err) {
    const Hyperparams hyper = options.resolve();
    err << "evemb train corpus=" << corpus << " out=" << out_path
        << " embeddings=" << (embeddings.empty() ? "-" : embeddings) << ' ' << describe(hyper) << '\n';

    const Corpus c = read_file(corpus, [](std::istream& in) { return parse_corpus(in); });
    const std::vector<EventSequence> sequences = c.sequences();
    if (sequences.empty()) throw DataError(corpus + ": corpus contains no event sequences");

    std::optional<EmbeddingTable> pretrained;
    if (!embeddings.empty()) {
      pretrained = read_file(embeddings, [](std::istream& in) { return parse_embeddings(in); });
    }

    const TrainResult result = train_model(sequences, hyper, pretrained ? &*pretrained : nullptr, embeddings);

    std::ostringstream model;
    write_model(model, result.params);
    write_file(out_path, model.str());

    const EpochStats last = result.history.empty() ? EpochStats{} : result.history.back();
    char buf[160];
    std::snprintf(buf, sizeof buf, "epochs=%d sequences=%zu vocab=%zu final_violations=%zu final_loss=%.6f",
                  hyper.epochs, sequences.size(), result.params.table.size(), last.violations, last.loss);
    out << buf << '\n';
  }
};

struct EvalCommand {
  std::string model;
  std::string pairs;
  std::string mode = "full";

  void run(std::ostream& out, std::ostream& err) {
    const Mode m = parse_mode_flag(mode);
    err << "evemb eval model=" << model << " pairs=" << pairs << " mode=" << to_string(m) << '\n';
    const ModelParams params = read_file(model, [](std::istream& in) { return read_model(in); });
    const auto labeled = read_file(pairs, [](std::istream& in) { return parse_pairs(in); });
    if (labeled.empty()) throw DataError(pairs + ": no evaluation pairs");
    out << evaluate(labeled, params, m).format() << '\n';
  }
};

struct OrderCommand {
  std::string model;
  std::string events;
  std::string mode = "full";

  void run(std::ostream& out, std::ostream& err) {
    const Mode m = parse_mode_flag(mode);
    err << "evemb order model=" << model << " events=" << events << " mode=" << to_string(m) << '\n';
    const ModelParams params = read_file(model, [](std::istream& in) { return read_model(in); });

    struct Scored {
      std::string line;
      double score;
    };
    const auto items = read_file(events, [&](std::istream& in) {
      std::vector<Scored> scored;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const Event ev = parse_event_line(line, line_no);
        scored.push_back({line, score_event(ev, params, m)});
      }
      return scored;
    });

    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&items](std::size_t a, std::size_t b) { return items[a].score > items[b].score; });
    char buf[64];
    for (std::size_t i : order) {
      std::snprintf(buf, sizeof buf, "%.6f", items[i].score);
      out << buf << '\t' << items[i].line << '\n';
    }
  }
};

struct BaselineCommand {
  std::string corpus;
  std::string pairs;
  std::uint64_t seed = 0;

  void run(std::ostream& out, std::ostream& err) {
    err << "evemb baseline corpus=" << corpus << " pairs=" << pairs << " seed=" << seed << '\n';
    const Corpus c = read_file(corpus, [](std::istream& in) { return parse_corpus(in); });
    const auto labeled = read_file(pairs, [](std::istream& in) { return parse_pairs(in); });
    if (labeled.empty()) throw DataError(pairs + ": no evaluation pairs");
    out << evaluate_bl(labeled, train_bl(c, seed)).format() << '\n';
  }
};

struct SynthCommand {
  std::string out_corpus;
  std::string out_pairs;
  SynthConfig config;

  void run(std::ostream& out, std::ostream& err) {
    try {
      config.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    err << "evemb synth out_corpus=" << out_corpus << " out_pairs=" << out_pairs
        << " types=" << config.num_event_types << " esds=" << config.esds_per_scenario
        << " dropout=" << format_real(config.dropout) << " variants=" << config.lexical_variants
        << " arg_determined=" << (config.arg_determined ? 1 : 0) << " seed=" << config.seed << '\n';
    const SyntheticData data = generate_synthetic(config);
    std::ostringstream corpus_text, pairs_text;
    write_corpus(corpus_text, data.corpus);
    write_pairs(pairs_text, data.pairs);
    write_file(out_corpus, corpus_text.str());
    write_file(out_pairs, pairs_text.str());
    out << "sequences=" << data.corpus.sequence_count() << " pairs=" << data.pairs.size() << '\n';
  }
};

/// Per-scenario BL / EE_verb / EE comparison. One model per scenario, trained
/// on that scenario's sequences with shared hyperparameters.
struct ReportCommand {
  std::string corpus;
  std::string pairs;
  std::string embeddings;
  HyperOptions options;

  void run(std::ostream& out, std::ostream& err) {
    Hyperparams hyper = options.resolve();
    err << "evemb report corpus=" << corpus << " pairs=" << pairs
        << " embeddings=" << (embeddings.empty() ? "-" : embeddings) << ' ' << describe(hyper) << '\n';
    const Corpus c = read_file(corpus, [](std::istream& in) { return parse_corpus(in); });
    const auto labeled = read_file(pairs, [](std::istream& in) { return parse_pairs(in); });
    std::optional<EmbeddingTable> pretrained;
    if (!embeddings.empty()) {
      pretrained = read_file(embeddings, [](std::istream& in) { return parse_embeddings(in); });
    }

    std::map<std::string, std::vector<LabeledPair>> by_scenario;
    for (const LabeledPair& p : labeled) by_scenario[p.scenario].push_back(p);
    if (by_scenario.empty()) throw DataError(pairs + ": no evaluation pairs");

    std::vector<ScenarioResult> rows;
    for (const auto& [scenario, scenario_pairs] : by_scenario) {
      const auto it = c.scenarios.find(scenario);
      if (it == c.scenarios.end() || it->second.empty()) {
        throw DataError(corpus + ": no training sequences for scenario '" + scenario + "'");
      }
      const std::vector<EventSequence>& seqs = it->second;
      const EmbeddingTable* table = pretrained ? &*pretrained : nullptr;

      ScenarioResult row{scenario, {}, {}, {}};
      row.bl = evaluate_bl(scenario_pairs, train_bl(seqs, hyper.seed));
      hyper.mode = Mode::verb_only;
      row.ee_verb = evaluate(scenario_pairs, train_model(seqs, hyper, table, embeddings).params, Mode::verb_only);
      hyper.mode = Mode::full;
      row.ee = evaluate(scenario_pairs, train_model(seqs, hyper, table, embeddings).params, Mode::full);
      rows.push_back(std::move(row));
    }
    out << format_results_table(rows);
  }
};

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event embeddings for script ordering", "evemb"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  TrainCommand train_cmd;
  auto* train_app = app.add_subcommand("train", "learn a model from an event-sequence corpus");
  train_app->add_option("--corpus", train_cmd.corpus, "corpus file")->required();
  train_app->add_option("--out", train_cmd.out_path, "model output file")->required();
  train_app->add_option("--embeddings", train_cmd.embeddings, "pretrained embedding file");
  train_cmd.options.add_to(*train_app, true);

  EvalCommand eval_cmd;
  auto* eval_app = app.add_subcommand("eval", "precision/recall/F1 of a model on labeled pairs");
  eval_app->add_option("--model", eval_cmd.model, "model file")->required();
  eval_app->add_option("--pairs", eval_cmd.pairs, "labeled pairs file")->required();
  eval_app->add_option("--mode", eval_cmd.mode, "full or verb")->capture_default_str();

  OrderCommand order_cmd;
  auto* order_app = app.add_subcommand("order", "print events sorted by descending score");
  order_app->add_option("--model", order_cmd.model, "model file")->required();
  order_app->add_option("--events", order_cmd.events, "file of event lines")->required();
  order_app->add_option("--mode", order_cmd.mode, "full or verb")->capture_default_str();

  BaselineCommand baseline_cmd;
  auto* baseline_app = app.add_subcommand("baseline", "verb-frequency baseline on labeled pairs");
  baseline_app->add_option("--corpus", baseline_cmd.corpus, "corpus file")->required();
  baseline_app->add_option("--pairs", baseline_cmd.pairs, "labeled pairs file")->required();
  baseline_app->add_option("--seed", baseline_cmd.seed, "tie-breaking seed")->capture_default_str();

  SynthCommand synth_cmd;
  auto* synth_app = app.add_subcommand("synth", "generate a synthetic script corpus and test pairs");
  synth_app->add_option("--out-corpus", synth_cmd.out_corpus, "corpus output file")->required();
  synth_app->add_option("--out-pairs", synth_cmd.out_pairs, "pairs output file")->required();
  synth_app->add_option("--types", synth_cmd.config.num_event_types, "event types")->capture_default_str();
  synth_app->add_option("--esds", synth_cmd.config.esds_per_scenario, "sequences")->capture_default_str();
  synth_app->add_option("--dropout", synth_cmd.config.dropout, "event drop probability")->capture_default_str();
  synth_app->add_option("--variants", synth_cmd.config.lexical_variants, "predicate spellings per type")
      ->capture_default_str();
  synth_app->add_flag("--arg-determined", synth_cmd.config.arg_determined, "types share predicates");
  synth_app->add_option("--seed", synth_cmd.config.seed, "random seed")->capture_default_str();

  ReportCommand report_cmd;
  auto* report_app = app.add_subcommand("report", "per-scenario BL / EE_verb / EE table");
  report_app->add_option("--corpus", report_cmd.corpus, "corpus file")->required();
  report_app->add_option("--pairs", report_cmd.pairs, "labeled pairs file")->required();
  report_app->add_option("--embeddings", report_cmd.embeddings, "pretrained embedding file");
  report_cmd.options.add_to(*report_app, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*train_app) train_cmd.run(out, err);
    if (*eval_app) eval_cmd.run(out, err);
    if (*order_app) order_cmd.run(out, err);
    if (*baseline_app) baseline_cmd.run(out, err);
    if (*synth_app) synth_cmd.run(out, err);
    if (*report_app) report_cmd.run(out, err);
  } catch (const UsageError& e) {
    err << "evemb: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "evemb: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "evemb: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace evemb::cli
