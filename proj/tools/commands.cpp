#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ctxspell/bayes.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/eval.hpp"
#include "ctxspell/features.hpp"
#include "ctxspell/winnow.hpp"

namespace fs = std::filesystem;

namespace ctxspell::cli {

namespace {

CorpusFormat corpus_format(const Options& o) {
  return o.format == "raw" ? CorpusFormat::kRaw : CorpusFormat::kPresplit;
}

PruneMode prune_mode(const Options& o) {
  return o.mode == "pruned" ? PruneMode::kPruned : PruneMode::kUnpruned;
}

ExtractionParams extraction(const Options& o) {
  ExtractionParams p{o.window, o.collocation_length};
  p.validate();
  return p;
}

WinnowParams winnow_params(const Options& o) {
  WinnowParams p;
  p.theta = o.theta;
  p.alpha = o.alpha;
  p.default_weight = o.default_weight;
  p.cycles = o.cycles;
  p.validate();
  return p;
}

TagDictionary tags(const Options& o) {
  return o.tagdict.empty() ? TagDictionary{} : TagDictionary::load(o.tagdict);
}

std::vector<System> systems(const Options& o, std::vector<System> fallback) {
  if (o.systems.empty()) return fallback;
  std::vector<System> out;
  for (const auto& name : o.systems) {
    auto s = parse_system(name);
    if (!s) throw Error("unknown system '" + name + "'");
    out.push_back(*s);
  }
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(std::string("missing required flag ") + flag);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

fs::path model_path(const fs::path& dir, const ConfusionSet& set, System system) {
  return dir / (set.slug() + "." + std::string(system_name(system)) + ".model");
}

Corpus read_input(const Options& o) {
  if (o.input == "-") return read_corpus(std::cin, corpus_format(o));
  return load_corpus(o.input, corpus_format(o));
}

// Sets that never occur in the training corpus cannot be trained; skip them.
std::vector<ConfusionSet> trainable_sets(std::vector<ConfusionSet> sets, const Corpus& corpus) {
  std::vector<ConfusionSet> kept;
  for (auto& set : sets) {
    if (find_occurrences(corpus, set).empty())
      std::cerr << "warning: skipping {" << set.name() << "}: no occurrence in the training corpus\n";
    else
      kept.push_back(std::move(set));
  }
  if (kept.empty()) throw Error("no confusion set occurs in the training corpus");
  return kept;
}

std::string fixed(double v, int decimals) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

}  // namespace

// ------------------------------------------------------------------ train

int cmd_train(const Options& o, std::ostream& out) {
  require(o.corpus, "--corpus");
  require(o.confusion_sets, "--confusion-sets");
  require(o.out, "--out");
  const auto params = extraction(o);
  const auto wparams = winnow_params(o);
  const auto dict = tags(o);
  const Corpus corpus = load_corpus(o.corpus, corpus_format(o));
  const auto sets = trainable_sets(load_confusion_sets(o.confusion_sets), corpus);
  const auto chosen = systems(o, {System::kBayes, System::kWinnow});
  const fs::path dir(o.out);

  for (const auto& set : sets) {
    const FeatureStats stats = collect_stats(corpus, set, params, dict);
    const FeatureIndex retained = prune(stats, PruningPolicy{prune_mode(o)});
    {
      auto f = open_output(dir / (set.slug() + ".features"));
      write_feature_dump(f, retained);
    }
    std::vector<Example> examples;
    for (System system : chosen) {
      const auto path = model_path(dir, set, system);
      auto file = open_output(path);
      auto bayes = [&](BayesOptions options, FeatureIndex features) {
        const BayesModel model = train_bayes(set, params, stats, std::move(features), options);
        for (auto m : model.unseen_members())
          std::cerr << "warning: '" << set.member_text(m)
                    << "' never occurs in the training corpus\n";
        save_bayes(file, model);
      };
      if (system == System::kBaseline) {
        bayes({}, FeatureIndex{});
      } else if (!is_winnow(system)) {
        bayes(bayes_options(system), retained);
      } else {
        if (examples.empty()) examples = make_examples(corpus, set, retained, params, dict);
        const NetworkConfig config = winnow_config(system);
        WinnowNetwork net(set, params, retained, wparams, config);
        if (config.init == InitMode::kBayesian)
          init_bayesian(net, train_bayes(set, params, stats, retained,
                                         bayes_options(System::kSimplifiedBayes)));
        if (winnow_learns(system)) train_network(net, examples);
        save_winnow(file, net);
      }
      if (!file) throw Error("write failed: " + path.string());
      out << set.name() << '\t' << system_name(system) << '\t' << stats.total() << '\t'
          << retained.size() << '\t' << path.string() << '\n';
    }
  }
  return 0;
}

// --------------------------------------------------------------- classify

int cmd_classify(const Options& o, std::ostream& out) {
  require(o.confusion_sets, "--confusion-sets");
  require(o.models, "--models");
  std::vector<ConfusionSet> sets;
  const auto chosen = systems(o, {System::kWinnow});
  if (chosen.size() != 1) throw Error("classify takes exactly one --system");
  const System system = chosen.front();
  const auto dict = tags(o);

  struct Loaded {
    std::optional<BayesModel> bayes;
    std::optional<WinnowNetwork> winnow;
  };
  std::vector<Loaded> models;
  for (auto& set : load_confusion_sets(o.confusion_sets)) {
    const auto path = model_path(o.models, set, system);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      std::cerr << "warning: no model for {" << set.name() << "} at " << path.string() << '\n';
      continue;
    }
    Loaded l;
    if (is_winnow(system))
      l.winnow.emplace(load_winnow(in));
    else
      l.bayes.emplace(load_bayes(in));
    models.push_back(std::move(l));
    sets.push_back(std::move(set));
  }
  if (sets.empty())
    throw Error("missing models: no " + std::string(system_name(system)) + " model in " + o.models);

  const Corpus text = read_input(o);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& set = sets[k];
    const auto& m = models[k];
    const ExtractionParams& params = m.winnow ? m.winnow->extraction() : m.bayes->extraction();
    const FeatureIndex& features = m.winnow ? m.winnow->features() : m.bayes->features();
    for (const auto& occ : find_occurrences(text, set)) {
      const ActiveSet active = extract_active(text[occ.sentence], occ, features, params, dict);
      std::size_t suggested;
      std::vector<double> scores;
      if (m.winnow) {
        auto d = classify_winnow(*m.winnow, active);
        suggested = d.chosen;
        scores = std::move(d.activations);
      } else {
        auto p = classify_bayes(*m.bayes, active);
        suggested = p.chosen;
        scores = std::move(p.scores);
      }
      out << occ.sentence + 1 << '\t' << occ.span_start << '\t' << occ.span_len << '\t'
          << set.name() << '\t' << set.member_text(occ.member) << '\t'
          << set.member_text(suggested) << '\t'
          << (suggested == occ.member ? "ok" : "suspect") << '\t';
      for (std::size_t i = 0; i < scores.size(); ++i)
        out << (i ? ";" : "") << set.member_text(i) << '=' << fixed(scores[i], 6);
      out << '\n';
    }
  }
  return 0;
}

// ------------------------------------------------------------ eval/ablate

namespace {

int run_report(const Options& o, std::ostream& out, std::vector<System> default_systems,
               const char* title) {
  require(o.corpus, "--corpus");
  require(o.confusion_sets, "--confusion-sets");
  const auto protocol = parse_protocol(o.protocol);
  if (!protocol) throw Error("unknown protocol '" + o.protocol + "'");
  const Corpus corpus = load_corpus(o.corpus, corpus_format(o));
  Corpus second;
  if (!o.test_corpus.empty()) second = load_corpus(o.test_corpus, corpus_format(o));
  const auto dict = tags(o);

  ExperimentConfig config;
  config.sets = trainable_sets(load_confusion_sets(o.confusion_sets), corpus);
  config.systems = systems(o, std::move(default_systems));
  config.mode = prune_mode(o);
  config.protocol = *protocol;
  config.extraction = extraction(o);
  config.winnow = winnow_params(o);
  config.seed = o.seed;
  config.corrupt_percent = o.corrupt_pct.empty() ? 0.0 : o.corrupt_pct.front();
  const ExperimentInputs inputs{corpus, o.test_corpus.empty() ? nullptr : &second, dict};

  const EvalReport report = run_experiment(inputs, config);
  out << title << " (" << protocol_name(config.protocol) << ", "
      << (config.mode == PruneMode::kPruned ? "pruned" : "unpruned") << ")\n\n";
  write_report_table(out, report);

  std::optional<std::ofstream> tsv;
  if (!o.out.empty()) {
    tsv.emplace(open_output(fs::path(o.out) / "report.tsv"));
    write_report_tsv(*tsv, report);
  }

  // Companion run for the cross-corpus protocols: within vs. across (two
  // proportions), sup-only vs. sup/unsup (McNemar on the same test cases).
  if (config.protocol != Protocol::kWithin) {
    ExperimentConfig base = config;
    base.protocol = config.protocol == Protocol::kAcross ? Protocol::kWithin : Protocol::kAcross;
    const EvalReport reference = run_experiment(inputs, base);
    const bool paired = config.protocol == Protocol::kSupUnsup;
    const auto comparisons = compare_reports(reference, report, paired);
    const char* a_name = paired ? "sup_only" : "within";
    const char* b_name = paired ? "sup_unsup" : "across";
    out << "\n" << a_name << " vs " << b_name << " ("
        << (paired ? "McNemar" : "two-proportion test") << "):\n";
    std::ostringstream rows;
    rows << "system\t" << a_name << "_cases\t" << a_name << "\t" << b_name << "_cases\t"
         << b_name << "\tp_value\n";
    for (const auto& c : comparisons) {
      const double pa = c.cases_a ? 100.0 * c.correct_a / c.cases_a : 0.0;
      const double pb = c.cases_b ? 100.0 * c.correct_b / c.cases_b : 0.0;
      out << "  " << system_name(c.system) << ": " << fixed(pa, 1) << " -> " << fixed(pb, 1)
          << "  p = " << c.p_value << (c.p_value < 0.05 ? "  (significant at 0.05)" : "")
          << '\n';
      rows << system_name(c.system) << '\t' << c.cases_a << '\t' << fixed(pa, 4) << '\t'
           << c.cases_b << '\t' << fixed(pb, 4) << '\t' << c.p_value << '\n';
    }
    if (!o.out.empty()) {
      auto f = open_output(fs::path(o.out) / "comparison.tsv");
      f << rows.str();
    }
  }

  // Corruption curve: sup/unsup score per corruption level.
  if (config.protocol == Protocol::kSupUnsup && o.corrupt_pct.size() > 1) {
    ExperimentConfig sup = config;
    sup.protocol = Protocol::kAcross;
    const EvalReport sup_only = run_experiment(inputs, sup);
    std::ostringstream curve;
    curve << "corrupt_pct\tsystem\tsup_only\tsup_unsup\n";
    for (double pct : o.corrupt_pct) {
      ExperimentConfig c = config;
      c.corrupt_percent = pct;
      const EvalReport r = run_experiment(inputs, c);
      for (std::size_t s = 0; s < r.systems.size(); ++s)
        curve << pct << '\t' << system_name(r.systems[s]) << '\t'
              << fixed(sup_only.overall_percent(s), 4) << '\t'
              << fixed(r.overall_percent(s), 4) << '\n';
    }
    out << "\nCorruption curve:\n" << curve.str();
    if (!o.out.empty()) {
      auto f = open_output(fs::path(o.out) / "curve.tsv");
      f << curve.str();
    }
  }

  // Winnow vs. Bayes ordering, reported for corpus-scale runs.
  std::optional<std::size_t> bayes_col, winnow_col;
  for (std::size_t s = 0; s < report.systems.size(); ++s) {
    if (report.systems[s] == System::kBayes) bayes_col = s;
    if (report.systems[s] == System::kWinnow) winnow_col = s;
  }
  if (bayes_col && winnow_col && report.total_cases() > 0) {
    const double w = report.overall_percent(*winnow_col);
    const double b = report.overall_percent(*bayes_col);
    out << "\nwinnow " << fixed(w, 1) << (w > b ? " > " : (w == b ? " = " : " < ")) << "bayes "
        << fixed(b, 1) << " overall\n";
  }
  return 0;
}

}  // namespace

int cmd_eval(const Options& o, std::ostream& out) {
  return run_report(o, out, {System::kBaseline, System::kBayes, System::kWinnow},
                    "Evaluation");
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const auto ladder = ablation_ladder();
  return run_report(o, out, std::vector<System>(ladder.begin(), ladder.end()),
                    "Ablation");
}

// ---------------------------------------------------------------- corrupt

int cmd_corrupt(const Options& o, std::ostream& out) {
  require(o.corpus, "--corpus");
  require(o.confusion_sets, "--confusion-sets");
  require(o.out, "--out");
  if (o.corrupt_pct.size() != 1) throw Error("corrupt takes exactly one --corrupt-pct");
  const double pct = o.corrupt_pct.front();
  Corpus corpus = load_corpus(o.corpus, corpus_format(o));
  const auto sets = load_confusion_sets(o.confusion_sets);

  std::ostringstream log;
  log << "set\tsentence\tspan_start\tfrom\tto\n";
  std::size_t total = 0;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    // Sets are applied in file order, each with its own seed stream.
    auto result = corrupt(corpus, sets[k], pct, o.seed + k);
    std::ostringstream entries;
    write_change_log(entries, sets[k], result.changes);
    std::istringstream lines(entries.str());
    for (std::string line; std::getline(lines, line);) log << sets[k].name() << '\t' << line << '\n';
    total += result.changes.size();
    corpus = std::move(result.sentences);
  }
  const fs::path dir(o.out);
  {
    auto f = open_output(dir / "corpus.txt");
    write_corpus(f, corpus);
  }
  {
    auto f = open_output(dir / "changes.tsv");
    f << log.str();
  }
  out << "corrupted " << total << " occurrence(s); wrote " << (dir / "corpus.txt").string()
      << " and " << (dir / "changes.tsv").string() << '\n';
  return 0;
}

}  // namespace ctxspell::cli
