#include "ctxspell/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "ctxspell/error.hpp"
#include "ctxspell/rng.hpp"
#include "ctxspell/stats.hpp"

namespace ctxspell {

// ----------------------------------------------------------------- Splits

Split split_corpus(const Corpus& sentences, const SplitSpec& spec) {
  if (sentences.size() < 2) throw Error("cannot split fewer than two sentences");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw Error("train fraction must be in (0, 1)");
  const std::size_t n = sentences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(i + 1)]);

  const auto n_train =
      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  Split split;
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? split.train : split.test).push_back(sentences[i]);
  return split;
}

BaselinePredictor baseline_classify(const FeatureStats& stats) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < stats.members(); ++i)
    if (stats.occurrences(i) > stats.occurrences(best)) best = i;
  return BaselinePredictor(best);
}

// ----------------------------------------------------------- Significance

TestResult mcnemar_from_counts(std::uint64_t b, std::uint64_t c) {
  if (b + c == 0) return {};
  const double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  const double statistic = diff * diff / static_cast<double>(b + c);
  return {statistic, stats::chi_square_sf_1df(statistic)};
}

TestResult mcnemar_test(std::span<const bool> a, std::span<const bool> b) {
  if (a.size() != b.size()) throw Error("McNemar test needs paired outcomes");
  std::uint64_t only_a = 0, only_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) ++only_a;
    if (!a[i] && b[i]) ++only_b;
  }
  return mcnemar_from_counts(only_a, only_b);
}

TestResult two_proportion_test(std::uint64_t correct1, std::uint64_t n1,
                               std::uint64_t correct2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) throw Error("two-proportion test needs non-empty samples");
  const double p1 = static_cast<double>(correct1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(correct2) / static_cast<double>(n2);
  const double pooled =
      static_cast<double>(correct1 + correct2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  if (se == 0.0) return {};
  const double z = (p1 - p2) / se;
  return {z, 2.0 * stats::normal_sf(std::fabs(z))};
}

// ---------------------------------------------------------------- Systems

namespace {

struct SystemInfo {
  System system;
  std::string_view name;
};

constexpr std::array<SystemInfo, 9> kSystems{{
    {System::kBaseline, "baseline"},
    {System::kBayes, "bayes"},
    {System::kSimplifiedBayes, "simplified-bayes"},
    {System::kBayesMle, "bayes-mle"},
    {System::kWinnow, "winnow"},
    {System::kSimplifiedWinnow, "simplified-winnow"},
    {System::kWinnow1Layer, "winnow-1layer"},
    {System::kWinnow2Layer, "winnow-2layer"},
    {System::kWinnowBayesInit, "winnow-bayes-init"},
}};

constexpr std::array<System, 9> kAllSystems{
    System::kBaseline,         System::kBayes,        System::kSimplifiedBayes,
    System::kBayesMle,         System::kWinnow,       System::kSimplifiedWinnow,
    System::kWinnow1Layer,     System::kWinnow2Layer, System::kWinnowBayesInit};

constexpr std::array<System, 5> kLadder{System::kBayes, System::kSimplifiedBayes,
                                        System::kWinnow1Layer, System::kWinnow2Layer,
                                        System::kWinnowBayesInit};

}  // namespace

std::string_view system_name(System system) {
  for (const auto& info : kSystems)
    if (info.system == system) return info.name;
  return "?";
}

std::optional<System> parse_system(std::string_view name) {
  for (const auto& info : kSystems)
    if (info.name == name) return info.system;
  return std::nullopt;
}

std::span<const System> all_systems() { return kAllSystems; }
std::span<const System> ablation_ladder() { return kLadder; }

bool is_winnow(System s) {
  return s == System::kWinnow || s == System::kSimplifiedWinnow ||
         s == System::kWinnow1Layer || s == System::kWinnow2Layer ||
         s == System::kWinnowBayesInit;
}

BayesOptions bayes_options(System s) {
  switch (s) {
    case System::kSimplifiedBayes: return {Smoothing::kInterpolative, false};
    case System::kBayesMle: return {Smoothing::kMle, true};
    default: return {Smoothing::kInterpolative, true};
  }
}

NetworkConfig winnow_config(System s) {
  using enum Architecture;
  using enum LayerMode;
  using enum InitMode;
  switch (s) {
    case System::kSimplifiedWinnow:
    case System::kWinnow1Layer: return {kFull, kOneLayer, kBayesian};
    case System::kWinnow2Layer: return {kFull, kTwoLayer, kBayesian};
    case System::kWinnowBayesInit: return {kSparse, kTwoLayer, kBayesian};
    default: return {kSparse, kTwoLayer, kUniform};
  }
}

bool winnow_learns(System s) { return s != System::kSimplifiedWinnow; }

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kWithin: return "within";
    case Protocol::kAcross: return "across";
    case Protocol::kSupUnsup: return "supunsup";
  }
  return "?";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  if (name == "within") return Protocol::kWithin;
  if (name == "across") return Protocol::kAcross;
  if (name == "supunsup") return Protocol::kSupUnsup;
  return std::nullopt;
}

// ---------------------------------------------------------------- Reports

std::size_t SetResult::correct(std::size_t system) const {
  const auto& o = outcomes.at(system);
  return static_cast<std::size_t>(std::count(o.begin(), o.end(), true));
}

std::size_t EvalReport::total_cases() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.test_cases();
  return n;
}

std::size_t EvalReport::total_correct(std::size_t system) const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.correct(system);
  return n;
}

double EvalReport::overall_percent(std::size_t system) const {
  const auto n = total_cases();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * static_cast<double>(total_correct(system)) / static_cast<double>(n);
}

double EvalReport::set_percent(std::size_t set, std::size_t system) const {
  const auto& s = sets.at(set);
  if (s.test_cases() == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * static_cast<double>(s.correct(system)) / static_cast<double>(s.test_cases());
}

std::vector<bool> EvalReport::pooled_outcomes(std::size_t system) const {
  std::vector<bool> out;
  for (const auto& s : sets) out.insert(out.end(), s.outcomes[system].begin(), s.outcomes[system].end());
  return out;
}

namespace {

TestResult mcnemar_bits(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw Error("McNemar test needs paired outcomes");
  std::uint64_t only_a = 0, only_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) ++only_a;
    if (!a[i] && b[i]) ++only_b;
  }
  return mcnemar_from_counts(only_a, only_b);
}

}  // namespace

double EvalReport::adjacent_p_value(std::size_t set, std::size_t i) const {
  const auto& s = sets.at(set);
  return mcnemar_bits(s.outcomes.at(i), s.outcomes.at(i + 1)).p_value;
}

double EvalReport::overall_adjacent_p_value(std::size_t i) const {
  return mcnemar_bits(pooled_outcomes(i), pooled_outcomes(i + 1)).p_value;
}

std::vector<Comparison> compare_reports(const EvalReport& a, const EvalReport& b,
                                        bool paired) {
  if (a.systems != b.systems) throw Error("reports cover different systems");
  std::vector<Comparison> out;
  for (std::size_t s = 0; s < a.systems.size(); ++s) {
    Comparison c{a.systems[s]};
    c.correct_a = a.total_correct(s);
    c.cases_a = a.total_cases();
    c.correct_b = b.total_correct(s);
    c.cases_b = b.total_cases();
    c.paired = paired;
    if (paired)
      c.p_value = mcnemar_bits(a.pooled_outcomes(s), b.pooled_outcomes(s)).p_value;
    else if (c.cases_a > 0 && c.cases_b > 0)
      c.p_value = two_proportion_test(c.correct_a, c.cases_a, c.correct_b, c.cases_b).p_value;
    out.push_back(c);
  }
  return out;
}

namespace {

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  out << "confusion_set\ttrain_cases\ttest_cases\tretained_features";
  for (System s : report.systems) out << '\t' << system_name(s);
  for (std::size_t i = 0; i + 1 < report.systems.size(); ++i)
    out << "\tmcnemar_p:" << system_name(report.systems[i]) << '/'
        << system_name(report.systems[i + 1]);
  out << '\n';
  std::size_t train_total = 0;
  for (std::size_t k = 0; k < report.sets.size(); ++k) {
    const auto& s = report.sets[k];
    train_total += s.train_cases;
    out << s.set.name() << '\t' << s.train_cases << '\t' << s.test_cases() << '\t'
        << s.retained_features;
    for (std::size_t i = 0; i < report.systems.size(); ++i)
      out << '\t' << fixed(report.set_percent(k, i), 4);
    for (std::size_t i = 0; i + 1 < report.systems.size(); ++i)
      out << '\t' << general(report.adjacent_p_value(k, i));
    out << '\n';
  }
  out << "OVERALL\t" << train_total << '\t' << report.total_cases() << "\t-";
  for (std::size_t i = 0; i < report.systems.size(); ++i)
    out << '\t' << fixed(report.overall_percent(i), 4);
  for (std::size_t i = 0; i + 1 < report.systems.size(); ++i)
    out << '\t' << general(report.overall_adjacent_p_value(i));
  out << '\n';
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Confusion set", "Test cases"};
  for (System s : report.systems) header.emplace_back(system_name(s));
  rows.push_back(header);
  for (std::size_t k = 0; k < report.sets.size(); ++k) {
    std::vector<std::string> row{report.sets[k].set.name(),
                                 std::to_string(report.sets[k].test_cases())};
    for (std::size_t i = 0; i < report.systems.size(); ++i)
      row.push_back(fixed(report.set_percent(k, i), 1));
    rows.push_back(row);
  }
  std::vector<std::string> overall{"Overall", std::to_string(report.total_cases())};
  for (std::size_t i = 0; i < report.systems.size(); ++i)
    overall.push_back(fixed(report.overall_percent(i), 1));
  rows.push_back(overall);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto print = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << r[c] << std::string(width[c] - r[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - r[c].size(), ' ') << r[c];
      }
    }
    out << '\n';
  };
  std::size_t line = 0;
  for (auto w : width) line += w + 2;
  print(rows.front());
  out << std::string(line - 2, '-') << '\n';
  for (std::size_t r = 1; r + 1 < rows.size(); ++r) print(rows[r]);
  out << std::string(line - 2, '-') << '\n';
  print(rows.back());

  if (report.systems.size() > 1) {
    out << "\nMcNemar p-values (pooled, adjacent systems):\n";
    for (std::size_t i = 0; i + 1 < report.systems.size(); ++i) {
      const double p = report.overall_adjacent_p_value(i);
      out << "  " << system_name(report.systems[i]) << " vs "
          << system_name(report.systems[i + 1]) << ": p = " << general(p)
          << (p < 0.05 ? "  (significant at 0.05)" : "") << '\n';
    }
  }
}

// ------------------------------------------------------------- Experiment

namespace {

// Derived seeds keep the protocol's random choices independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Trained {
  const ConfusionSet& set;
  const ExtractionParams& extraction;
  const FeatureStats& stats;
  const FeatureIndex& retained;
  const std::vector<Example>& train;
  const WinnowParams& winnow;
};

BayesModel bayes_for(const Trained& t, BayesOptions options) {
  return train_bayes(t.set, t.extraction, t.stats, t.retained, options);
}

WinnowNetwork network_for(const Trained& t, NetworkConfig config) {
  WinnowNetwork net(t.set, t.extraction, t.retained, t.winnow, config);
  if (config.init == InitMode::kBayesian)
    init_bayesian(net, bayes_for(t, bayes_options(System::kSimplifiedBayes)));
  return net;
}

std::vector<bool> score_system(System system, const Trained& t,
                               const std::vector<Example>& test) {
  std::vector<bool> correct;
  correct.reserve(test.size());
  if (system == System::kBaseline) {
    const auto guess = baseline_classify(t.stats).predict();
    for (const auto& ex : test) correct.push_back(ex.member == guess);
  } else if (!is_winnow(system)) {
    const BayesModel model = bayes_for(t, bayes_options(system));
    for (const auto& ex : test)
      correct.push_back(classify_bayes(model, ex.active).chosen == ex.member);
  } else {
    WinnowNetwork net = network_for(t, winnow_config(system));
    if (winnow_learns(system)) train_network(net, t.train);
    for (const auto& ex : test)
      correct.push_back(classify_winnow(net, ex.active).chosen == ex.member);
  }
  return correct;
}

}  // namespace

SetResult evaluate_set(const Corpus& train, const Corpus& test, const ConfusionSet& set,
                       const ExperimentConfig& config, const TagDictionary& tags) {
  const FeatureStats stats = collect_stats(train, set, config.extraction, tags);
  const FeatureIndex retained = prune(stats, PruningPolicy{config.mode});
  const auto train_examples = make_examples(train, set, retained, config.extraction, tags);
  const auto test_examples = make_examples(test, set, retained, config.extraction, tags);

  const Trained trained{set, config.extraction, stats, retained, train_examples, config.winnow};
  SetResult result{set, train_examples.size(), retained.size(), {}};
  for (System system : config.systems)
    result.outcomes.push_back(score_system(system, trained, test_examples));
  return result;
}

EvalReport run_experiment(const ExperimentInputs& inputs, const ExperimentConfig& config) {
  config.extraction.validate();
  config.winnow.validate();
  if (config.systems.empty()) throw Error("no systems requested");
  const bool needs_second = config.protocol != Protocol::kWithin;
  if (needs_second && inputs.second_corpus == nullptr)
    throw Error(std::string("protocol '") + std::string(protocol_name(config.protocol)) +
                "' needs a test corpus");

  Corpus train_base, test;
  Corpus adapt;
  if (config.protocol == Protocol::kWithin) {
    Split s = split_corpus(inputs.corpus, {config.train_fraction, derive_seed(config.seed, 0)});
    train_base = std::move(s.train);
    test = std::move(s.test);
  } else {
    train_base = split_corpus(inputs.corpus, {config.train_fraction, derive_seed(config.seed, 0)}).train;
    Split second =
        split_corpus(*inputs.second_corpus, {config.adapt_fraction, derive_seed(config.seed, 1)});
    adapt = std::move(second.train);
    test = std::move(second.test);
  }

  EvalReport report;
  report.protocol = config.protocol;
  report.mode = config.mode;
  report.systems = config.systems;

  for (std::size_t k = 0; k < config.sets.size(); ++k) {
    const ConfusionSet& set = config.sets[k];
    Corpus train = train_base;
    if (config.protocol == Protocol::kSupUnsup) {
      auto corrupted = corrupt(adapt, set, config.corrupt_percent, derive_seed(config.seed, 100 + k));
      train.insert(train.end(), std::make_move_iterator(corrupted.sentences.begin()),
                   std::make_move_iterator(corrupted.sentences.end()));
    }
    report.sets.push_back(evaluate_set(train, test, set, config, inputs.tags));
  }
  return report;
}

}  // namespace ctxspell
