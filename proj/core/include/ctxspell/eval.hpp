#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxspell/bayes.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/features.hpp"
#include "ctxspell/winnow.hpp"

namespace ctxspell {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Split {
  Corpus train;
  Corpus test;
};

// Seeded random partition by sentence: floor(fraction * n) sentences go to
// train. Both parts keep corpus order. Throws Error on fewer than two
// sentences or a fraction outside (0, 1).
Split split_corpus(const Corpus& sentences, const SplitSpec& spec);

// Always guesses the most frequent training member (ties: lower index).
class BaselinePredictor {
 public:
  explicit BaselinePredictor(std::size_t member) : member_(member) {}
  std::size_t predict() const noexcept { return member_; }

 private:
  std::size_t member_;
};

BaselinePredictor baseline_classify(const FeatureStats& train_stats);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// McNemar test with continuity correction on discordant counts
// b (A right, B wrong) and c (A wrong, B right).
TestResult mcnemar_from_counts(std::uint64_t b, std::uint64_t c);
// Throws Error on length mismatch.
TestResult mcnemar_test(std::span<const bool> a_correct, std::span<const bool> b_correct);

// Pooled-variance z test, two-sided. `statistic` is z.
TestResult two_proportion_test(std::uint64_t correct1, std::uint64_t n1,
                               std::uint64_t correct2, std::uint64_t n2);

enum class System {
  kBaseline,
  kBayes,
  kSimplifiedBayes,
  kBayesMle,
  kWinnow,
  kSimplifiedWinnow,
  kWinnow1Layer,
  kWinnow2Layer,
  kWinnowBayesInit,
};

std::string_view system_name(System system);
std::optional<System> parse_system(std::string_view name);
std::span<const System> all_systems();
// BaySpell, Simplified BaySpell, 1-layer, 2-layer, Bayesian-initialized WinSpell.
std::span<const System> ablation_ladder();

bool is_winnow(System system);

// Smoothing and dependency handling of a Bayesian system (bayes for others).
BayesOptions bayes_options(System system);
// Network layout of a Winnow system. Bayesian-initialized networks take their
// weights from the simplified-bayes model.
NetworkConfig winnow_config(System system);
// False only for simplified-winnow, which is never trained.
bool winnow_learns(System system);

enum class Protocol { kWithin, kAcross, kSupUnsup };

std::string_view protocol_name(Protocol protocol);
std::optional<Protocol> parse_protocol(std::string_view name);

struct ExperimentConfig {
  std::vector<ConfusionSet> sets;
  std::vector<System> systems;
  PruneMode mode = PruneMode::kUnpruned;
  Protocol protocol = Protocol::kWithin;
  ExtractionParams extraction;
  WinnowParams winnow;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  // Share of the second corpus used (corrupted) for unsupervised adaptation;
  // the rest is the test set of the across and sup/unsup protocols.
  double adapt_fraction = 0.6;
  double corrupt_percent = 5.0;
};

struct ExperimentInputs {
  const Corpus& corpus;                  // training corpus
  const Corpus* second_corpus = nullptr;  // required by across and sup/unsup
  const TagDictionary& tags;
};

struct SetResult {
  ConfusionSet set;
  std::size_t train_cases = 0;
  std::size_t retained_features = 0;
  // outcomes[s][k]: did system s get test case k right.
  std::vector<std::vector<bool>> outcomes;

  std::size_t test_cases() const { return outcomes.empty() ? 0 : outcomes.front().size(); }
  std::size_t correct(std::size_t system) const;
};

struct EvalReport {
  Protocol protocol = Protocol::kWithin;
  PruneMode mode = PruneMode::kUnpruned;
  std::vector<System> systems;
  std::vector<SetResult> sets;

  std::size_t total_cases() const;
  std::size_t total_correct(std::size_t system) const;
  // Pooled: total correct / total cases, as a percentage. NaN if no cases.
  double overall_percent(std::size_t system) const;
  double set_percent(std::size_t set, std::size_t system) const;
  // All outcomes of `system` concatenated in set order.
  std::vector<bool> pooled_outcomes(std::size_t system) const;
  // McNemar p-value between adjacent systems i and i+1, per set or pooled.
  double adjacent_p_value(std::size_t set, std::size_t i) const;
  double overall_adjacent_p_value(std::size_t i) const;
};

// Trains config.systems for one set on `train` and scores them on `test`,
// with no splitting. Throws Error if the set never occurs in `train`.
SetResult evaluate_set(const Corpus& train, const Corpus& test, const ConfusionSet& set,
                       const ExperimentConfig& config, const TagDictionary& tags);

// Trains every requested system per confusion set and scores it on the
// protocol's test portion:
//   within   - split the corpus train_fraction / rest
//   across   - train on the corpus split, test on the held-out
//              (1 - adapt_fraction) slice of the second corpus
//   sup/unsup - as across, plus the adapt_fraction slice of the second corpus,
//              corrupted at corrupt_percent, appended to the training data
// Throws Error if a set never occurs in the training data.
EvalReport run_experiment(const ExperimentInputs& inputs, const ExperimentConfig& config);

// Per-system comparison of two reports over the same systems. Paired reports
// (identical test cases) use McNemar, unpaired ones the two-proportion test.
struct Comparison {
  System system;
  std::size_t correct_a = 0, cases_a = 0, correct_b = 0, cases_b = 0;
  double p_value = 1.0;
  bool paired = false;
};

std::vector<Comparison> compare_reports(const EvalReport& a, const EvalReport& b,
                                        bool paired);

// TSV: confusion_set, train_cases, test_cases, retained_features, one percent
// column per system, then one mcnemar p-value column per adjacent pair.
// The last row is OVERALL (pooled).
void write_report_tsv(std::ostream& out, const EvalReport& report);
// Aligned human-readable rendering of the same data.
void write_report_table(std::ostream& out, const EvalReport& report);

}  // namespace ctxspell
