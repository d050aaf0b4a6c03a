#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxspell/corpus.hpp"

namespace ctxspell {

enum class FeatureKind : std::uint8_t { kContextWord = 0, kCollocation = 1 };

// One element of a collocation pattern: the token at `offset` from the target
// gap (-1 is the token before the span, +1 the token after it) must either be
// the literal word or carry the tag in its tag set.
struct Slot {
  int offset = 0;
  bool is_tag = false;
  std::string symbol;

  auto operator<=>(const Slot&) const = default;
};

// A context-word test or a collocation pattern. Ordering is canonical:
// context words first, then collocations, each by their fields.
class Feature {
 public:
  Feature() = default;

  static Feature context_word(std::string word);
  // Slots are sorted by offset; offsets must be distinct, non-zero and
  // contiguous around the gap.
  static Feature collocation(std::vector<Slot> slots);

  FeatureKind kind() const noexcept { return kind_; }
  bool is_collocation() const noexcept {
    return kind_ == FeatureKind::kCollocation;
  }
  const std::string& word() const noexcept { return word_; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }

  // Offset range [first, last] covered by a collocation.
  int first_offset() const { return slots_.front().offset; }
  int last_offset() const { return slots_.back().offset; }

  // `CW <word>` or `COLL -1:t=DET _ +1:w=of`.
  std::string key() const;
  // Inverse of key(); throws Error on malformed input.
  static Feature parse(std::string_view key);

  auto operator<=>(const Feature&) const = default;
  bool operator==(const Feature&) const = default;

 private:
  FeatureKind kind_ = FeatureKind::kContextWord;
  std::string word_;
  std::vector<Slot> slots_;
};

struct ExtractionParams {
  int window = 10;            // context-word half-width k, in tokens
  int max_collocation = 2;    // collocation length l (1 or 2)

  void validate() const;
  friend bool operator==(const ExtractionParams&,
                         const ExtractionParams&) = default;
};

// Every feature for the context of one occurrence, sorted and unique.
// Context words are the distinct tokens within `window` tokens of the span
// (the span itself excluded, clipped at the sentence edges). Collocations
// cover offset spans [-1], [+1], [-2,-1], [-1,+1], [+1,+2] (only the first
// two when max_collocation is 1); each slot is realized as the literal word
// and as each of the word's tags.
std::vector<Feature> generate_features(const Sentence& sentence,
                                       const Occurrence& occurrence,
                                       const ExtractionParams& params,
                                       const TagDictionary& tags);

// Per-feature, per-member co-occurrence counts.
class FeatureStats {
 public:
  explicit FeatureStats(std::size_t members = 2);

  // Records one occurrence of `member` whose generated features are
  // `features` (assumed unique).
  void add_example(std::size_t member, const std::vector<Feature>& features);

  std::size_t members() const noexcept { return occurrences_.size(); }
  // n(W_i).
  std::uint64_t occurrences(std::size_t member) const {
    return occurrences_.at(member);
  }
  // N = sum of n(W_i).
  std::uint64_t total() const noexcept { return total_; }

  // count(f, W_i); zero for unseen features.
  std::uint64_t count(const Feature& f, std::size_t member) const;
  // Sum over members of count(f, W_i).
  std::uint64_t total_count(const Feature& f) const;

  const std::map<Feature, std::vector<std::uint64_t>>& table() const noexcept {
    return counts_;
  }

  // Restores a table written elsewhere (model files). Validates the
  // count <= n(W_i) invariant.
  static FeatureStats from_table(std::vector<std::uint64_t> occurrences,
                                 std::map<Feature, std::vector<std::uint64_t>> counts);

 private:
  std::vector<std::uint64_t> occurrences_;
  std::uint64_t total_ = 0;
  std::map<Feature, std::vector<std::uint64_t>> counts_;
};

// Throws Error if the corpus has no occurrence of the set.
FeatureStats collect_stats(const Corpus& corpus, const ConfusionSet& set,
                           const ExtractionParams& params,
                           const TagDictionary& tags);

struct ChiSquare {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Pearson chi-square for the 2x2 table [[a, b], [c, d]], one degree of
// freedom, no continuity correction. Any empty marginal gives (0, 1).
// Throws Error on negative counts.
ChiSquare chi_square_2x2(double a, double b, double c, double d);

// Chi-square for the association between `f` and member `member`:
// rows = feature present/absent, columns = member vs. every other member.
ChiSquare association(const FeatureStats& stats, const Feature& f,
                      std::size_t member);

enum class PruneMode { kPruned, kUnpruned };

struct PruningPolicy {
  PruneMode mode = PruneMode::kPruned;
  std::uint64_t min_occurrences = 10;
  std::uint64_t min_non_occurrences = 10;
  double alpha = 0.05;
};

using FeatureId = std::uint32_t;

// Immutable, canonically sorted set of learned features; ids are positions.
class FeatureIndex {
 public:
  FeatureIndex() = default;
  explicit FeatureIndex(std::vector<Feature> features);

  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  const Feature& operator[](FeatureId id) const { return features_.at(id); }
  const std::vector<Feature>& features() const noexcept { return features_; }
  std::optional<FeatureId> find(const Feature& f) const;
  bool contains(const Feature& f) const { return find(f).has_value(); }

  friend bool operator==(const FeatureIndex&, const FeatureIndex&) = default;

 private:
  std::vector<Feature> features_;
};

// Pruned mode drops a feature with fewer than min_occurrences occurrences,
// fewer than min_non_occurrences non-occurrences, or no significant
// association (strongest member's chi-square p >= alpha). Unpruned mode
// drops only features seen exactly once.
FeatureIndex prune(const FeatureStats& stats, const PruningPolicy& policy);

// Sorted ids of the learned features present in the occurrence's context.
using ActiveSet = std::vector<FeatureId>;

ActiveSet extract_active(const Sentence& sentence, const Occurrence& occurrence,
                         const FeatureIndex& learned,
                         const ExtractionParams& params,
                         const TagDictionary& tags);

// A labelled training or test case.
struct Example {
  ActiveSet active;
  std::size_t member = 0;
};

// One example per occurrence of `set` in `corpus`, in corpus order.
std::vector<Example> make_examples(const Corpus& corpus, const ConfusionSet& set,
                                   const FeatureIndex& learned,
                                   const ExtractionParams& params,
                                   const TagDictionary& tags);

// One feature key per line in canonical order.
void write_feature_dump(std::ostream& out, const FeatureIndex& features);

}  // namespace ctxspell
