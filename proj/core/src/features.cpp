#include "ctxspell/features.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <set>

#include "ctxspell/error.hpp"
#include "ctxspell/stats.hpp"

namespace ctxspell {

namespace {

// Contiguous offset spans around the gap, by collocation length.
constexpr int kSpans[][2] = {{-1, -1}, {1, 1}, {-2, -1}, {-1, 1}, {1, 2}};

std::string slot_text(const Slot& s) {
  std::string out = (s.offset > 0 ? "+" : "") + std::to_string(s.offset);
  out += s.is_tag ? ":t=" : ":w=";
  out += s.symbol;
  return out;
}

Slot parse_slot(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 3 > text.size() ||
      text[colon + 2] != '=' || (text[colon + 1] != 't' && text[colon + 1] != 'w'))
    throw Error("malformed collocation slot '" + std::string(text) + "'");
  std::string_view num = text.substr(0, colon);
  if (!num.empty() && num.front() == '+') num.remove_prefix(1);
  Slot slot;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), slot.offset);
  if (ec != std::errc() || ptr != num.data() + num.size())
    throw Error("malformed collocation offset '" + std::string(text) + "'");
  slot.is_tag = text[colon + 1] == 't';
  slot.symbol = std::string(text.substr(colon + 3));
  if (slot.symbol.empty()) throw Error("empty collocation slot symbol");
  return slot;
}

// Cartesian expansion of per-slot alternatives.
void expand(const std::vector<std::vector<Slot>>& choices, std::size_t i,
            std::vector<Slot>& current, std::vector<Feature>& out) {
  if (i == choices.size()) {
    out.push_back(Feature::collocation(current));
    return;
  }
  for (const auto& c : choices[i]) {
    current.push_back(c);
    expand(choices, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

// ----------------------------------------------------------------- Feature

Feature Feature::context_word(std::string word) {
  if (word.empty()) throw Error("context word is empty");
  Feature f;
  f.kind_ = FeatureKind::kContextWord;
  f.word_ = std::move(word);
  return f;
}

Feature Feature::collocation(std::vector<Slot> slots) {
  if (slots.empty()) throw Error("collocation has no slots");
  std::sort(slots.begin(), slots.end(),
            [](const Slot& a, const Slot& b) { return a.offset < b.offset; });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].offset == 0) throw Error("collocation slot at the gap");
    if (i > 0) {
      const int prev = slots[i - 1].offset;
      const int expected = prev == -1 ? 1 : prev + 1;
      if (slots[i].offset != expected)
        throw Error("collocation offsets are not contiguous");
    }
  }
  Feature f;
  f.kind_ = FeatureKind::kCollocation;
  f.slots_ = std::move(slots);
  return f;
}

std::string Feature::key() const {
  if (kind_ == FeatureKind::kContextWord) return "CW " + word_;
  std::string out = "COLL";
  bool gap_written = false;
  for (const auto& s : slots_) {
    if (s.offset > 0 && !gap_written) {
      out += " _";
      gap_written = true;
    }
    out += ' ';
    out += slot_text(s);
  }
  if (!gap_written) out += " _";
  return out;
}

Feature Feature::parse(std::string_view key) {
  if (key.starts_with("CW ")) return context_word(std::string(key.substr(3)));
  if (!key.starts_with("COLL ")) throw Error("malformed feature key '" + std::string(key) + "'");
  std::vector<Slot> slots;
  std::string_view rest = key.substr(5);
  bool saw_gap = false;
  while (!rest.empty()) {
    const auto space = rest.find(' ');
    const auto part = rest.substr(0, space);
    if (part == "_") {
      saw_gap = true;
    } else {
      slots.push_back(parse_slot(part));
    }
    if (space == std::string_view::npos) break;
    rest.remove_prefix(space + 1);
  }
  if (!saw_gap) throw Error("collocation key without gap '" + std::string(key) + "'");
  return collocation(std::move(slots));
}

void ExtractionParams::validate() const {
  if (window < 1) throw Error("context window must be >= 1");
  if (max_collocation != 1 && max_collocation != 2)
    throw Error("collocation length must be 1 or 2");
}

// ------------------------------------------------------------- Generation

std::vector<Feature> generate_features(const Sentence& sentence,
                                       const Occurrence& occ,
                                       const ExtractionParams& params,
                                       const TagDictionary& tags) {
  if (occ.span_len == 0 || occ.span_end() > sentence.size())
    throw Error("occurrence outside sentence");
  const auto n = static_cast<long>(sentence.size());
  const auto start = static_cast<long>(occ.span_start);
  const auto end = static_cast<long>(occ.span_end());

  std::vector<Feature> out;
  std::set<std::string> words;
  for (long i = std::max(0L, start - params.window); i < start; ++i)
    words.insert(sentence.word(static_cast<std::size_t>(i)));
  for (long i = end; i < std::min(n, end + params.window); ++i)
    words.insert(sentence.word(static_cast<std::size_t>(i)));
  for (const auto& w : words) out.push_back(Feature::context_word(w));

  auto position = [&](int offset) -> long {
    return offset < 0 ? start + offset : end + offset - 1;
  };
  for (const auto& span : kSpans) {
    const int len = span[0] == span[1] ? 1 : 2;
    if (len > params.max_collocation) continue;
    std::vector<std::vector<Slot>> choices;
    bool inside = true;
    for (int off = span[0]; off <= span[1]; ++off) {
      if (off == 0) continue;
      const long pos = position(off);
      if (pos < 0 || pos >= n) {
        inside = false;
        break;
      }
      const auto& word = sentence.word(static_cast<std::size_t>(pos));
      std::vector<Slot> alternatives{{off, false, word}};
      for (const auto& tag : tags.lookup(word)) alternatives.push_back({off, true, tag});
      choices.push_back(std::move(alternatives));
    }
    if (!inside) continue;
    std::vector<Slot> current;
    expand(choices, 0, current, out);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ------------------------------------------------------------------ Stats

FeatureStats::FeatureStats(std::size_t members) : occurrences_(members, 0) {
  if (members < 2) throw Error("feature statistics need at least two members");
}

void FeatureStats::add_example(std::size_t member,
                               const std::vector<Feature>& features) {
  if (member >= members()) throw Error("member index out of range");
  ++occurrences_[member];
  ++total_;
  for (const auto& f : features) {
    auto [it, inserted] = counts_.try_emplace(f, members(), 0);
    ++it->second[member];
  }
}

std::uint64_t FeatureStats::count(const Feature& f, std::size_t member) const {
  auto it = counts_.find(f);
  return it == counts_.end() ? 0 : it->second.at(member);
}

std::uint64_t FeatureStats::total_count(const Feature& f) const {
  auto it = counts_.find(f);
  if (it == counts_.end()) return 0;
  std::uint64_t sum = 0;
  for (auto c : it->second) sum += c;
  return sum;
}

FeatureStats FeatureStats::from_table(
    std::vector<std::uint64_t> occurrences,
    std::map<Feature, std::vector<std::uint64_t>> counts) {
  FeatureStats stats(occurrences.size());
  for (const auto& [f, row] : counts) {
    if (row.size() != occurrences.size())
      throw Error("feature row has the wrong number of members");
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i] > occurrences[i]) throw Error("feature count exceeds member count");
  }
  stats.occurrences_ = std::move(occurrences);
  stats.total_ = 0;
  for (auto n : stats.occurrences_) stats.total_ += n;
  stats.counts_ = std::move(counts);
  return stats;
}

FeatureStats collect_stats(const Corpus& corpus, const ConfusionSet& set,
                           const ExtractionParams& params,
                           const TagDictionary& tags) {
  params.validate();
  FeatureStats stats(set.size());
  for (const auto& occ : find_occurrences(corpus, set))
    stats.add_example(occ.member,
                      generate_features(corpus[occ.sentence], occ, params, tags));
  if (stats.total() == 0)
    throw Error("no occurrence of {" + set.name() + "} in training corpus");
  return stats;
}

// ------------------------------------------------------------- Chi-square

ChiSquare chi_square_2x2(double a, double b, double c, double d) {
  if (a < 0 || b < 0 || c < 0 || d < 0)
    throw Error("chi-square table has a negative count");
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return {};
  const double n = r1 + r2;
  const double diff = a * d - b * c;
  const double statistic = n * diff * diff / (r1 * r2 * c1 * c2);
  return {statistic, stats::chi_square_sf_1df(statistic)};
}

ChiSquare association(const FeatureStats& stats, const Feature& f,
                      std::size_t member) {
  const auto with = static_cast<double>(stats.count(f, member));
  const auto present = static_cast<double>(stats.total_count(f));
  const auto n_member = static_cast<double>(stats.occurrences(member));
  const auto n_other = static_cast<double>(stats.total()) - n_member;
  return chi_square_2x2(with, present - with, n_member - with,
                        n_other - (present - with));
}

// ---------------------------------------------------------------- Pruning

FeatureIndex::FeatureIndex(std::vector<Feature> features)
    : features_(std::move(features)) {
  std::sort(features_.begin(), features_.end());
  features_.erase(std::unique(features_.begin(), features_.end()), features_.end());
}

std::optional<FeatureId> FeatureIndex::find(const Feature& f) const {
  auto it = std::lower_bound(features_.begin(), features_.end(), f);
  if (it == features_.end() || !(*it == f)) return std::nullopt;
  return static_cast<FeatureId>(it - features_.begin());
}

FeatureIndex prune(const FeatureStats& stats, const PruningPolicy& policy) {
  std::vector<Feature> kept;
  for (const auto& [f, row] : stats.table()) {
    std::uint64_t present = 0;
    for (auto c : row) present += c;
    if (present <= 1) continue;
    if (policy.mode == PruneMode::kUnpruned) {
      kept.push_back(f);
      continue;
    }
    if (present < policy.min_occurrences ||
        stats.total() - present < policy.min_non_occurrences)
      continue;
    double strongest = 0.0, p = 1.0;
    for (std::size_t i = 0; i < stats.members(); ++i) {
      const auto chi = association(stats, f, i);
      if (chi.statistic > strongest) {
        strongest = chi.statistic;
        p = chi.p_value;
      }
    }
    if (p < policy.alpha) kept.push_back(f);
  }
  return FeatureIndex(std::move(kept));
}

ActiveSet extract_active(const Sentence& sentence, const Occurrence& occurrence,
                         const FeatureIndex& learned,
                         const ExtractionParams& params,
                         const TagDictionary& tags) {
  ActiveSet active;
  if (learned.empty()) return active;
  for (const auto& f : generate_features(sentence, occurrence, params, tags))
    if (auto id = learned.find(f)) active.push_back(*id);
  // generate_features is sorted canonically, so ids come out ascending.
  return active;
}

std::vector<Example> make_examples(const Corpus& corpus, const ConfusionSet& set,
                                   const FeatureIndex& learned,
                                   const ExtractionParams& params,
                                   const TagDictionary& tags) {
  std::vector<Example> out;
  for (const auto& occ : find_occurrences(corpus, set))
    out.push_back({extract_active(corpus[occ.sentence], occ, learned, params, tags),
                   occ.member});
  return out;
}

void write_feature_dump(std::ostream& out, const FeatureIndex& features) {
  for (const auto& f : features.features()) out << f.key() << '\n';
}

}  // namespace ctxspell
