#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctxspell {

struct Token {
  std::string surface;  // lowercase, never empty
  std::size_t position = 0;
  std::string text;  // spelling as read; written back out by joined()
};

struct Sentence {
  std::vector<Token> tokens;
  std::size_t source_line = 0;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& word(std::size_t i) const { return tokens[i].surface; }

  // Tokens joined by single spaces (the presplit on-disk form).
  std::string joined() const;

  // Build from already-tokenized surfaces; positions are assigned 0..n-1.
  static Sentence from_words(const std::vector<std::string>& words,
                             std::size_t source_line = 0);
};

using Corpus = std::vector<Sentence>;

// An ordered set of mutually confusable word forms. A member may span
// several tokens ("may be").
class ConfusionSet {
 public:
  using Member = std::vector<std::string>;

  // Throws Error unless there are >= 2 distinct, non-empty, lowercase members.
  explicit ConfusionSet(std::vector<Member> members);

  // Parses "peace,piece" or "maybe,may be".
  static ConfusionSet parse(std::string_view line);

  std::size_t size() const noexcept { return members_.size(); }
  const Member& member(std::size_t i) const { return members_.at(i); }
  const std::vector<Member>& members() const noexcept { return members_; }

  // Member i with its tokens joined by spaces.
  std::string member_text(std::size_t i) const;
  // Canonical name, members joined by commas ("peace,piece").
  std::string name() const;
  // File-system friendly name ("peace_piece", "maybe_may-be").
  std::string slug() const;

  friend bool operator==(const ConfusionSet&, const ConfusionSet&) = default;

 private:
  std::vector<Member> members_;
};

struct Occurrence {
  std::size_t sentence = 0;  // index into the corpus
  std::size_t span_start = 0;
  std::size_t span_len = 0;
  std::size_t member = 0;  // index into the confusion set

  std::size_t span_end() const noexcept { return span_start + span_len; }
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

inline constexpr std::string_view kUnknownTag = "UNK";

// Word -> set of possible part-of-speech tags. Tags are not disambiguated
// in context; every tag of a word is considered a match.
class TagDictionary {
 public:
  using TagSet = std::set<std::string>;

  // Adds tags to `word`'s entry. Throws Error if `tags` is empty.
  void add(std::string word, const TagSet& tags);
  // The entry for `word`, or {UNK} for unknown words.
  const TagSet& lookup(std::string_view word) const;
  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }

  // `word<TAB>tag1,tag2,...` per line; blank lines and '#' comments skipped.
  static TagDictionary read(std::istream& in);
  static TagDictionary load(const std::filesystem::path& path);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, TagSet, Hash, std::equal_to<>> entries_;
};

const TagDictionary::TagSet& tagset_lookup(const TagDictionary& dict,
                                           std::string_view word);

// Lowercases, splits off punctuation as standalone tokens, keeps
// word-internal apostrophes and hyphens ("don't", "they're", "well-known")
// and digit-internal '.' and ',' ("3.5", "1,000"). Token::text keeps the
// original spelling.
Sentence tokenize(std::string_view text, std::size_t source_line = 0);

bool is_valid_utf8(std::string_view text) noexcept;

// Naive splitter for raw text: a sentence ends at '.', '?' or '!' followed by
// whitespace and an ASCII capital letter. Whitespace runs (including line
// breaks) are treated as a single space.
std::vector<std::string> split_sentences(std::string_view text);

enum class CorpusFormat { kPresplit, kRaw };

// Presplit: one sentence per line; blank lines are skipped. Raw: the text is
// split with split_sentences(); a blank line always ends a sentence.
// Throws FormatError on invalid UTF-8 (with the line number) and Error on I/O
// failure.
Corpus read_corpus(std::istream& in, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

// One sentence per line in presplit token form.
void write_corpus(std::ostream& out, const Corpus& corpus);

// One set per line, comma separated; '#' starts a comment line.
std::vector<ConfusionSet> read_confusion_sets(std::istream& in);
std::vector<ConfusionSet> load_confusion_sets(const std::filesystem::path& path);

// Left-to-right, non-overlapping matches; at each position the longest member
// wins (ties: lower member index). Results are ordered by (sentence, start).
std::vector<Occurrence> find_occurrences(const Sentence& sentence,
                                         std::size_t sentence_index,
                                         const ConfusionSet& set);
std::vector<Occurrence> find_occurrences(const Corpus& corpus,
                                         const ConfusionSet& set);

// One substitution made by corrupt(). `span_start` is in the coordinates of
// the corrupted sentence, after all earlier changes to that sentence.
struct Change {
  std::size_t sentence = 0;
  std::size_t span_start = 0;
  std::size_t from_member = 0;
  std::size_t to_member = 0;
  // Spelling of the replaced tokens, so revert restores the input bytes.
  std::vector<std::string> original_text;
  friend bool operator==(const Change&, const Change&) = default;
};

struct CorruptionResult {
  Corpus sentences;
  std::vector<Change> changes;
};

// Each occurrence is independently selected with probability percent/100 and
// replaced by a uniformly chosen different member. Deterministic in `seed`.
CorruptionResult corrupt(const Corpus& corpus, const ConfusionSet& set,
                         double percent, std::uint64_t seed);

// Undoes `changes` (applied in reverse order). Throws Error if the corpus
// does not contain the recorded substitutions.
Corpus revert(Corpus corpus, const ConfusionSet& set,
              const std::vector<Change>& changes);

// TSV change log: sentence (1-based), span_start (0-based token), from, to.
void write_change_log(std::ostream& out, const ConfusionSet& set,
                      const std::vector<Change>& changes);

}  // namespace ctxspell
