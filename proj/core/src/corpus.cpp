#include "ctxspell/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "ctxspell/error.hpp"
#include "ctxspell/rng.hpp"

namespace ctxspell {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Typographic apostrophe (U+2019) is folded to ASCII.
void renumber(Sentence& s) {
  for (std::size_t i = 0; i < s.tokens.size(); ++i) s.tokens[i].position = i;
}

bool matches_at(const Sentence& s, std::size_t pos,
                const ConfusionSet::Member& m) {
  if (pos + m.size() > s.size()) return false;
  for (std::size_t j = 0; j < m.size(); ++j)
    if (s.word(pos + j) != m[j]) return false;
  return true;
}

// Member indices by decreasing length; equal lengths keep set order.
std::vector<std::size_t> longest_first(const ConfusionSet& set) {
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.member(a).size() > set.member(b).size();
  });
  return order;
}

std::optional<std::size_t> member_at(const Sentence& s, std::size_t pos,
                                     const ConfusionSet& set,
                                     const std::vector<std::size_t>& order) {
  for (std::size_t m : order)
    if (matches_at(s, pos, set.member(m))) return m;
  return std::nullopt;
}

// Replaces the span's tokens; spellings come from `texts` when given, otherwise
// from the member with the old span's leading capital carried over.
std::vector<std::string> replace_span(Sentence& s, std::size_t start, std::size_t len,
                                      const ConfusionSet::Member& with,
                                      const std::vector<std::string>* texts = nullptr) {
  auto first = s.tokens.begin() + static_cast<std::ptrdiff_t>(start);
  std::vector<std::string> removed;
  for (auto it = first; it != first + static_cast<std::ptrdiff_t>(len); ++it)
    removed.push_back(it->text);
  const bool capital = !removed.empty() && !removed.front().empty() &&
                       removed.front().front() >= 'A' && removed.front().front() <= 'Z';
  s.tokens.erase(first, first + static_cast<std::ptrdiff_t>(len));
  std::vector<Token> fresh;
  fresh.reserve(with.size());
  for (std::size_t j = 0; j < with.size(); ++j) {
    std::string text = texts ? (*texts)[j] : with[j];
    if (!texts && j == 0 && capital && text.front() >= 'a' && text.front() <= 'z')
      text.front() = static_cast<char>(text.front() - 'a' + 'A');
    fresh.push_back(Token{with[j], 0, std::move(text)});
  }
  s.tokens.insert(s.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                  fresh.begin(), fresh.end());
  renumber(s);
  return removed;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

// ---------------------------------------------------------------- Sentence

std::string Sentence::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

Sentence Sentence::from_words(const std::vector<std::string>& words,
                              std::size_t source_line) {
  Sentence s;
  s.source_line = source_line;
  s.tokens.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    s.tokens.push_back(Token{words[i], i, words[i]});
  return s;
}

// ----------------------------------------------------------- ConfusionSet

ConfusionSet::ConfusionSet(std::vector<Member> members)
    : members_(std::move(members)) {
  if (members_.size() < 2)
    throw Error("confusion set needs at least two members");
  for (const auto& m : members_) {
    if (m.empty()) throw Error("confusion set member is empty");
    for (const auto& tok : m) {
      if (tok.empty()) throw Error("confusion set member has an empty token");
      for (unsigned char c : tok)
        if (c >= 'A' && c <= 'Z')
          throw Error("confusion set member '" + tok + "' is not lowercase");
    }
  }
  for (std::size_t i = 0; i < members_.size(); ++i)
    for (std::size_t j = i + 1; j < members_.size(); ++j)
      if (members_[i] == members_[j])
        throw Error("confusion set has duplicate member");
}

ConfusionSet ConfusionSet::parse(std::string_view line) {
  std::vector<Member> members;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) comma = line.size();
    const auto piece = trim(line.substr(start, comma - start));
    Member m;
    for (auto& t : tokenize(piece).tokens) m.push_back(std::move(t.surface));
    members.push_back(std::move(m));
    start = comma + 1;
  }
  return ConfusionSet(std::move(members));
}

std::string ConfusionSet::member_text(std::size_t i) const {
  std::string out;
  for (const auto& t : member(i)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string ConfusionSet::name() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i) out.push_back(',');
    out += member_text(i);
  }
  return out;
}

std::string ConfusionSet::slug() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i) out.push_back('_');
    for (char c : member_text(i)) {
      const auto u = static_cast<unsigned char>(c);
      if (c == ' ')
        out.push_back('-');
      else if (is_word_byte(u) && u < 0x80)
        out.push_back(c);
      else
        out.push_back('x');
    }
  }
  return out;
}

// ----------------------------------------------------------- TagDictionary

void TagDictionary::add(std::string word, const TagSet& tags) {
  if (tags.empty()) throw Error("tag dictionary entry '" + word + "' has no tags");
  entries_[std::move(word)].insert(tags.begin(), tags.end());
}

const TagDictionary::TagSet& TagDictionary::lookup(std::string_view word) const {
  static const TagSet unknown{std::string(kUnknownTag)};
  auto it = entries_.find(word);
  return it == entries_.end() ? unknown : it->second;
}

bool TagDictionary::contains(std::string_view word) const {
  return entries_.find(word) != entries_.end();
}

TagDictionary TagDictionary::read(std::istream& in) {
  TagDictionary dict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("tag dictionary entry without TAB", lineno);
    std::string word;
    for (char c : trim(std::string_view(line).substr(0, tab)))
      word.push_back(lower(static_cast<unsigned char>(c)));
    if (word.empty()) throw FormatError("tag dictionary entry without word", lineno);
    TagSet tags;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t comma = rest.find(',', start);
      if (comma == std::string_view::npos) comma = rest.size();
      const auto tag = trim(rest.substr(start, comma - start));
      if (!tag.empty()) {
        for (unsigned char c : tag)
          if (!(is_word_byte(c) && c < 0x80) && c != '_')
            throw FormatError("invalid tag '" + std::string(tag) + "'", lineno);
        tags.emplace(tag);
      }
      start = comma + 1;
    }
    if (tags.empty()) throw FormatError("tag dictionary entry without tags", lineno);
    dict.add(std::move(word), tags);
  }
  return dict;
}

TagDictionary TagDictionary::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in);
}

const TagDictionary::TagSet& tagset_lookup(const TagDictionary& dict,
                                           std::string_view word) {
  return dict.lookup(word);
}

// -------------------------------------------------------------- Tokenizing

Sentence tokenize(std::string_view raw, std::size_t source_line) {
  Sentence out;
  out.source_line = source_line;
  std::string current, current_text;
  auto flush = [&] {
    if (!current.empty())
      out.tokens.push_back(Token{std::move(current), out.tokens.size(), std::move(current_text)});
    current.clear();
    current_text.clear();
  };
  // Byte at i, with a typographic apostrophe read as '\''; `width` is its length.
  auto at = [&](std::size_t i, std::size_t& width) -> unsigned char {
    width = 1;
    if (i + 2 < raw.size() && static_cast<unsigned char>(raw[i]) == 0xE2 &&
        static_cast<unsigned char>(raw[i + 1]) == 0x80 &&
        static_cast<unsigned char>(raw[i + 2]) == 0x99) {
      width = 3;
      return '\'';
    }
    return i < raw.size() ? static_cast<unsigned char>(raw[i]) : 0;
  };
  const std::size_t n = raw.size();
  std::size_t width = 1;
  for (std::size_t i = 0; i < n; i += width) {
    const unsigned char c = at(i, width);
    const std::string_view bytes = raw.substr(i, width);
    if (is_space(c)) {
      flush();
      continue;
    }
    if (is_word_byte(c)) {
      current.push_back(lower(c));
      current_text += bytes;
      continue;
    }
    std::size_t next_width = 1;
    const unsigned char next = i + width < n ? at(i + width, next_width) : 0;
    const bool prev_word = !current.empty();
    const bool next_word = next != 0 && is_word_byte(next);
    const bool joins = (c == '\'' || c == '-') ||
                       ((c == '.' || c == ',') && prev_word &&
                        is_digit(static_cast<unsigned char>(current.back())) &&
                        next != 0 && is_digit(next));
    if (joins && prev_word && next_word) {
      current.push_back(static_cast<char>(c));
      current_text += bytes;
      continue;
    }
    flush();
    current.push_back(static_cast<char>(c));
    current_text += bytes;
    flush();
  }
  flush();
  return out;
}

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t j = 1; j < len; ++j) {
      const auto cc = static_cast<unsigned char>(s[i + j]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      pending_space = !current.empty();
      continue;
    }
    if (pending_space) {
      const char last = current.back();
      if ((last == '.' || last == '?' || last == '!') && c >= 'A' && c <= 'Z') {
        out.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(' ');
      }
      pending_space = false;
    }
    current.push_back(static_cast<char>(c));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Corpus read_corpus(std::istream& in, CorpusFormat format) {
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  std::string paragraph;
  std::size_t paragraph_line = 0;

  auto flush_paragraph = [&] {
    if (paragraph.empty()) return;
    // All sentences of a paragraph are attributed to its first line.
    for (const auto& s : split_sentences(paragraph)) {
      Sentence sentence = tokenize(s, paragraph_line);
      if (!sentence.empty()) corpus.push_back(std::move(sentence));
    }
    paragraph.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!is_valid_utf8(line)) throw FormatError("invalid UTF-8", lineno);
    if (format == CorpusFormat::kPresplit) {
      Sentence s = tokenize(line, lineno);
      if (!s.empty()) corpus.push_back(std::move(s));
      continue;
    }
    if (trim(line).empty()) {
      flush_paragraph();
      continue;
    }
    if (paragraph.empty()) paragraph_line = lineno;
    paragraph += line;
    paragraph.push_back('\n');
  }
  if (in.bad()) throw Error("read error");
  flush_paragraph();
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  auto in = open_input(path);
  try {
    return read_corpus(in, format);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  }
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus) out << s.joined() << '\n';
}

std::vector<ConfusionSet> read_confusion_sets(std::istream& in) {
  std::vector<ConfusionSet> sets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    try {
      sets.push_back(ConfusionSet::parse(body));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(e.what(), lineno);
    }
  }
  return sets;
}

std::vector<ConfusionSet> load_confusion_sets(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_confusion_sets(in);
}

// -------------------------------------------------------------- Matching

std::vector<Occurrence> find_occurrences(const Sentence& sentence,
                                         std::size_t sentence_index,
                                         const ConfusionSet& set) {
  const auto order = longest_first(set);
  std::vector<Occurrence> out;
  std::size_t pos = 0;
  while (pos < sentence.size()) {
    if (const auto m = member_at(sentence, pos, set, order)) {
      out.push_back({sentence_index, pos, set.member(*m).size(), *m});
      pos += set.member(*m).size();
    } else {
      ++pos;
    }
  }
  return out;
}

std::vector<Occurrence> find_occurrences(const Corpus& corpus,
                                         const ConfusionSet& set) {
  std::vector<Occurrence> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto found = find_occurrences(corpus[i], i, set);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

// -------------------------------------------------------------- Corruption

CorruptionResult corrupt(const Corpus& corpus, const ConfusionSet& set,
                         double percent, std::uint64_t seed) {
  if (!(percent >= 0.0 && percent <= 100.0))
    throw Error("corruption percentage must be within [0, 100]");
  Rng rng(seed);
  const double p = percent / 100.0;
  const auto order = longest_first(set);
  CorruptionResult result{corpus, {}};
  for (std::size_t si = 0; si < result.sentences.size(); ++si) {
    Sentence& s = result.sentences[si];
    std::size_t pos = 0;
    while (pos < s.size()) {
      const auto m = member_at(s, pos, set, order);
      if (!m) {
        ++pos;
        continue;
      }
      if (rng.bernoulli(p)) {
        std::size_t to = rng.below(set.size() - 1);
        if (to >= *m) ++to;
        auto original = replace_span(s, pos, set.member(*m).size(), set.member(to));
        result.changes.push_back({si, pos, *m, to, std::move(original)});
        pos += set.member(to).size();
      } else {
        pos += set.member(*m).size();
      }
    }
  }
  return result;
}

Corpus revert(Corpus corpus, const ConfusionSet& set,
              const std::vector<Change>& changes) {
  for (auto it = changes.rbegin(); it != changes.rend(); ++it) {
    if (it->sentence >= corpus.size() || it->to_member >= set.size() ||
        it->from_member >= set.size())
      throw Error("change log does not match corpus");
    Sentence& s = corpus[it->sentence];
    const auto& placed = set.member(it->to_member);
    if (!matches_at(s, it->span_start, placed))
      throw Error("change log does not match corpus");
    const auto& from = set.member(it->from_member);
    const bool exact = it->original_text.size() == from.size();
    replace_span(s, it->span_start, placed.size(), from, exact ? &it->original_text : nullptr);
  }
  return corpus;
}

void write_change_log(std::ostream& out, const ConfusionSet& set,
                      const std::vector<Change>& changes) {
  for (const auto& c : changes)
    out << c.sentence + 1 << '\t' << c.span_start << '\t'
        << set.member_text(c.from_member) << '\t'
        << set.member_text(c.to_member) << '\n';
}

}  // namespace ctxspell
