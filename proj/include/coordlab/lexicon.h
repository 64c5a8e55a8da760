#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace coordlab {

inline constexpr int kNumMarkers = 8;

// Canonical marker order. Everything downstream (exhibit masks, profile rows,
// feature indices) uses this order.
enum class Marker : int {
  articles = 0,
  auxiliary_verbs,
  conjunctions,
  adverbs,
  impersonal_pronouns,
  personal_pronouns,
  prepositions,
  quantifiers,
};

const std::array<std::string, kNumMarkers>& marker_names();
const std::string& marker_name(Marker m);
const std::string& marker_name(int i);
std::optional<Marker> marker_from_name(std::string_view name);

struct TokenSequence {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// Lowercases and splits on every character that is neither alphanumeric nor
// an apostrophe; apostrophes survive only word-internally. Bytes >= 0x80 are
// treated as word characters so multi-byte UTF-8 stays intact.
TokenSequence tokenize(std::string_view text);

class MarkerCategory {
public:
  // Validates: non-empty, no duplicates, every lexeme tokenizer-stable.
  MarkerCategory(std::string name, std::vector<std::string> lexemes);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& lexemes() const { return lexemes_; }
  bool contains(const std::string& token) const { return lookup_.count(token) > 0; }

private:
  std::string name_;
  std::vector<std::string> lexemes_;  // sorted
  std::unordered_set<std::string> lookup_;
};

// True iff at least one token of u is a lexeme of c.
bool exhibits(const TokenSequence& u, const MarkerCategory& c);

class Lexicon {
public:
  static Lexicon load(const std::string& path);
  static Lexicon load_stream(std::istream& in, std::string source_id);
  // The lexicon shipped with the toolkit (data/markers.tsv), compiled in so
  // the CLI works without flags.
  static const Lexicon& builtin();

  const MarkerCategory& category(Marker m) const {
    return categories_[static_cast<int>(m)];
  }
  const MarkerCategory& category(int i) const { return categories_[i]; }
  const std::string& source_id() const { return source_id_; }
  std::size_t total_lexemes() const;

  // Bit i set iff the sequence exhibits category i.
  std::uint8_t exhibit_mask(const TokenSequence& u) const;

private:
  Lexicon(std::vector<MarkerCategory> categories, std::string source_id);

  std::vector<MarkerCategory> categories_;  // exactly 8, canonical order
  std::unordered_map<std::string, std::uint8_t> token_masks_;
  std::string source_id_;
};

}  // namespace coordlab
