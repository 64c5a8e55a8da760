#include "coordlab/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "coordlab/error.h"

namespace coordlab {

const std::array<std::string, kNumMarkers>& marker_names() {
  static const std::array<std::string, kNumMarkers> names = {
      "articles",          "auxiliary_verbs",   "conjunctions", "adverbs",
      "impersonal_pronouns", "personal_pronouns", "prepositions", "quantifiers"};
  return names;
}

const std::string& marker_name(Marker m) { return marker_names()[static_cast<int>(m)]; }
const std::string& marker_name(int i) { return marker_names()[i]; }

std::optional<Marker> marker_from_name(std::string_view name) {
  const auto& names = marker_names();
  for (int i = 0; i < kNumMarkers; ++i) {
    if (names[i] == name) return static_cast<Marker>(i);
  }
  return std::nullopt;
}

namespace {

inline bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string cur;
  auto flush = [&] {
    // apostrophes are only kept word-internally
    std::size_t b = cur.find_first_not_of('\'');
    if (b == std::string::npos) {
      cur.clear();
      return;
    }
    std::size_t e = cur.find_last_not_of('\'');
    out.tokens.emplace_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      cur.push_back('\'');
    } else {
      flush();
    }
  }
  flush();
  return out;
}

MarkerCategory::MarkerCategory(std::string name, std::vector<std::string> lexemes)
    : name_(std::move(name)), lexemes_(std::move(lexemes)) {
  if (lexemes_.empty()) {
    throw_data("MissingCategory", "category '" + name_ + "' has no lexemes");
  }
  std::sort(lexemes_.begin(), lexemes_.end());
  for (std::size_t i = 0; i < lexemes_.size(); ++i) {
    const std::string& lex = lexemes_[i];
    if (i > 0 && lex == lexemes_[i - 1]) {
      throw_data("DuplicateLexeme", "category '" + name_ + "' lists '" + lex + "' twice");
    }
    TokenSequence t = tokenize(lex);
    if (t.size() != 1 || t.tokens[0] != lex) {
      throw_data("NonCanonicalLexeme",
                 "lexeme '" + lex + "' in category '" + name_ +
                     "' does not survive tokenization unchanged");
    }
    lookup_.insert(lex);
  }
}

bool exhibits(const TokenSequence& u, const MarkerCategory& c) {
  return std::any_of(u.tokens.begin(), u.tokens.end(),
                     [&](const std::string& t) { return c.contains(t); });
}

Lexicon::Lexicon(std::vector<MarkerCategory> categories, std::string source_id)
    : categories_(std::move(categories)), source_id_(std::move(source_id)) {
  for (int i = 0; i < kNumMarkers; ++i) {
    for (const auto& lex : categories_[i].lexemes()) {
      token_masks_[lex] |= static_cast<std::uint8_t>(1u << i);
    }
  }
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("IoError", "cannot open lexicon file: " + path);
  return load_stream(in, path);
}

Lexicon Lexicon::load_stream(std::istream& in, std::string source_id) {
  std::map<std::string, std::vector<std::string>> by_category;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw_data("MalformedRecord", source_id + ":" + std::to_string(lineno) +
                                        ": expected category<TAB>lexeme");
    }
    std::string cat = line.substr(0, tab);
    std::string lex = line.substr(tab + 1);
    if (!marker_from_name(cat)) {
      throw_data("MissingCategory", source_id + ":" + std::to_string(lineno) +
                                        ": unknown category '" + cat + "'");
    }
    by_category[cat].push_back(lex);
  }
  std::vector<MarkerCategory> cats;
  cats.reserve(kNumMarkers);
  for (const std::string& name : marker_names()) {
    auto it = by_category.find(name);
    if (it == by_category.end()) {
      throw_data("MissingCategory", source_id + ": category '" + name + "' is missing");
    }
    cats.emplace_back(name, std::move(it->second));
  }
  return Lexicon(std::move(cats), std::move(source_id));
}

std::size_t Lexicon::total_lexemes() const {
  std::size_t n = 0;
  for (const auto& c : categories_) n += c.lexemes().size();
  return n;
}

std::uint8_t Lexicon::exhibit_mask(const TokenSequence& u) const {
  std::uint8_t mask = 0;
  for (const std::string& tok : u.tokens) {
    auto it = token_masks_.find(tok);
    if (it != token_masks_.end()) mask |= it->second;
    if (mask == 0xFF) break;
  }
  return mask;
}

extern const char* kDefaultMarkersTsv;  // generated from data/markers.tsv

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = [] {
    std::istringstream in(kDefaultMarkersTsv);
    return load_stream(in, "builtin");
  }();
  return lex;
}

}  // namespace coordlab
