#include "coordlab/lexicon.h"

#include <random>
#include <sstream>

#include <doctest.h>

#include "coordlab/error.h"

using namespace coordlab;

TEST_CASE("tokenize basic examples") {
  CHECK(tokenize("I don't know.").tokens == std::vector<std::string>{"i", "don't", "know"});
  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("The THE the").tokens == std::vector<std::string>{"the", "the", "the"});
  CHECK(tokenize("a,b;c").tokens == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("'quoted'").tokens == std::vector<std::string>{"quoted"});
  CHECK(tokenize("rock'n'roll").tokens == std::vector<std::string>{"rock'n'roll"});
  CHECK(tokenize("'''").tokens.empty());
  CHECK(tokenize("  \t\n ").tokens.empty());
  CHECK(tokenize("x2 4y").tokens == std::vector<std::string>{"x2", "4y"});
}

TEST_CASE("tokenize properties") {
  std::mt19937_64 rng(42);
  const std::string alphabet = "abc XY.'!-09\t,";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    int len = static_cast<int>(rng() % 60);
    for (int i = 0; i < len; ++i) text.push_back(alphabet[rng() % alphabet.size()]);
    TokenSequence toks = tokenize(text);
    for (const auto& t : toks.tokens) {
      CHECK(!t.empty());
      CHECK(t.find(' ') == std::string::npos);
      CHECK(t.front() != '\'');
      CHECK(t.back() != '\'');
    }
    // idempotent on its own output joined by spaces
    std::string joined;
    for (const auto& t : toks.tokens) {
      if (!joined.empty()) joined.push_back(' ');
      joined += t;
    }
    CHECK(tokenize(joined).tokens == toks.tokens);
  }
}

TEST_CASE("shipped lexicon loads with the canonical categories") {
  Lexicon lex = Lexicon::load(std::string(COORDLAB_REPO_DATA) + "/markers.tsv");
  for (int i = 0; i < kNumMarkers; ++i) {
    CHECK(lex.category(i).name() == marker_names()[i]);
    CHECK(!lex.category(i).lexemes().empty());
  }
  CHECK(lex.category(Marker::articles).contains("the"));
  CHECK(lex.category(Marker::quantifiers).contains("some"));
  // documented size of the replication list
  CHECK(lex.total_lexemes() == 358);

  // builtin copy matches the shipped file
  const Lexicon& builtin = Lexicon::builtin();
  CHECK(builtin.total_lexemes() == lex.total_lexemes());
  for (int i = 0; i < kNumMarkers; ++i) {
    CHECK(builtin.category(i).lexemes() == lex.category(i).lexemes());
  }
}

TEST_CASE("lexicon load errors") {
  auto load = [](const std::string& body) {
    std::istringstream in(body);
    return Lexicon::load_stream(in, "test");
  };
  CHECK_THROWS_WITH_AS(load("articles\tthe\narticles\tthe\n"
                            "auxiliary_verbs\tis\nconjunctions\tand\nadverbs\tvery\n"
                            "impersonal_pronouns\tit\npersonal_pronouns\ti\n"
                            "prepositions\tof\nquantifiers\tall\n"),
                       doctest::Contains("twice"), Error);
  // category with zero lexemes is reported as missing
  CHECK_THROWS_AS(load("articles\tthe\nauxiliary_verbs\tis\nconjunctions\tand\nadverbs\tvery\n"
                       "impersonal_pronouns\tit\npersonal_pronouns\ti\nprepositions\tof\n"),
                  Error);
  try {
    load("articles\tthe\nauxiliary_verbs\tis\nconjunctions\tand\nadverbs\tvery\n"
         "impersonal_pronouns\tit\npersonal_pronouns\ti\nprepositions\tof\n");
    FAIL("expected MissingCategory");
  } catch (const Error& e) {
    CHECK(e.code() == "MissingCategory");
  }
  // unknown category name
  try {
    load("verbs\trun\n");
    FAIL("expected MissingCategory");
  } catch (const Error& e) {
    CHECK(e.code() == "MissingCategory");
  }
  // lexeme that the tokenizer would alter
  try {
    load("articles\tThe\nauxiliary_verbs\tis\nconjunctions\tand\nadverbs\tvery\n"
         "impersonal_pronouns\tit\npersonal_pronouns\ti\nprepositions\tof\nquantifiers\tall\n");
    FAIL("expected NonCanonicalLexeme");
  } catch (const Error& e) {
    CHECK(e.code() == "NonCanonicalLexeme");
  }
  try {
    load("articles\ta lot\nauxiliary_verbs\tis\nconjunctions\tand\nadverbs\tvery\n"
         "impersonal_pronouns\tit\npersonal_pronouns\ti\nprepositions\tof\nquantifiers\tall\n");
    FAIL("expected NonCanonicalLexeme");
  } catch (const Error& e) {
    CHECK(e.code() == "NonCanonicalLexeme");
  }
}

TEST_CASE("exhibits definition and properties") {
  MarkerCategory articles("articles", {"a", "an", "the"});
  CHECK(exhibits(tokenize("the cat"), articles));
  CHECK_FALSE(exhibits(tokenize(""), articles));
  CHECK_FALSE(exhibits(tokenize("cat sat"), articles));

  // monotone under concatenation; order/multiplicity irrelevant
  std::mt19937_64 rng(7);
  std::vector<std::string> pool = {"the", "cat", "sat", "an", "x", "y"};
  for (int trial = 0; trial < 200; ++trial) {
    TokenSequence u, v;
    for (std::size_t i = 0; i < rng() % 6; ++i) u.tokens.push_back(pool[rng() % pool.size()]);
    for (std::size_t i = 0; i < rng() % 6; ++i) v.tokens.push_back(pool[rng() % pool.size()]);
    bool before = exhibits(u, articles);
    TokenSequence uv = u;
    uv.tokens.insert(uv.tokens.end(), v.tokens.begin(), v.tokens.end());
    if (before) CHECK(exhibits(uv, articles));
    TokenSequence shuffled = u;
    std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), rng);
    CHECK(exhibits(shuffled, articles) == before);
  }
}

TEST_CASE("exhibit mask matches per-category exhibits") {
  const Lexicon& lex = Lexicon::builtin();
  TokenSequence u = tokenize("the cat is very much under it");
  std::uint8_t mask = lex.exhibit_mask(u);
  for (int i = 0; i < kNumMarkers; ++i) {
    CHECK(((mask >> i) & 1u) == (exhibits(u, lex.category(i)) ? 1u : 0u));
  }
  CHECK((mask & 1u) == 1u);  // articles
}
