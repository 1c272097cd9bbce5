#pragma once

// Token-level text statistics shared by the lexical and readability features.
//
// Word tokens are all tokens whose POS tag is not a punctuation/symbol tag.
//
// Syllable counter (deterministic, rule-based), applied to the lowercase
// ASCII letters of a word:
//   1. no letters -> 0; three letters or fewer -> 1
//   2. strip a final "ed" unless preceded by 't' or 'd'          (jumped, wanted)
//   3. else strip a final "es" unless preceded by s x z c g h     (makes, boxes)
//   4. else strip a final "e" unless the word ends in "ee" or in
//      consonant + "le"                                          (make, free, table)
//   5. drop a leading 'y'                                        (yellow)
//   6. count maximal runs of [aeiouy]; at least 1
// Reference vectors live in tests/featx_text_test.cpp.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "psyling/corpus/corpus.hpp"
#include "psyling/featx/resources.hpp"

namespace psyling::featx {

inline bool is_punctuation_tag(std::string_view pos) {
  static const std::set<std::string, std::less<>> tags = {
      ".", ",", ":", "``", "''", "-LRB-", "-RRB-", "-LCB-", "-RCB-", "-LSB-", "-RSB-",
      "#", "$", "HYPH", "NFP"};
  return tags.count(pos) > 0;
}

/// Letters and digits; each non-ASCII UTF-8 code point counts once.
inline std::size_t letter_count(std::string_view word) {
  std::size_t n = 0;
  for (unsigned char ch : word) {
    if (ch < 0x80) {
      n += (std::isalnum(ch) != 0);
    } else if (ch >= 0xC0) {
      ++n;
    }
  }
  return n;
}

namespace detail {
inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}
inline bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace detail

inline int syllable_count(std::string_view word) {
  std::string w;
  for (unsigned char ch : word) {
    if (ch >= 'A' && ch <= 'Z') w += static_cast<char>(ch - 'A' + 'a');
    else if (ch >= 'a' && ch <= 'z') w += static_cast<char>(ch);
  }
  if (w.empty()) return 0;
  if (w.size() <= 3) return 1;

  using detail::ends_with;
  auto before = [&](std::size_t suffix_len) { return w[w.size() - suffix_len - 1]; };
  if (ends_with(w, "ed")) {
    char b = before(2);
    if (b != 't' && b != 'd') w.resize(w.size() - 2);
  } else if (ends_with(w, "es")) {
    char b = before(2);
    if (std::string_view("sxzcgh").find(b) == std::string_view::npos) w.resize(w.size() - 2);
  } else if (ends_with(w, "e")) {
    bool keep = ends_with(w, "ee") ||
                (ends_with(w, "le") && w.size() >= 3 && !detail::is_vowel(before(2)));
    if (!keep) w.pop_back();
  }
  if (!w.empty() && w[0] == 'y') w.erase(0, 1);

  int runs = 0;
  bool in_vowel = false;
  for (char c : w) {
    bool v = detail::is_vowel(c);
    if (v && !in_vowel) ++runs;
    in_vowel = v;
  }
  return runs < 1 ? 1 : runs;
}

inline bool is_content_tag(std::string_view pos) {
  return pos.starts_with("NN") || pos.starts_with("VB") || pos.starts_with("JJ") ||
         pos.starts_with("RB");
}

struct Word {
  std::string form;   // original surface form
  std::string pos;
  std::string key;    // case-folded form
  std::string lemma;  // case-folded lemma
  std::size_t letters = 0;
  int syllables = 0;
};

inline std::vector<Word> word_tokens(const AnnotatedSentence& s) {
  std::vector<Word> out;
  for (const auto& t : s.tokens) {
    if (is_punctuation_tag(t.pos)) continue;
    out.push_back(Word{t.form, t.pos, fold_case(t.form), fold_case(t.lemma), letter_count(t.form),
                       syllable_count(t.form)});
  }
  return out;
}

}  // namespace psyling::featx
