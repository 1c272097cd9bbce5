#pragma once

// Five annotated sentences with hand-counted surface statistics. The counts
// were tallied by hand from the token lists, not produced by the library.

#include <cmath>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "psyling/featx/resources.hpp"

namespace psyling::testing {

struct HandCounts {
  double words, letters, syllables, poly, mono, long_words;
  double not_dale_chall;  // words absent from the Dale-Chall fixture list
  double not_spache;      // words absent from the Spache fixture list
};

struct ReadabilityCase {
  AnnotatedSentence sentence;
  HandCounts counts;
};

inline const std::vector<std::string>& dale_chall_words() {
  static const std::vector<std::string> v = {"the", "cat", "sat", "on", "mat", "my", "i", "feel",
                                             "sad", "to", "me", "and", "go", "home"};
  return v;
}

inline const std::vector<std::string>& spache_words() {
  static const std::vector<std::string> v = {"the", "cat", "sat", "on", "mat", "i",
                                             "me", "to", "go", "home", "my"};
  return v;
}

inline std::vector<ReadabilityCase> readability_cases() {
  return {
      {cat_sat(), {6, 17, 6, 0, 6, 0, 0, 0}},
      {sentence("Yesterday/NN/yesterday my/PRP$/my wonderful/JJ/wonderful teacher/NN/teacher "
                "explained/VBD/explain readability/NN/readability formulas/NNS/formula ././.",
                "(ROOT (S (NP-TMP (NN Yesterday)) (NP (PRP$ my) (JJ wonderful) (NN teacher)) "
                "(VP (VBD explained) (NP (NN readability) (NNS formulas))) (. .)))"),
       {7, 55, 19, 4, 1, 6, 6, 6}},
      {sentence("I/PRP/i feel/VBP/feel sad/JJ/sad because/IN/because nobody/NN/nobody "
                "listens/VBZ/listen to/TO/to me/PRP/me ././.",
                "(ROOT (S (NP (PRP I)) (VP (VBP feel) (ADJP (JJ sad)) (SBAR (IN because) "
                "(S (NP (NN nobody)) (VP (VBZ listens) (PP (TO to) (NP (PRP me))))))) (. .)))"),
       {8, 32, 12, 1, 5, 2, 3, 5}},
      {sentence("Computers/NNS/computer and/CC/and elephants/NNS/elephant remember/VBP/remember "
                "tomorrow/NN/tomorrow ,/,/, apparently/RB/apparently ././.",
                "(ROOT (S (NP (NNS Computers) (CC and) (NNS elephants)) (VP (VBP remember) "
                "(NP (NN tomorrow)) (, ,) (ADVP (RB apparently))) (. .)))"),
       {6, 47, 17, 5, 1, 5, 5, 6}},
      {sentence("Go/VB/go home/RB/home ././.", "(ROOT (S (VP (VB Go) (ADVP (RB home))) (. .)))"),
       {2, 6, 2, 0, 2, 0, 0, 0}},
  };
}

/// The fourteen readability indices from hand counts, S = 1, in catalog order.
inline std::vector<double> readability_oracle(const HandCounts& c) {
  const double W = c.words, S = 1.0;
  const double pdw = 100.0 * c.not_dale_chall / W;
  const double puw = 100.0 * c.not_spache / W;
  return {
      4.71 * c.letters / W + 0.5 * W / S - 21.43,
      0.0588 * (100.0 * c.letters / W) - 0.296 * (100.0 * S / W) - 15.8,
      0.1579 * pdw + 0.0496 * W / S + (pdw > 5.0 ? 3.6365 : 0.0),
      0.39 * W / S + 11.8 * c.syllables / W - 15.59,
      206.835 - 1.015 * W / S - 84.6 * c.syllables / W,
      100.0 * c.syllables / W,
      100.0 * S / W,
      W / S + 100.0 * c.long_words / W,
      1.0430 * std::sqrt(30.0 * c.poly / S) + 3.1291,
      0.4 * (W / S + 100.0 * c.poly / W),
      3.2672 + 0.0596 * W / S + 0.1155 * pdw,
      20.0 - (150.0 * c.mono / W) / 10.0,
      c.long_words / S,
      0.121 * W / S + 0.082 * puw + 0.659,
  };
}

/// Bundle holding only the two easy-word lists.
inline featx::ResourceBundle readability_bundle() {
  featx::ResourceBundle b;
  featx::WordList dc, sp;
  for (const auto& w : dale_chall_words()) dc.entries.insert(w);
  for (const auto& w : spache_words()) sp.entries.insert(w);
  b.put("dale_chall_easy", std::move(dc));
  b.put("spache_easy", std::move(sp));
  return b;
}

}  // namespace psyling::testing
