#pragma once

// Per-sentence feature computation. The measurement window is one sentence
// with a stride of one sentence, so every ratio below uses S = 1.
//
// Aggregation policy:
//   * lexicon categories: sum of category scores over word tokens divided by the
//     number of word tokens (a miss contributes 0)
//   * scalar lists (AoA, prevalence): mean / max over the matched tokens, 0 when
//     nothing matched
//   * register n-grams: mean log frequency of the in-table n-grams, 0 when all
//     are out of table
//   * any zero denominator yields 0
// Word lookups try the case-folded form first, then the case-folded lemma.
//
// Readability formulas (W words, S sentences, L letters, Y syllables):
//   ARI          4.71 L/W + 0.5 W/S - 21.43
//   ColemanLiau  0.0588 (100 L/W) - 0.296 (100 S/W) - 15.8
//   DaleChall    0.1579 PDW + 0.0496 W/S (+3.6365 when PDW > 5), PDW = % not on easy list
//   FK grade     0.39 W/S + 11.8 Y/W - 15.59
//   FK ease      206.835 - 1.015 W/S - 84.6 Y/W
//   Fry-x        100 Y/W          Fry-y  100 S/W
//   Lix          W/S + 100 long/W (long: more than 6 letters)
//   SMOG         1.0430 sqrt(30 poly/S) + 3.1291 (poly: 3+ syllables)
//   GunningFog   0.4 (W/S + 100 poly/W)
//   DaleChallPSK 3.2672 + 0.0596 W/S + 0.1155 PDW
//   FORCAST      20 - (150 mono/W)/10 (mono: 1 syllable)
//   Rix          long/S
//   Spache       0.121 W/S + 0.082 PUW + 0.659, PUW = % not on the Spache easy list
//
// Kolmogorov proxies are deflate (zlib level 9) compressed-size / raw-size of the
// space-joined surface forms, lemmas and POS tags respectively.

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include <zlib.h>

#include "psyling/corpus/corpus.hpp"
#include "psyling/featx/catalog.hpp"
#include "psyling/featx/resources.hpp"
#include "psyling/featx/syntax.hpp"
#include "psyling/featx/text.hpp"

namespace psyling::featx {

inline double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

/// deflate(text) size over raw size; 0 for empty text.
inline double compression_ratio(const std::string& text) {
  if (text.empty()) return 0.0;
  uLongf bound = compressBound(static_cast<uLong>(text.size()));
  std::vector<Bytef> buf(bound);
  if (compress2(buf.data(), &bound, reinterpret_cast<const Bytef*>(text.data()),
                static_cast<uLong>(text.size()), 9) != Z_OK)
    return 0.0;
  return static_cast<double>(bound) / static_cast<double>(text.size());
}

/// Resource-independent statistics of one sentence, computed once and shared by
/// all 436 features.
struct SentenceStats {
  std::vector<Word> words;
  double n_words = 0;
  double n_sentences = 1;
  double letters = 0;
  double syllables = 0;
  double polysyllables = 0;
  double monosyllables = 0;
  double long_words = 0;
  double types = 0;
  double content_words = 0;
  SyntaxCounts syntax;
  double kol_base = 0, kol_morph = 0, kol_syntax = 0;

  explicit SentenceStats(const AnnotatedSentence& s) : words(word_tokens(s)), syntax(syntax_counts(s.parse)) {
    n_words = static_cast<double>(words.size());
    std::unordered_set<std::string> seen;
    for (const auto& w : words) {
      letters += static_cast<double>(w.letters);
      syllables += w.syllables;
      if (w.syllables >= 3) polysyllables += 1;
      if (w.syllables == 1) monosyllables += 1;
      if (w.letters > 6) long_words += 1;
      if (is_content_tag(w.pos)) content_words += 1;
      seen.insert(w.key);
    }
    types = static_cast<double>(seen.size());

    std::string forms, lemmas, tags;
    for (const auto& t : s.tokens) {
      auto append = [](std::string& dst, const std::string& v) {
        if (!dst.empty()) dst += ' ';
        dst += v;
      };
      append(forms, t.form);
      append(lemmas, t.lemma);
      append(tags, t.pos);
    }
    kol_base = compression_ratio(forms);
    kol_morph = compression_ratio(lemmas);
    kol_syntax = compression_ratio(tags);
  }
};

namespace detail {

inline bool in_list(const WordList& wl, const Word& w) {
  return wl.contains(w.key) || (!w.lemma.empty() && wl.contains(w.lemma));
}

template <class Table>
auto lookup_word(const Table& t, const Word& w) -> decltype(t.lookup(w.key)) {
  if (auto* v = t.lookup(w.key)) return v;
  if (!w.lemma.empty() && w.lemma != w.key) return t.lookup(w.lemma);
  return nullptr;
}

inline double difficult_percent(const SentenceStats& st, const WordList* easy) {
  if (st.n_words == 0) return 0.0;
  double hard = 0;
  for (const auto& w : st.words)
    if (easy == nullptr || !in_list(*easy, w)) hard += 1;
  return 100.0 * hard / st.n_words;
}

inline std::string join_keys(const std::vector<Word>& words, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = start; i < start + n; ++i) {
    if (i > start) key += ' ';
    key += words[i].key;
  }
  return key;
}

}  // namespace detail

/// One feature of one sentence. Missing resources fall back to the value an
/// empty resource would give; load_resources() rejects incomplete bundles, so
/// this only happens with hand-assembled bundles.
inline double feature_value(const FeatureSpec& spec, const SentenceStats& st,
                            const ResourceBundle& res) {
  using M = Measure;
  const double W = st.n_words;
  const double S = st.n_sentences;
  const SyntaxCounts& sc = st.syntax;
  switch (spec.measure) {
    case M::MLC: return safe_div(W, sc.clauses);
    case M::MLS: return safe_div(W, S);
    case M::MLT: return safe_div(W, sc.t_units);
    case M::ClausesPerSentence: return safe_div(sc.clauses, S);
    case M::ClausesPerTUnit: return safe_div(sc.clauses, sc.t_units);
    case M::DepClausesPerClause: return safe_div(sc.dependent_clauses, sc.clauses);
    case M::TUnitsPerSentence: return safe_div(sc.t_units, S);
    case M::ComplexTUnitsPerTUnit: return safe_div(sc.complex_t_units, sc.t_units);
    case M::DepClausesPerTUnit: return safe_div(sc.dependent_clauses, sc.t_units);
    case M::CoordPhrasesPerClause: return safe_div(sc.coordinate_phrases, sc.clauses);
    case M::CoordPhrasesPerTUnit: return safe_div(sc.coordinate_phrases, sc.t_units);
    case M::NPPostMod: return safe_div(sc.np_postmod_words, sc.np_count);
    case M::NPPreMod: return safe_div(sc.np_premod_words, sc.np_count);
    case M::ComplexNominalsPerClause: return safe_div(sc.complex_nominals, sc.clauses);
    case M::ComplexNominalsPerTUnit: return safe_div(sc.complex_nominals, sc.t_units);
    case M::VerbPhrasesPerTUnit: return safe_div(sc.verb_phrases, sc.t_units);
    case M::KolmogorovBase: return st.kol_base;
    case M::KolmogorovMorph: return st.kol_morph;
    case M::KolmogorovSyntax: return st.kol_syntax;

    case M::MeanWordLengthChars: return safe_div(st.letters, W);
    case M::MeanWordLengthSyllables: return safe_div(st.syllables, W);
    case M::LexicalDensity: return safe_div(st.content_words, W);
    case M::DifferentWords: return st.types;
    case M::CorrectedNDW:
      return (W > 1 && st.types > 0) ? std::log(st.types) / std::log(W) : 0.0;
    case M::TTR: return safe_div(st.types, W);
    case M::CorrectedTTR: return safe_div(st.types, std::sqrt(2.0 * W));
    case M::RootTTR: return safe_div(st.types, std::sqrt(W));
    case M::FormulaSequences: {
      const WordList* wl = res.wordlist(spec.resource);
      if (wl == nullptr || W == 0) return 0.0;
      double hits = 0;
      const std::size_t nw = st.words.size();
      for (std::size_t n = 1; n <= wl->max_words; ++n)
        for (std::size_t i = 0; i + n <= nw; ++i)
          if (wl->contains(detail::join_keys(st.words, i, n))) hits += 1;
      return hits / W;
    }
    case M::ShareOutsideList:
    case M::ShareInList:
    case M::NonStopwordRate: {
      if (W == 0) return 0.0;
      const WordList* wl = res.wordlist(spec.resource);
      double in = 0;
      if (wl != nullptr)
        for (const auto& w : st.words) in += detail::in_list(*wl, w) ? 1 : 0;
      return spec.measure == M::ShareInList ? in / W : (W - in) / W;
    }
    case M::MeanScalar:
    case M::MaxScalar: {
      const ScalarList* sl = res.scalar(spec.resource);
      if (sl == nullptr) return 0.0;
      double sum = 0, mx = 0, hits = 0;
      for (const auto& w : st.words) {
        if (const double* v = detail::lookup_word(*sl, w)) {
          mx = hits == 0 ? *v : std::max(mx, *v);
          sum += *v;
          hits += 1;
        }
      }
      if (hits == 0) return 0.0;
      return spec.measure == M::MeanScalar ? sum / hits : mx;
    }

    case M::NgramLogFreq: {
      const NgramTable* nt = res.ngram(spec.resource);
      const auto n = static_cast<std::size_t>(spec.ngram_n);
      if (nt == nullptr || n == 0 || st.words.size() < n) return 0.0;
      double sum = 0, hits = 0;
      for (std::size_t i = 0; i + n <= st.words.size(); ++i)
        if (const double* v = nt->lookup(detail::join_keys(st.words, i, n))) {
          sum += *v;
          hits += 1;
        }
      return safe_div(sum, hits);
    }

    case M::ARI:
      return W == 0 ? 0.0 : 4.71 * (st.letters / W) + 0.5 * (W / S) - 21.43;
    case M::ColemanLiau:
      return W == 0 ? 0.0 : 0.0588 * (100.0 * st.letters / W) - 0.296 * (100.0 * S / W) - 15.8;
    case M::DaleChall: {
      if (W == 0) return 0.0;
      double pdw = detail::difficult_percent(st, res.wordlist(spec.resource));
      return 0.1579 * pdw + 0.0496 * (W / S) + (pdw > 5.0 ? 3.6365 : 0.0);
    }
    case M::FleschKincaidGrade:
      return W == 0 ? 0.0 : 0.39 * (W / S) + 11.8 * (st.syllables / W) - 15.59;
    case M::FleschReadingEase:
      return W == 0 ? 0.0 : 206.835 - 1.015 * (W / S) - 84.6 * (st.syllables / W);
    case M::FryX: return W == 0 ? 0.0 : 100.0 * st.syllables / W;
    case M::FryY: return W == 0 ? 0.0 : 100.0 * S / W;
    case M::Lix: return W == 0 ? 0.0 : W / S + 100.0 * st.long_words / W;
    case M::SMOG: return W == 0 ? 0.0 : 1.0430 * std::sqrt(st.polysyllables * 30.0 / S) + 3.1291;
    case M::GunningFog: return W == 0 ? 0.0 : 0.4 * (W / S + 100.0 * st.polysyllables / W);
    case M::DaleChallPSK: {
      if (W == 0) return 0.0;
      double pdw = detail::difficult_percent(st, res.wordlist(spec.resource));
      return 3.2672 + 0.0596 * (W / S) + 0.1155 * pdw;
    }
    case M::FORCAST: return W == 0 ? 0.0 : 20.0 - (150.0 * st.monosyllables / W) / 10.0;
    case M::Rix: return W == 0 ? 0.0 : st.long_words / S;
    case M::Spache: {
      if (W == 0) return 0.0;
      double puw = detail::difficult_percent(st, res.wordlist(spec.resource));
      return 0.121 * (W / S) + 0.082 * puw + 0.659;
    }

    case M::LexiconMean: {
      const Lexicon* lex = res.lexicon(spec.resource);
      if (lex == nullptr || W == 0) return 0.0;
      double sum = 0;
      for (const auto& w : st.words) {
        const CategoryScores* cs = detail::lookup_word(*lex, w);
        if (cs == nullptr) continue;
        if (auto it = cs->find(spec.category); it != cs->end()) sum += it->second;
      }
      return sum / W;
    }
  }
  return 0.0;
}

inline double compute_feature(const FeatureSpec& spec, const AnnotatedSentence& sentence,
                              const ResourceBundle& resources) {
  double v = feature_value(spec, SentenceStats(sentence), resources);
  return std::isfinite(v) ? v : 0.0;
}

/// All catalog features of one sentence, in catalog order.
inline std::vector<double> compute_sentence_vector(const AnnotatedSentence& sentence,
                                                   const ResourceBundle& resources,
                                                   const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  SentenceStats st(sentence);
  std::vector<double> v(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    double x = feature_value(catalog[i], st, resources);
    v[i] = std::isfinite(x) ? x : 0.0;
  }
  return v;
}

}  // namespace psyling::featx
