#pragma once

// Syntactic complexity units counted over a constituency parse, following the
// L2 Syntactic Complexity Analyzer patterns. Tregex head relations (<#) are
// approximated by immediate dominance of the head tag.
//
//   clause     S|SINV|SQ that is finite: an immediate MD|VBZ|VBP|VBD child; or a
//              VP child with such a child; or a VP child coordinating (CC) VPs
//              one of which has such a child; or, directly under ROOT, a first
//              child VP containing VB (imperative). FRAG under ROOT with no
//              clause inside also counts as one clause.
//   T-unit     S|SBARQ|SINV|SQ directly under ROOT, or preceded by a sister of
//              those labels and not dominated by SBAR or VP. FRAG under ROOT
//              with no T-unit inside counts as one T-unit.
//   dep clause SBAR immediately dominating a clause.
//   complex T  T-unit dominating a dependent clause.
//   coord phr  ADJP|ADVP|NP|VP immediately dominating CC.
//   cx nominal NP not under NP dominating JJ|POS|PP|S|VBG or an NP with a later
//              NP sister not immediately followed by CC; SBAR headed by WHNP,
//              by IN that/for, or starting with S, next to/under a VP; S whose
//              VP child contains VBG|TO, immediately followed by a VP sister.
//   verb phr   VP immediately under S|SINV|SQ.
//
// NP modification: for every NP the head is its last NN*|PRP|CD|EX child, else
// its first NP child, else its last child; pre/post-modifier length is the
// number of word tokens in the children before/after the head.

#include <string>
#include <string_view>
#include <vector>

#include "psyling/corpus/parse_tree.hpp"
#include "psyling/featx/text.hpp"

namespace psyling::featx {

struct SyntaxCounts {
  double clauses = 0;
  double t_units = 0;
  double dependent_clauses = 0;
  double complex_t_units = 0;
  double coordinate_phrases = 0;
  double complex_nominals = 0;
  double verb_phrases = 0;
  double np_count = 0;
  double np_premod_words = 0;
  double np_postmod_words = 0;
};

class SyntaxAnalyzer {
 public:
  using Id = ParseTree::NodeId;

  explicit SyntaxAnalyzer(const ParseTree& t) : t_(t) {}

  SyntaxCounts count() const {
    SyntaxCounts c;
    if (t_.empty()) return c;
    for (Id n : t_.internal_nodes()) {
      if (t_.is_preterminal(n)) continue;
      const std::string& l = t_.label(n);
      if (is_clause(n)) c.clauses += 1;
      if (is_t_unit(n)) c.t_units += 1;
      if (l == "SBAR" && is_dependent_clause(n)) c.dependent_clauses += 1;
      if (is_t_unit(n) && dominates_if(n, [&](Id d) { return t_.label(d) == "SBAR" && is_dependent_clause(d); }))
        c.complex_t_units += 1;
      if (is_any(l, {"ADJP", "ADVP", "NP", "VP"}) && has_child_label(n, {"CC"}))
        c.coordinate_phrases += 1;
      if (is_complex_nominal(n)) c.complex_nominals += 1;
      if (l == "VP" && parent_is(n, {"S", "SINV", "SQ"})) c.verb_phrases += 1;
      if (l == "NP") {
        auto [pre, post] = np_modification(n);
        c.np_count += 1;
        c.np_premod_words += pre;
        c.np_postmod_words += post;
      }
      if (l == "FRAG" && parent_is(n, {"ROOT"})) {
        if (!dominates_if(n, [&](Id d) { return is_clause(d); })) c.clauses += 1;
        if (!dominates_if(n, [&](Id d) { return is_t_unit(d); })) c.t_units += 1;
      }
    }
    return c;
  }

 private:
  static bool is_any(const std::string& l, std::initializer_list<std::string_view> set) {
    for (auto s : set)
      if (l == s) return true;
    return false;
  }

  Id parent(Id n) const { return t_.node(n).parent; }

  bool parent_is(Id n, std::initializer_list<std::string_view> set) const {
    Id p = parent(n);
    return p != ParseTree::kNone && is_any(t_.label(p), set);
  }

  bool has_child_label(Id n, std::initializer_list<std::string_view> set) const {
    for (Id c : t_.node(n).children)
      if (!t_.is_leaf(c) && is_any(t_.label(c), set)) return true;
    return false;
  }

  template <class Pred>
  bool dominates_if(Id n, Pred&& pred) const {
    for (Id c : t_.node(n).children) {
      if (t_.is_leaf(c)) continue;
      if (pred(c) || dominates_if(c, pred)) return true;
    }
    return false;
  }

  bool has_finite_head(Id n) const { return has_child_label(n, {"MD", "VBZ", "VBP", "VBD"}); }

  bool is_clause(Id n) const {
    if (!is_any(t_.label(n), {"S", "SINV", "SQ"})) return false;
    const auto& ch = t_.node(n).children;
    if (parent_is(n, {"ROOT"}) && !ch.empty() && t_.label(ch.front()) == "VP" &&
        has_child_label(ch.front(), {"VB"}))
      return true;
    if (has_finite_head(n)) return true;
    for (Id c : ch) {
      if (t_.is_leaf(c) || t_.label(c) != "VP") continue;
      if (has_finite_head(c)) return true;
      if (has_child_label(c, {"CC"}))
        for (Id cc : t_.node(c).children)
          if (!t_.is_leaf(cc) && t_.label(cc) == "VP" && has_finite_head(cc)) return true;
    }
    return false;
  }

  bool is_t_unit(Id n) const {
    auto t_label = [](const std::string& l) { return is_any(l, {"S", "SBARQ", "SINV", "SQ"}); };
    if (!t_label(t_.label(n))) return false;
    if (parent_is(n, {"ROOT"})) return true;
    Id p = parent(n);
    if (p == ParseTree::kNone) return false;
    bool preceded = false;
    for (Id sib : t_.node(p).children) {
      if (sib == n) break;
      if (!t_.is_leaf(sib) && t_label(t_.label(sib))) preceded = true;
    }
    if (!preceded) return false;
    for (Id a = p; a != ParseTree::kNone; a = parent(a))
      if (is_any(t_.label(a), {"SBAR", "VP"})) return false;
    return true;
  }

  bool is_dependent_clause(Id sbar) const {
    for (Id c : t_.node(sbar).children)
      if (!t_.is_leaf(c) && is_clause(c)) return true;
    return false;
  }

  Id next_sibling(Id n) const {
    Id p = parent(n);
    if (p == ParseTree::kNone) return ParseTree::kNone;
    const auto& ch = t_.node(p).children;
    for (std::size_t i = 0; i + 1 < ch.size(); ++i)
      if (ch[i] == n) return ch[i + 1];
    return ParseTree::kNone;
  }

  bool is_complex_nominal(Id n) const {
    const std::string& l = t_.label(n);
    if (l == "NP" && !parent_is(n, {"NP"})) {
      if (dominates_if(n, [&](Id d) { return is_any(t_.label(d), {"JJ", "POS", "PP", "S", "VBG"}); }))
        return true;
      bool np_seq = dominates_if(n, [&](Id d) {
        if (t_.label(d) != "NP") return false;
        Id p = parent(d);
        const auto& sibs = t_.node(p).children;
        bool after = false, later_np = false;
        for (Id s : sibs) {
          if (s == d) { after = true; continue; }
          if (after && !t_.is_leaf(s) && t_.label(s) == "NP") later_np = true;
        }
        Id nx = next_sibling(d);
        bool followed_by_cc = nx != ParseTree::kNone && t_.label(nx) == "CC";
        return later_np && !followed_by_cc;
      });
      if (np_seq) return true;
    }
    if (l == "SBAR") {
      const auto& ch = t_.node(n).children;
      bool headed = has_child_label(n, {"WHNP"});
      for (Id c : ch) {
        if (t_.is_leaf(c) || t_.label(c) != "IN" || !t_.is_preterminal(c)) continue;
        std::string w = fold_case(t_.label(t_.node(c).children[0]));
        if (w == "that" || w == "for") headed = true;
      }
      if (!ch.empty() && t_.label(ch.front()) == "S") headed = true;
      Id nx = next_sibling(n);
      bool near_vp = (nx != ParseTree::kNone && t_.label(nx) == "VP") || parent_is(n, {"VP"});
      if (headed && near_vp) return true;
    }
    if (l == "S") {
      bool gerund = false;
      for (Id c : t_.node(n).children)
        if (!t_.is_leaf(c) && t_.label(c) == "VP" && has_child_label(c, {"VBG", "TO"})) gerund = true;
      Id nx = next_sibling(n);
      if (gerund && nx != ParseTree::kNone && t_.label(nx) == "VP") return true;
    }
    return false;
  }

  double words_under(Id n) const {
    if (t_.is_leaf(n)) return 0;
    if (t_.is_preterminal(n)) return is_punctuation_tag(t_.label(n)) ? 0 : 1;
    double w = 0;
    for (Id c : t_.node(n).children) w += words_under(c);
    return w;
  }

  std::pair<double, double> np_modification(Id np) const {
    const auto& ch = t_.node(np).children;
    std::ptrdiff_t head = -1;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const std::string& l = t_.label(ch[i]);
      if (!t_.is_leaf(ch[i]) && (l.starts_with("NN") || l == "PRP" || l == "CD" || l == "EX"))
        head = static_cast<std::ptrdiff_t>(i);
    }
    if (head < 0)
      for (std::size_t i = 0; i < ch.size(); ++i)
        if (t_.label(ch[i]) == "NP") {
          head = static_cast<std::ptrdiff_t>(i);
          break;
        }
    if (head < 0) head = static_cast<std::ptrdiff_t>(ch.size()) - 1;
    double pre = 0, post = 0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      auto ii = static_cast<std::ptrdiff_t>(i);
      if (ii < head) pre += words_under(ch[i]);
      else if (ii > head) post += words_under(ch[i]);
    }
    return {pre, post};
  }

  const ParseTree& t_;
};

inline SyntaxCounts syntax_counts(const ParseTree& tree) { return SyntaxAnalyzer(tree).count(); }

}  // namespace psyling::featx
