#pragma once

// Constituency trees in Penn-Treebank bracket notation, e.g.
//   (ROOT (S (NP (DT The) (NN cat)) (VP (VBD sat)) (. .)))
// Leaves are the terminal words; their parents are the preterminal (POS) nodes.

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psyling {

class ParseTree {
 public:
  using NodeId = int;
  static constexpr NodeId kNone = -1;

  struct Node {
    std::string label;
    std::vector<NodeId> children;
    NodeId parent = kNone;
    bool operator==(const Node&) const = default;
  };

  ParseTree() = default;

  /// Throws std::invalid_argument on unbalanced or empty input.
  static ParseTree parse(std::string_view text) {
    ParseTree tree;
    std::vector<std::string> toks = tokenize(text);
    if (toks.empty()) throw std::invalid_argument("empty parse");
    std::size_t pos = 0;
    tree.root_ = tree.parse_node(toks, pos, kNone);
    if (pos != toks.size()) throw std::invalid_argument("trailing tokens after parse tree");
    return tree;
  }

  bool empty() const noexcept { return nodes_.empty(); }
  NodeId root() const noexcept { return root_; }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::string& label(NodeId id) const { return node(id).label; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool is_leaf(NodeId id) const { return node(id).children.empty(); }
  /// A node whose only child is a leaf (a POS tag over a word).
  bool is_preterminal(NodeId id) const {
    const auto& ch = node(id).children;
    return ch.size() == 1 && is_leaf(ch[0]);
  }

  /// Leaf node ids in left-to-right order.
  std::vector<NodeId> leaves() const {
    std::vector<NodeId> out;
    if (!empty()) collect_leaves(root_, out);
    return out;
  }

  std::vector<std::string> leaf_words() const {
    std::vector<std::string> out;
    for (NodeId l : leaves()) out.push_back(label(l));
    return out;
  }

  /// All non-leaf nodes in pre-order.
  std::vector<NodeId> internal_nodes() const {
    std::vector<NodeId> out;
    if (empty()) return out;
    std::vector<NodeId> stack{root_};
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      if (is_leaf(n)) continue;
      out.push_back(n);
      const auto& ch = node(n).children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  /// Canonical single-line bracket form.
  std::string to_string() const {
    std::string out;
    if (!empty()) write(root_, out);
    return out;
  }

  bool operator==(const ParseTree& other) const {
    return root_ == other.root_ && nodes_ == other.nodes_;
  }

 private:
  static std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> toks;
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '(' || c == ')') {
        toks.emplace_back(1, c);
        ++i;
      } else {
        std::size_t j = i;
        while (j < text.size() && text[j] != '(' && text[j] != ')' &&
               !std::isspace(static_cast<unsigned char>(text[j])))
          ++j;
        toks.emplace_back(text.substr(i, j - i));
        i = j;
      }
    }
    return toks;
  }

  NodeId add(std::string label, NodeId parent) {
    nodes_.push_back(Node{std::move(label), {}, parent});
    NodeId id = static_cast<NodeId>(nodes_.size() - 1);
    if (parent != kNone) nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    return id;
  }

  NodeId parse_node(const std::vector<std::string>& toks, std::size_t& pos, NodeId parent) {
    if (pos >= toks.size()) throw std::invalid_argument("unexpected end of parse");
    if (toks[pos] != "(") {
      if (toks[pos] == ")") throw std::invalid_argument("unexpected ')'");
      return add(toks[pos++], parent);  // leaf
    }
    ++pos;
    if (pos >= toks.size() || toks[pos] == "(" || toks[pos] == ")")
      throw std::invalid_argument("constituent without label");
    NodeId id = add(toks[pos++], parent);
    bool has_child = false;
    while (pos < toks.size() && toks[pos] != ")") {
      parse_node(toks, pos, id);
      has_child = true;
    }
    if (pos >= toks.size()) throw std::invalid_argument("unbalanced parentheses");
    if (!has_child) throw std::invalid_argument("constituent '" + label(id) + "' has no children");
    ++pos;
    return id;
  }

  void collect_leaves(NodeId n, std::vector<NodeId>& out) const {
    if (is_leaf(n)) {
      out.push_back(n);
      return;
    }
    for (NodeId c : node(n).children) collect_leaves(c, out);
  }

  void write(NodeId n, std::string& out) const {
    if (is_leaf(n)) {
      out += label(n);
      return;
    }
    out += '(';
    out += label(n);
    for (NodeId c : node(n).children) {
      out += ' ';
      write(c, out);
    }
    out += ')';
  }

  std::vector<Node> nodes_;
  NodeId root_ = kNone;
};

}  // namespace psyling
