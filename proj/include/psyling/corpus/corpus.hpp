#pragma once

// Annotated-corpus interchange (JSON lines). The first line is a header:
//   {"schema_version":1,"tagset":"PTB"}
// and every following line one post:
//   {"post_id":..,"user_id":..,"source":"SMHD|Dreaddit|Synthetic","label":..,
//    "sentences":[{"tokens":[[form,pos,lemma],...],"parse":"(ROOT ...)"}]}

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "psyling/corpus/parse_tree.hpp"
#include "psyling/error.hpp"
#include "psyling/labels.hpp"

namespace psyling {

enum class Source { SMHD, Dreaddit, Synthetic };

inline std::string_view source_name(Source s) {
  switch (s) {
    case Source::SMHD: return "SMHD";
    case Source::Dreaddit: return "Dreaddit";
    case Source::Synthetic: return "Synthetic";
  }
  return "?";
}

inline std::optional<Source> try_parse_source(std::string_view s) {
  for (Source v : {Source::SMHD, Source::Dreaddit, Source::Synthetic})
    if (source_name(v) == s) return v;
  return std::nullopt;
}

struct Token {
  std::string form;
  std::string pos;
  std::string lemma;
  bool operator==(const Token&) const = default;
};

struct AnnotatedSentence {
  std::vector<Token> tokens;
  ParseTree parse;
  bool operator==(const AnnotatedSentence&) const = default;
};

struct AnnotatedPost {
  std::string post_id;
  std::string user_id;
  Source source = Source::Synthetic;
  MhcLabel label = MhcLabel::Control;
  std::vector<AnnotatedSentence> sentences;
  bool operator==(const AnnotatedPost&) const = default;
};

inline constexpr int kCorpusSchemaVersion = 1;

/// Penn Treebank POS tags (plus the CoreNLP additions HYPH, NFP, ADD, AFX, GW, XX).
inline const std::set<std::string, std::less<>>& ptb_tagset() {
  static const std::set<std::string, std::less<>> tags = {
      "CC",  "CD",  "DT",   "EX",   "FW",  "IN",  "JJ",    "JJR",   "JJS",   "LS",   "MD",
      "NN",  "NNS", "NNP",  "NNPS", "PDT", "POS", "PRP",   "PRP$",  "RB",    "RBR",  "RBS",
      "RP",  "SYM", "TO",   "UH",   "VB",  "VBD", "VBG",   "VBN",   "VBP",   "VBZ",  "WDT",
      "WP",  "WP$", "WRB",  ".",    ",",   ":",   "``",    "''",    "-LRB-", "-RRB-", "-LCB-",
      "-RCB-", "-LSB-", "-RSB-", "#", "$", "HYPH", "NFP", "ADD", "AFX", "GW", "XX"};
  return tags;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) throw MalformedRecord(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline AnnotatedPost post_from_json(const nlohmann::json& j, std::size_t line,
                                    const std::set<std::string, std::less<>>& tagset) {
  if (!j.is_object()) throw MalformedRecord(line, "record is not an object");
  AnnotatedPost post;
  post.post_id = require_string(j, "post_id", line);
  post.user_id = require_string(j, "user_id", line);
  if (post.post_id.empty()) throw MalformedRecord(line, "empty post_id");

  std::string source = require_string(j, "source", line);
  auto src = try_parse_source(source);
  if (!src) throw MalformedRecord(line, "unknown source '" + source + "'");
  post.source = *src;
  post.label = parse_label(require_string(j, "label", line));

  const auto& sentences = require(j, "sentences", line);
  if (!sentences.is_array() || sentences.empty())
    throw MalformedRecord(line, "'sentences' must be a non-empty array");

  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto& sj = sentences[si];
    if (!sj.is_object()) throw MalformedRecord(line, "sentence is not an object");
    AnnotatedSentence sent;
    const auto& tokens = require(sj, "tokens", line);
    if (!tokens.is_array() || tokens.empty())
      throw MalformedRecord(line, "sentence " + std::to_string(si) + " has no tokens");
    for (const auto& tj : tokens) {
      if (!tj.is_array() || tj.size() != 3 || !tj[0].is_string() || !tj[1].is_string() ||
          !tj[2].is_string())
        throw MalformedRecord(line, "token must be [form, pos, lemma]");
      Token tok{tj[0].get<std::string>(), tj[1].get<std::string>(), tj[2].get<std::string>()};
      if (!tagset.empty() && tagset.find(tok.pos) == tagset.end())
        throw MalformedRecord(line, "POS tag '" + tok.pos + "' not in declared tagset");
      sent.tokens.push_back(std::move(tok));
    }
    try {
      sent.parse = ParseTree::parse(require_string(sj, "parse", line));
    } catch (const std::invalid_argument& e) {
      throw MalformedRecord(line, std::string("bad parse: ") + e.what());
    }
    if (sent.parse.leaves().size() != sent.tokens.size())
      throw ParseLeafMismatch("post " + post.post_id + ", sentence " + std::to_string(si) + ": " +
                              std::to_string(sent.parse.leaves().size()) + " leaves vs " +
                              std::to_string(sent.tokens.size()) + " tokens");
    post.sentences.push_back(std::move(sent));
  }
  return post;
}

}  // namespace detail

inline nlohmann::json post_to_json(const AnnotatedPost& post) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : post.sentences) {
    nlohmann::json toks = nlohmann::json::array();
    for (const auto& t : s.tokens) toks.push_back({t.form, t.pos, t.lemma});
    sentences.push_back({{"tokens", std::move(toks)}, {"parse", s.parse.to_string()}});
  }
  return {{"post_id", post.post_id},
          {"user_id", post.user_id},
          {"source", std::string(source_name(post.source))},
          {"label", std::string(label_name(post.label))},
          {"sentences", std::move(sentences)}};
}

/// Reads a whole corpus; any violation rejects the whole input.
inline std::vector<AnnotatedPost> read_corpus(std::istream& in) {
  std::vector<AnnotatedPost> posts;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  std::set<std::string, std::less<>> tagset;
  std::unordered_set<std::string> seen;

  while (std::getline(in, text)) {
    ++line_no;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("schema_version"))
        throw MalformedRecord(line_no, "missing header line with schema_version");
      if (!j["schema_version"].is_number_integer() ||
          j["schema_version"].get<int>() != kCorpusSchemaVersion)
        throw MalformedRecord(line_no, "unsupported schema_version");
      std::string ts = detail::require_string(j, "tagset", line_no);
      if (ts != "PTB") throw MalformedRecord(line_no, "unsupported tagset '" + ts + "'");
      tagset = ptb_tagset();
      have_header = true;
      continue;
    }
    AnnotatedPost post = detail::post_from_json(j, line_no, tagset);
    if (!seen.insert(post.post_id).second)
      throw MalformedRecord(line_no, "duplicate post_id '" + post.post_id + "'");
    posts.push_back(std::move(post));
  }
  return posts;
}

inline std::vector<AnnotatedPost> ingest_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord(0, "cannot open corpus file " + path.string());
  return read_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<AnnotatedPost>& posts) {
  out << nlohmann::json{{"schema_version", kCorpusSchemaVersion}, {"tagset", "PTB"}}.dump() << '\n';
  for (const auto& p : posts) out << post_to_json(p).dump() << '\n';
}

inline void emit_corpus(const std::filesystem::path& path, const std::vector<AnnotatedPost>& posts) {
  std::ofstream out(path, std::ios::binary);
  write_corpus(out, posts);
}

/// Posts whose label is not in `excluded`, original order preserved.
inline std::vector<AnnotatedPost> exclude_classes(const std::vector<AnnotatedPost>& posts,
                                                  const std::set<MhcLabel>& excluded) {
  std::vector<AnnotatedPost> out;
  out.reserve(posts.size());
  for (const auto& p : posts)
    if (!excluded.count(p.label)) out.push_back(p);
  return out;
}

/// Number of distinct user ids; equals posts.size() when every post has its own author.
inline std::size_t distinct_users(const std::vector<AnnotatedPost>& posts) {
  std::unordered_set<std::string> users;
  for (const auto& p : posts) users.insert(p.user_id);
  return users.size();
}

}  // namespace psyling
