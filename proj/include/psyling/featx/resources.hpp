#pragma once

// External lexical resources. A resource directory holds manifest.json:
//   {"resources":[{"id":"liwc","path":"liwc.tsv","sha256":"...","kind":"lexicon"}, ...]}
// File formats by kind (all UTF-8, '#' starts a comment line):
//   lexicon   word<TAB>category<TAB>score   (word may end in '*' = prefix entry)
//   wordlist  entry[<TAB>ignored...]        (entry may contain spaces: multiword)
//   scalar    word<TAB>value
//   ngram     ngram<TAB>logfreq            (ngram tokens separated by single spaces)
// All keys are case-folded on load.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "psyling/error.hpp"
#include "psyling/featx/catalog.hpp"
#include "psyling/hash.hpp"

namespace psyling::featx {

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& ch : out)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return out;
}

enum class ResourceKind { Lexicon, WordList, Scalar, Ngram };

inline std::string_view kind_name(ResourceKind k) {
  switch (k) {
    case ResourceKind::Lexicon: return "lexicon";
    case ResourceKind::WordList: return "wordlist";
    case ResourceKind::Scalar: return "scalar";
    case ResourceKind::Ngram: return "ngram";
  }
  return "?";
}

inline std::optional<ResourceKind> try_parse_kind(std::string_view s) {
  for (auto k : {ResourceKind::Lexicon, ResourceKind::WordList, ResourceKind::Scalar,
                 ResourceKind::Ngram})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

using CategoryScores = std::unordered_map<std::string, double>;

class Lexicon {
 public:
  void add(const std::string& key, const std::string& category, double score) {
    if (!key.empty() && key.back() == '*') {
      std::string prefix = key.substr(0, key.size() - 1);
      auto it = std::find_if(prefixes_.begin(), prefixes_.end(),
                             [&](const auto& p) { return p.first == prefix; });
      if (it == prefixes_.end()) {
        prefixes_.emplace_back(prefix, CategoryScores{});
        it = prefixes_.end() - 1;
      }
      it->second[category] += score;
    } else {
      exact_[key][category] += score;
    }
  }

  void finalize() {
    std::stable_sort(prefixes_.begin(), prefixes_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }

  /// Exact entry first, then the longest matching prefix entry.
  const CategoryScores* lookup(const std::string& folded) const {
    if (auto it = exact_.find(folded); it != exact_.end()) return &it->second;
    for (const auto& [prefix, scores] : prefixes_)
      if (folded.size() >= prefix.size() && folded.compare(0, prefix.size(), prefix) == 0)
        return &scores;
    return nullptr;
  }

  std::size_t size() const { return exact_.size() + prefixes_.size(); }

 private:
  std::unordered_map<std::string, CategoryScores> exact_;
  std::vector<std::pair<std::string, CategoryScores>> prefixes_;
};

struct WordList {
  std::unordered_set<std::string> entries;
  std::size_t max_words = 1;  // longest multiword entry, in words
  bool contains(const std::string& folded) const { return entries.count(folded) > 0; }
};

struct ScalarList {
  std::unordered_map<std::string, double> values;
  const double* lookup(const std::string& folded) const {
    auto it = values.find(folded);
    return it == values.end() ? nullptr : &it->second;
  }
};

struct NgramTable {
  std::unordered_map<std::string, double> logfreq;
  const double* lookup(const std::string& key) const {
    auto it = logfreq.find(key);
    return it == logfreq.end() ? nullptr : &it->second;
  }
};

struct ManifestEntry {
  std::string id;
  std::string path;
  std::string sha256;
  ResourceKind kind = ResourceKind::Lexicon;
};

/// Immutable after load_resources(); safe to share across threads.
class ResourceBundle {
 public:
  const Lexicon* lexicon(const std::string& id) const { return find(lexicons_, id); }
  const WordList* wordlist(const std::string& id) const { return find(wordlists_, id); }
  const ScalarList* scalar(const std::string& id) const { return find(scalars_, id); }
  const NgramTable* ngram(const std::string& id) const { return find(ngrams_, id); }

  bool has(const std::string& id) const { return hashes_.count(id) > 0; }
  /// resource id -> sha256 of the loaded file.
  const std::map<std::string, std::string>& manifest() const noexcept { return hashes_; }

  /// Digest over all (id, hash) pairs; identifies the exact resource state.
  std::string fingerprint() const {
    Sha256 h;
    for (const auto& [id, hash] : hashes_) h.update(id).update("\t").update(hash).update("\n");
    return h.hex();
  }

  // Mutators used by the loader and by tests that assemble bundles in memory.
  void put(const std::string& id, Lexicon lex, std::string hash = {}) {
    lex.finalize();
    lexicons_[id] = std::move(lex);
    hashes_[id] = std::move(hash);
  }
  void put(const std::string& id, WordList wl, std::string hash = {}) {
    wordlists_[id] = std::move(wl);
    hashes_[id] = std::move(hash);
  }
  void put(const std::string& id, ScalarList sl, std::string hash = {}) {
    scalars_[id] = std::move(sl);
    hashes_[id] = std::move(hash);
  }
  void put(const std::string& id, NgramTable nt, std::string hash = {}) {
    ngrams_[id] = std::move(nt);
    hashes_[id] = std::move(hash);
  }

 private:
  template <class Map>
  static const typename Map::mapped_type* find(const Map& m, const std::string& id) {
    auto it = m.find(id);
    return it == m.end() ? nullptr : &it->second;
  }

  std::map<std::string, Lexicon> lexicons_;
  std::map<std::string, WordList> wordlists_;
  std::map<std::string, ScalarList> scalars_;
  std::map<std::string, NgramTable> ngrams_;
  std::map<std::string, std::string> hashes_;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

template <class F>
void for_each_data_line(const std::string& text, F&& f) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    f(line, no);
  }
}

inline std::size_t count_words(const std::string& s) {
  std::size_t n = 1;
  for (char ch : s) n += (ch == ' ');
  return n;
}

inline void parse_into(ResourceBundle& bundle, const ManifestEntry& e, const std::string& text,
                       const std::string& hash) {
  auto bad = [&](std::size_t line, const std::string& why) {
    return MalformedLexicon(e.id + " line " + std::to_string(line) + ": " + why);
  };
  switch (e.kind) {
    case ResourceKind::Lexicon: {
      Lexicon lex;
      for_each_data_line(text, [&](const std::string& line, std::size_t no) {
        auto f = split_tabs(line);
        double v = 0;
        if (f.size() != 3 || f[0].empty() || f[1].empty() || !parse_double(f[2], v))
          throw bad(no, "expected word<TAB>category<TAB>score");
        lex.add(fold_case(f[0]), f[1], v);
      });
      bundle.put(e.id, std::move(lex), hash);
      break;
    }
    case ResourceKind::WordList: {
      WordList wl;
      for_each_data_line(text, [&](const std::string& line, std::size_t no) {
        auto f = split_tabs(line);
        if (f[0].empty()) throw bad(no, "empty entry");
        std::string key = fold_case(f[0]);
        wl.max_words = std::max(wl.max_words, count_words(key));
        wl.entries.insert(std::move(key));
      });
      bundle.put(e.id, std::move(wl), hash);
      break;
    }
    case ResourceKind::Scalar: {
      ScalarList sl;
      for_each_data_line(text, [&](const std::string& line, std::size_t no) {
        auto f = split_tabs(line);
        double v = 0;
        if (f.size() != 2 || f[0].empty() || !parse_double(f[1], v))
          throw bad(no, "expected word<TAB>value");
        sl.values[fold_case(f[0])] = v;
      });
      bundle.put(e.id, std::move(sl), hash);
      break;
    }
    case ResourceKind::Ngram: {
      NgramTable nt;
      for_each_data_line(text, [&](const std::string& line, std::size_t no) {
        auto f = split_tabs(line);
        double v = 0;
        if (f.size() != 2 || f[0].empty() || !parse_double(f[1], v))
          throw bad(no, "expected ngram<TAB>logfreq");
        nt.logfreq[fold_case(f[0])] = v;
      });
      bundle.put(e.id, std::move(nt), hash);
      break;
    }
  }
}

}  // namespace detail

inline ResourceKind required_kind(Measure m) {
  switch (m) {
    case Measure::LexiconMean: return ResourceKind::Lexicon;
    case Measure::MeanScalar:
    case Measure::MaxScalar: return ResourceKind::Scalar;
    case Measure::NgramLogFreq: return ResourceKind::Ngram;
    default: return ResourceKind::WordList;
  }
}

inline bool resolves(const ResourceBundle& b, const FeatureSpec& spec) {
  switch (required_kind(spec.measure)) {
    case ResourceKind::Lexicon: return b.lexicon(spec.resource) != nullptr;
    case ResourceKind::Scalar: return b.scalar(spec.resource) != nullptr;
    case ResourceKind::Ngram: return b.ngram(spec.resource) != nullptr;
    case ResourceKind::WordList: return b.wordlist(spec.resource) != nullptr;
  }
  return false;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  if (!std::filesystem::exists(path)) throw MissingResource("manifest.json not found in " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedLexicon(std::string("manifest.json: ") + ex.what());
  }
  std::vector<ManifestEntry> out;
  if (!j.contains("resources") || !j["resources"].is_array())
    throw MalformedLexicon("manifest.json: missing 'resources' array");
  for (const auto& r : j["resources"]) {
    ManifestEntry e;
    try {
      e.id = r.at("id").get<std::string>();
      e.path = r.at("path").get<std::string>();
      e.sha256 = r.at("sha256").get<std::string>();
      auto kind = try_parse_kind(r.at("kind").get<std::string>());
      if (!kind) throw MalformedLexicon("manifest.json: unknown kind for " + e.id);
      e.kind = *kind;
    } catch (const nlohmann::json::exception& ex) {
      throw MalformedLexicon(std::string("manifest.json: ") + ex.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries)
    arr.push_back({{"id", e.id}, {"path", e.path}, {"sha256", e.sha256},
                   {"kind", std::string(kind_name(e.kind))}});
  std::ofstream(dir / "manifest.json", std::ios::binary) << nlohmann::json{{"resources", arr}}.dump(2) << '\n';
}

/// Loads every manifest entry, verifying hashes, then checks that the catalog's
/// dependencies all resolve. Nothing is returned unless everything succeeds.
inline ResourceBundle load_resources(const std::filesystem::path& dir,
                                     const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  ResourceBundle bundle;
  std::set<std::string> seen;
  for (const auto& e : read_manifest(dir)) {
    if (!seen.insert(e.id).second) throw MalformedLexicon("manifest.json: duplicate id " + e.id);
    const auto path = dir / e.path;
    if (!std::filesystem::is_regular_file(path))
      throw MissingResource(e.id + " (" + path.string() + ")");
    std::string bytes = read_file_bytes(path);
    std::string hash = sha256_hex(bytes);
    if (hash != e.sha256) throw HashMismatch(e.id + ": manifest " + e.sha256 + ", file " + hash);
    detail::parse_into(bundle, e, bytes, hash);
  }
  for (const auto& spec : catalog) {
    if (spec.resource.empty()) continue;
    if (!bundle.has(spec.resource))
      throw MissingResource(spec.resource + " (required by feature " + spec.id + ")");
    if (!resolves(bundle, spec))
      throw MalformedLexicon(spec.resource + ": wrong kind for feature " + spec.id + ", expected " +
                             std::string(kind_name(required_kind(spec.measure))));
  }
  return bundle;
}

}  // namespace psyling::featx
