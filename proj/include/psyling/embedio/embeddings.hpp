#pragma once

// PSYEMB1 token-embedding interchange (little-endian):
//   "PSYEMB1" u32 embed_dim u64 count
//   per post: u16 id_len, id bytes (UTF-8), u32 n_tokens, n_tokens·embed_dim f32 (row-major)
// A sidecar `<file>.manifest.json` records the encoder, layer, truncation length,
// per-post token counts and the file's sha256.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "psyling/binary_io.hpp"
#include "psyling/corpus/corpus.hpp"
#include "psyling/error.hpp"
#include "psyling/hash.hpp"
#include "psyling/neural/tensor.hpp"

namespace psyling::embedio {

inline constexpr char kMagic[7] = {'P', 'S', 'Y', 'E', 'M', 'B', '1'};
inline constexpr std::size_t kMaxTokens = 512;

struct EmbeddingSequence {
  std::string post_id;
  std::size_t n_tokens = 0;
  std::size_t embed_dim = 0;
  std::vector<float> values;  // row-major n_tokens × embed_dim

  float at(std::size_t t, std::size_t d) const { return values[t * embed_dim + d]; }

  /// Row t as a (1 × embed_dim) matrix.
  template <class S>
  neural::Mat<S> token(std::size_t t) const {
    neural::Mat<S> m(1, static_cast<Eigen::Index>(embed_dim));
    for (std::size_t d = 0; d < embed_dim; ++d) m(0, static_cast<Eigen::Index>(d)) = static_cast<S>(at(t, d));
    return m;
  }
  bool operator==(const EmbeddingSequence&) const = default;
};

/// All records of one file, in file order, indexed by post id.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t embed_dim = 0) : dim_(embed_dim) {}

  std::size_t embed_dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<EmbeddingSequence>& records() const noexcept { return records_; }

  const EmbeddingSequence* find(const std::string& post_id) const {
    auto it = index_.find(post_id);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  void add(EmbeddingSequence seq) {
    if (seq.embed_dim != dim_)
      throw DimMismatch(seq.post_id + ": embed_dim " + std::to_string(seq.embed_dim) + ", file " + std::to_string(dim_));
    if (seq.n_tokens == 0) throw DimMismatch(seq.post_id + ": zero tokens");
    if (seq.values.size() != seq.n_tokens * seq.embed_dim) throw DimMismatch(seq.post_id + ": value count");
    for (float v : seq.values)
      if (!std::isfinite(v)) throw DimMismatch(seq.post_id + ": non-finite entry");
    if (!index_.emplace(seq.post_id, records_.size()).second) throw DuplicatePost(seq.post_id);
    records_.push_back(std::move(seq));
  }

 private:
  std::size_t dim_;
  std::vector<EmbeddingSequence> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline void write_embeddings(std::ostream& out, const EmbeddingStore& store) {
  out.write(kMagic, sizeof kMagic);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(store.embed_dim()));
  io::put<std::uint64_t>(out, store.size());
  for (const auto& r : store.records()) {
    io::put<std::uint16_t>(out, static_cast<std::uint16_t>(r.post_id.size()));
    io::put_bytes(out, r.post_id);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(r.n_tokens));
    out.write(reinterpret_cast<const char*>(r.values.data()),
              static_cast<std::streamsize>(r.values.size() * sizeof(float)));
  }
}

inline EmbeddingStore read_embeddings(std::istream& in) {
  std::string magic(sizeof kMagic, '\0');
  if (!in.read(magic.data(), sizeof kMagic) || magic != std::string(kMagic, sizeof kMagic))
    throw BadMagic("not a PSYEMB1 file");
  try {
    const auto dim = io::get<std::uint32_t>(in);
    const auto count = io::get<std::uint64_t>(in);
    if (dim == 0) throw DimMismatch("embed_dim is 0");
    EmbeddingStore store(dim);
    for (std::uint64_t k = 0; k < count; ++k) {
      EmbeddingSequence s;
      s.post_id = io::get_bytes(in, io::get<std::uint16_t>(in));
      s.n_tokens = io::get<std::uint32_t>(in);
      s.embed_dim = dim;
      if (s.n_tokens == 0) throw DimMismatch(s.post_id + ": zero tokens");
      std::string raw = io::get_bytes(in, s.n_tokens * dim * sizeof(float));
      s.values.resize(s.n_tokens * dim);
      std::memcpy(s.values.data(), raw.data(), raw.size());
      store.add(std::move(s));
    }
    if (!io::at_end(in)) throw DimMismatch("trailing bytes after " + std::to_string(count) + " records");
    return store;
  } catch (const Error&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw DimMismatch(std::string("record stream ") + e.what());
  }
}

inline EmbeddingStore read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingEmbedding("cannot open " + path.string());
  return read_embeddings(in);
}

inline void write_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  write_embeddings(out, store);
}

/// Reorders to corpus order; a pure reordering (no copies of unused records).
inline std::vector<const EmbeddingSequence*> align_to_corpus(const EmbeddingStore& store,
                                                             const std::vector<AnnotatedPost>& posts) {
  std::vector<const EmbeddingSequence*> out;
  out.reserve(posts.size());
  for (const auto& p : posts) {
    const auto* s = store.find(p.post_id);
    if (s == nullptr) throw MissingEmbedding(p.post_id);
    out.push_back(s);
  }
  return out;
}

struct EmbeddingManifest {
  std::string encoder;
  std::string layer = "last_hidden";
  std::size_t truncation = kMaxTokens;
  std::size_t embed_dim = 0;
  std::string sha256;
  std::vector<std::pair<std::string, std::size_t>> posts;  // (post_id, n_tokens)

  nlohmann::json to_json() const {
    nlohmann::json p = nlohmann::json::array();
    for (const auto& [id, n] : posts) p.push_back({{"post_id", id}, {"n_tokens", n}});
    return {{"encoder", encoder}, {"layer", layer},         {"truncation", truncation},
            {"embed_dim", embed_dim}, {"post_count", posts.size()}, {"sha256", sha256},
            {"posts", p}};
  }

  static EmbeddingManifest from_json(const nlohmann::json& j) {
    EmbeddingManifest m;
    try {
      m.encoder = j.at("encoder").get<std::string>();
      m.layer = j.at("layer").get<std::string>();
      m.truncation = j.at("truncation").get<std::size_t>();
      m.embed_dim = j.at("embed_dim").get<std::size_t>();
      m.sha256 = j.at("sha256").get<std::string>();
      for (const auto& p : j.value("posts", nlohmann::json::array()))
        m.posts.emplace_back(p.at("post_id").get<std::string>(), p.at("n_tokens").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("embedding manifest: ") + e.what());
    }
    return m;
  }
};

inline std::filesystem::path manifest_path(const std::filesystem::path& file) {
  return file.string() + ".manifest.json";
}

/// Writes the store and its sidecar manifest.
inline EmbeddingManifest export_store(const std::filesystem::path& path, const EmbeddingStore& store,
                                      const std::string& encoder) {
  write_embeddings(path, store);
  EmbeddingManifest m;
  m.encoder = encoder;
  m.embed_dim = store.embed_dim();
  m.sha256 = sha256_file(path);
  for (const auto& r : store.records()) m.posts.emplace_back(r.post_id, r.n_tokens);
  std::ofstream(manifest_path(path), std::ios::binary) << m.to_json().dump(2) << '\n';
  return m;
}

inline EmbeddingManifest read_manifest(const std::filesystem::path& file) {
  const auto mp = manifest_path(file);
  if (!std::filesystem::exists(mp)) throw MissingEmbedding("no manifest for " + file.string());
  try {
    return EmbeddingManifest::from_json(nlohmann::json::parse(read_file_bytes(mp)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("embedding manifest: ") + e.what());
  }
}

/// Loads a file after checking it against its manifest's hash.
inline EmbeddingStore load_verified(const std::filesystem::path& file) {
  EmbeddingManifest m = read_manifest(file);
  const std::string h = sha256_file(file);
  if (h != m.sha256) throw HashMismatch(file.string() + ": manifest " + m.sha256 + ", file " + h);
  return read_embeddings(file);
}

}  // namespace psyling::embedio
