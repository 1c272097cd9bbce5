#pragma once

// Within-text distribution of one post: one row of catalog features per sentence.
//
// FSEQ file = concatenation of records, each
//   "FSEQ"  u32 version(1)  u32 id_len  id bytes  u32 n_rows  u32 n_cols
//   n_rows * n_cols little-endian f32, row-major

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "psyling/binary_io.hpp"
#include "psyling/corpus/corpus.hpp"
#include "psyling/featx/features.hpp"

namespace psyling::featx {

struct FeatureSequence {
  std::string post_id;
  std::size_t n_rows = 0;
  std::size_t n_cols = kNumFeatures;
  std::vector<double> values;  // row-major

  std::span<const double> row(std::size_t i) const { return {values.data() + i * n_cols, n_cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * n_cols, n_cols}; }
  double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
  bool operator==(const FeatureSequence&) const = default;
};

inline FeatureSequence extract_document_sequence(const AnnotatedPost& post, const ResourceBundle& resources,
                                                 const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  FeatureSequence fs;
  fs.post_id = post.post_id;
  fs.n_rows = post.sentences.size();
  fs.n_cols = catalog.size();
  fs.values.reserve(fs.n_rows * fs.n_cols);
  for (const auto& s : post.sentences) {
    auto v = compute_sentence_vector(s, resources, catalog);
    fs.values.insert(fs.values.end(), v.begin(), v.end());
  }
  return fs;
}

inline constexpr char kFseqMagic[4] = {'F', 'S', 'E', 'Q'};
inline constexpr std::uint32_t kFseqVersion = 1;

inline void write_fseq_record(std::ostream& out, const FeatureSequence& fs) {
  out.write(kFseqMagic, 4);
  io::put<std::uint32_t>(out, kFseqVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.post_id.size()));
  io::put_bytes(out, fs.post_id);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.n_rows));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.n_cols));
  for (double v : fs.values) io::put<float>(out, static_cast<float>(v));
}

inline void write_fseq(const std::filesystem::path& path, const std::vector<FeatureSequence>& seqs) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& fs : seqs) write_fseq_record(out, fs);
  if (!out) throw MalformedFeatureFile("cannot write " + path.string());
}

inline std::vector<FeatureSequence> read_fseq(std::istream& in) {
  std::vector<FeatureSequence> out;
  try {
    while (!io::at_end(in)) {
      std::string magic = io::get_bytes(in, 4);
      if (magic != std::string(kFseqMagic, 4)) throw MalformedFeatureFile("bad FSEQ magic");
      if (io::get<std::uint32_t>(in) != kFseqVersion) throw MalformedFeatureFile("unsupported FSEQ version");
      FeatureSequence fs;
      fs.post_id = io::get_bytes(in, io::get<std::uint32_t>(in));
      fs.n_rows = io::get<std::uint32_t>(in);
      fs.n_cols = io::get<std::uint32_t>(in);
      if (fs.n_cols != kNumFeatures)
        throw MalformedFeatureFile("record " + fs.post_id + " has " + std::to_string(fs.n_cols) + " columns");
      fs.values.resize(fs.n_rows * fs.n_cols);
      for (double& v : fs.values) {
        v = io::get<float>(in);
        if (!std::isfinite(v)) throw MalformedFeatureFile("non-finite value in " + fs.post_id);
      }
      out.push_back(std::move(fs));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw MalformedFeatureFile(std::string("FSEQ: ") + e.what());
  }
  return out;
}

inline std::vector<FeatureSequence> read_fseq(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFeatureFile("cannot open " + path.string());
  return read_fseq(in);
}

/// Debug view: header row `post_id,sentence,<feature ids...>`.
inline void write_fseq_csv(std::ostream& out, const std::vector<FeatureSequence>& seqs,
                           const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  out << "post_id,sentence";
  for (const auto& s : catalog) out << ',' << s.id;
  out << '\n';
  out << std::setprecision(9);
  for (const auto& fs : seqs)
    for (std::size_t r = 0; r < fs.n_rows; ++r) {
      out << fs.post_id << ',' << r;
      for (double v : fs.row(r)) out << ',' << static_cast<float>(v);
      out << '\n';
    }
}

}  // namespace psyling::featx
