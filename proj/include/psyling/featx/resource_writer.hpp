#pragma once

// Writes resource directories (files + manifest.json with sha256). Used to
// build stand-in resources and test fixtures; licensed resources in the same
// formats can be dropped in by regenerating the manifest.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "psyling/featx/catalog.hpp"
#include "psyling/featx/resources.hpp"
#include "psyling/hash.hpp"

namespace psyling::featx {

struct ResourceFile {
  std::string id;
  ResourceKind kind = ResourceKind::Lexicon;
  std::string content;
};

inline std::vector<ManifestEntry> write_resource_dir(const std::filesystem::path& dir,
                                                     const std::vector<ResourceFile>& files) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const auto& f : files) {
    std::string name = f.id + ".tsv";
    std::ofstream(dir / name, std::ios::binary) << f.content;
    entries.push_back(ManifestEntry{f.id, name, sha256_hex(f.content), f.kind});
  }
  write_manifest(dir, entries);
  return entries;
}

/// Every resource the catalog depends on, with its kind and (for lexicons) the
/// categories the catalog reads.
struct ResourceRequirement {
  ResourceKind kind;
  std::vector<std::string> categories;
  int ngram_n = 0;
};

inline std::map<std::string, ResourceRequirement> catalog_requirements(
    const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  std::map<std::string, ResourceRequirement> req;
  for (const auto& s : catalog) {
    if (s.resource.empty()) continue;
    auto [it, inserted] = req.try_emplace(s.resource, ResourceRequirement{required_kind(s.measure), {}, s.ngram_n});
    if (!s.category.empty()) it->second.categories.push_back(s.category);
  }
  return req;
}

/// One toy entry per resource, keyed by `word` (n-gram tables: word repeated n times).
inline std::vector<ResourceFile> toy_resources(const std::string& word = "toyword",
                                               const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  std::vector<ResourceFile> files;
  for (const auto& [id, r] : catalog_requirements(catalog)) {
    ResourceFile f{id, r.kind, {}};
    switch (r.kind) {
      case ResourceKind::Lexicon: f.content = word + "\t" + r.categories.front() + "\t1\n"; break;
      case ResourceKind::WordList: f.content = word + "\n"; break;
      case ResourceKind::Scalar: f.content = word + "\t1\n"; break;
      case ResourceKind::Ngram: {
        std::string key = word;
        for (int i = 1; i < r.ngram_n; ++i) key += " " + word;
        f.content = key + "\t1\n";
        break;
      }
    }
    files.push_back(std::move(f));
  }
  return files;
}

}  // namespace psyling::featx
