#pragma once

// Desk-scale synthetic workspace: a linearly separable annotated corpus, a
// stand-in resource directory in which each class's cue word hits its own
// lexicon categories, and stand-in embedding files. Everything is a pure
// function of the options.

#include <filesystem>
#include <map>

#include "psyling/corpus/corpus.hpp"
#include "psyling/embedio/embeddings.hpp"
#include "psyling/embedio/standin.hpp"
#include "psyling/featx/resource_writer.hpp"

namespace psyling::synth {

struct SynthOptions {
  std::size_t per_class = 10;
  std::uint64_t seed = 7;
  std::vector<MhcLabel> classes{kAllLabels.begin(), kAllLabels.end()};
  std::size_t min_sentences = 1;
  std::size_t max_sentences = 9;
};

/// One cue noun per class, indexed by label code.
inline std::string_view cue_word(MhcLabel l) {
  static constexpr std::array<std::string_view, kNumLabels> words = {
      "distraction", "worry", "mania", "hopelessness", "flashback", "deadline", "weekend"};
  return words[static_cast<std::size_t>(label_code(l))];
}

namespace detail {

inline const std::vector<std::string>& adjectives() {
  static const std::vector<std::string> a = {"big", "small", "old", "new", "strange", "long"};
  return a;
}

inline AnnotatedSentence make_sentence(const std::string& cue, Rng& rng) {
  AnnotatedSentence s;
  const auto& adj = adjectives();
  const bool with_adj = uniform01(rng) < 0.5;
  const std::string a = adj[uniform_index(rng, adj.size())];
  if (uniform01(rng) < 0.5) {
    // I think about the [adj] CUE .
    s.tokens = {{"I", "PRP", "I"}, {"think", "VBP", "think"}, {"about", "IN", "about"}, {"the", "DT", "the"}};
    if (with_adj) s.tokens.push_back({a, "JJ", a});
    s.tokens.push_back({cue, "NN", cue});
    s.tokens.push_back({".", ".", "."});
    s.parse = ParseTree::parse("(ROOT (S (NP (PRP I)) (VP (VBP think) (PP (IN about) (NP (DT the) " +
                               (with_adj ? "(JJ " + a + ") " : std::string()) + "(NN " + cue + ")))) (. .)))");
  } else {
    // The [adj] CUE is here again .
    s.tokens = {{"The", "DT", "the"}};
    if (with_adj) s.tokens.push_back({a, "JJ", a});
    s.tokens.insert(s.tokens.end(),
                    {{cue, "NN", cue}, {"is", "VBZ", "be"}, {"here", "RB", "here"}, {"again", "RB", "again"}, {".", ".", "."}});
    s.parse = ParseTree::parse("(ROOT (S (NP (DT The) " + (with_adj ? "(JJ " + a + ") " : std::string()) + "(NN " + cue +
                               ")) (VP (VBZ is) (ADVP (RB here)) (ADVP (RB again))) (. .)))");
  }
  return s;
}

}  // namespace detail

/// per_class posts for each class; every sentence carries the class cue.
inline std::vector<AnnotatedPost> synth_corpus(const SynthOptions& opt) {
  if (opt.min_sentences == 0 || opt.max_sentences < opt.min_sentences) throw ConfigError("bad synthetic sentence range");
  Rng rng(opt.seed);
  std::vector<AnnotatedPost> posts;
  for (MhcLabel l : opt.classes)
    for (std::size_t i = 0; i < opt.per_class; ++i) {
      AnnotatedPost p;
      p.post_id = "syn_" + std::string(label_name(l)) + "_" + std::to_string(i);
      p.user_id = "user_" + p.post_id;
      p.source = Source::Synthetic;
      p.label = l;
      const std::size_t n = opt.min_sentences + uniform_index(rng, opt.max_sentences - opt.min_sentences + 1);
      for (std::size_t k = 0; k < n; ++k) p.sentences.push_back(detail::make_sentence(std::string(cue_word(l)), rng));
      posts.push_back(std::move(p));
    }
  return posts;
}

/// Stand-in resources: the catalog's toy entries plus, per lexicon, each cue
/// word mapped to a class-specific category; scalar lists score cues by code.
inline std::vector<featx::ResourceFile> synth_resources() {
  auto files = featx::toy_resources("toyword");
  const auto req = featx::catalog_requirements();
  for (auto& f : files) {
    const auto& r = req.at(f.id);
    for (MhcLabel l : kAllLabels) {
      const auto k = static_cast<std::size_t>(label_code(l));
      const std::string w(cue_word(l));
      switch (r.kind) {
        case featx::ResourceKind::Lexicon:
          f.content += w + "\t" + r.categories[(k * 5 + 1) % r.categories.size()] + "\t" + std::to_string(1 + k) + "\n";
          break;
        case featx::ResourceKind::Scalar: f.content += w + "\t" + std::to_string(2 + 3 * k) + "\n"; break;
        case featx::ResourceKind::WordList:
          if (k % 2 == 0) f.content += w + "\n";
          break;
        case featx::ResourceKind::Ngram:
          if (r.ngram_n == 1) f.content += w + "\t" + std::to_string(10 * (k + 1)) + "\n";
          break;
      }
    }
  }
  return files;
}

struct SynthWorkspace {
  std::filesystem::path corpus;
  std::filesystem::path resources;
  std::map<std::string, std::filesystem::path> embeddings;  // encoder name -> PSYEMB1 file
};

/// Writes corpus.jsonl, resources/ and embeddings/<encoder>.psyemb (with manifests) under dir.
inline SynthWorkspace write_synth_workspace(const std::filesystem::path& dir, const SynthOptions& opt,
                                            std::size_t embed_dim = 16,
                                            const std::vector<std::string>& encoders = {"bert-base-uncased", "roberta-base"}) {
  std::filesystem::create_directories(dir / "embeddings");
  SynthWorkspace ws{dir / "corpus.jsonl", dir / "resources", {}};
  const auto posts = synth_corpus(opt);
  emit_corpus(ws.corpus, posts);
  featx::write_resource_dir(ws.resources, synth_resources());
  for (const auto& enc : encoders) {
    auto path = dir / "embeddings" / (enc + ".psyemb");
    embedio::export_store(path, embedio::standin_store(posts, enc, embed_dim, embedio::kMaxTokens), enc);
    ws.embeddings[enc] = path;
  }
  return ws;
}

}  // namespace psyling::synth
