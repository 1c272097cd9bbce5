#pragma once

// Deterministic stand-in for a contextual encoder: each token's vector is a
// pseudo-random function of (encoder salt, case-folded form), plus a small
// position term so repeated words differ by position. Posts longer than the
// truncation length keep their first tokens.

#include <cstdint>
#include <string>

#include "psyling/embedio/embeddings.hpp"
#include "psyling/featx/resources.hpp"
#include "psyling/random.hpp"

namespace psyling::embedio {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline EmbeddingSequence standin_encode(const AnnotatedPost& post, std::string_view encoder, std::size_t dim,
                                        std::size_t truncation = kMaxTokens) {
  EmbeddingSequence s;
  s.post_id = post.post_id;
  s.embed_dim = dim;
  const std::uint64_t salt = fnv1a64(encoder);
  std::size_t pos = 0;
  for (const auto& sent : post.sentences)
    for (const auto& tok : sent.tokens) {
      if (pos == truncation) break;
      Rng rng(mix_seed(salt, fnv1a64(featx::fold_case(tok.form))));
      const double phase = 0.05 * static_cast<double>(pos);
      for (std::size_t d = 0; d < dim; ++d)
        s.values.push_back(static_cast<float>(uniform(rng, -1.0, 1.0) + 0.1 * std::sin(phase * static_cast<double>(d + 1))));
      ++pos;
    }
  if (pos == 0) {  // the format needs at least one row
    s.values.assign(dim, 0.0f);
    pos = 1;
  }
  s.n_tokens = pos;
  return s;
}

inline EmbeddingStore standin_store(const std::vector<AnnotatedPost>& posts, std::string_view encoder,
                                    std::size_t dim, std::size_t truncation = kMaxTokens) {
  EmbeddingStore store(dim);
  for (const auto& p : posts) store.add(standin_encode(p, encoder, dim, truncation));
  return store;
}

}  // namespace psyling::embedio
