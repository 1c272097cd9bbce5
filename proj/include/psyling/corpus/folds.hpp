#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "psyling/corpus/corpus.hpp"
#include "psyling/random.hpp"

namespace psyling {

struct FoldAssignment {
  int n_folds = 0;
  std::vector<std::string> post_ids;  // corpus order
  std::vector<int> fold;              // fold[i] belongs to post_ids[i]

  int fold_of(const std::string& post_id) const {
    for (std::size_t i = 0; i < post_ids.size(); ++i)
      if (post_ids[i] == post_id) return fold[i];
    return -1;
  }

  /// Corpus indices held out in fold k.
  std::vector<std::size_t> members(int k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i)
      if (fold[i] == k) out.push_back(i);
    return out;
  }

  bool operator==(const FoldAssignment&) const = default;
};

/// Stratified assignment: each class is shuffled with one seeded generator
/// (classes visited in label-code order), then dealt round-robin. The deal
/// position carries over between classes so fold sizes stay balanced.
inline FoldAssignment assign_folds(const std::vector<AnnotatedPost>& posts, int n_folds,
                                   std::uint64_t seed) {
  if (n_folds < 2) throw ConfigError("n_folds must be >= 2");
  std::map<MhcLabel, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < posts.size(); ++i) by_class[posts[i].label].push_back(i);
  for (const auto& [label, idx] : by_class)
    if (idx.size() < static_cast<std::size_t>(n_folds))
      throw ClassTooSmall(std::string(label_name(label)) + " has " + std::to_string(idx.size()) +
                          " posts, need >= " + std::to_string(n_folds));

  FoldAssignment fa;
  fa.n_folds = n_folds;
  fa.fold.assign(posts.size(), -1);
  for (const auto& p : posts) fa.post_ids.push_back(p.post_id);

  Rng rng(seed);
  std::size_t deal = 0;
  for (auto& [label, idx] : by_class) {
    shuffle(std::span<std::size_t>(idx), rng);
    for (std::size_t i : idx) fa.fold[i] = static_cast<int>(deal++ % static_cast<std::size_t>(n_folds));
  }
  return fa;
}

}  // namespace psyling
