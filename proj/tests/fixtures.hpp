#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psyling/corpus/corpus.hpp"

namespace psyling::testing {

/// "The/DT/the cat/NN/cat ..." -> tokens; parse given in bracket form.
inline AnnotatedSentence sentence(const std::string& tagged, const std::string& parse) {
  AnnotatedSentence s;
  std::istringstream in(tagged);
  std::string item;
  while (in >> item) {
    auto a = item.find('/');
    auto b = item.find('/', a + 1);
    s.tokens.push_back(Token{item.substr(0, a), item.substr(a + 1, b - a - 1), item.substr(b + 1)});
  }
  s.parse = ParseTree::parse(parse);
  return s;
}

inline AnnotatedSentence cat_sat() {
  return sentence("The/DT/the cat/NN/cat sat/VBD/sit on/IN/on the/DT/the mat/NN/mat ././.",
                  "(ROOT (S (NP (DT The) (NN cat)) (VP (VBD sat) (PP (IN on) (NP (DT the) (NN mat)))) (. .)))");
}

inline AnnotatedPost post(std::string id, MhcLabel label, std::vector<AnnotatedSentence> sents) {
  AnnotatedPost p;
  p.post_id = id;
  p.user_id = "u_" + id;
  p.source = Source::Synthetic;
  p.label = label;
  p.sentences = std::move(sents);
  return p;
}

/// n_per_class posts for each of the given labels, one trivial sentence each.
inline std::vector<AnnotatedPost> balanced_posts(std::size_t n_per_class,
                                                 const std::vector<MhcLabel>& labels) {
  std::vector<AnnotatedPost> out;
  for (MhcLabel l : labels)
    for (std::size_t i = 0; i < n_per_class; ++i)
      out.push_back(post(std::string(label_name(l)) + "_" + std::to_string(i), l, {cat_sat()}));
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("psyling_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace psyling::testing
