#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psyling/embedio/embeddings.hpp"
#include "psyling/featx/sequence.hpp"
#include "psyling/models/architecture.hpp"
#include "psyling/neural/lstm.hpp"

namespace psyling::models {

using neural::Lengths;
using neural::Mat;
using neural::ParamList;
using neural::Seq;

/// Per-feature z-score; a feature with zero spread keeps scale 1.
struct Standardizer {
  std::vector<double> mean, scale;

  bool empty() const { return mean.empty(); }

  static Standardizer identity(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

  /// Statistics over the first seq_len rows of every sequence (the rows models consume).
  static Standardizer fit(const std::vector<const featx::FeatureSequence*>& seqs, std::size_t seq_len) {
    const std::size_t D = seqs.empty() ? featx::kNumFeatures : seqs.front()->n_cols;
    std::vector<double> sum(D, 0.0), sq(D, 0.0);
    double n = 0;
    for (const auto* s : seqs)
      for (std::size_t r = 0; r < std::min(seq_len, s->n_rows); ++r) {
        n += 1;
        for (std::size_t c = 0; c < D; ++c) sum[c] += s->at(r, c);
      }
    Standardizer st{std::vector<double>(D, 0.0), std::vector<double>(D, 1.0)};
    if (n == 0) return st;
    for (std::size_t c = 0; c < D; ++c) st.mean[c] = sum[c] / n;
    for (const auto* s : seqs)
      for (std::size_t r = 0; r < std::min(seq_len, s->n_rows); ++r)
        for (std::size_t c = 0; c < D; ++c) {
          const double d = s->at(r, c) - st.mean[c];
          sq[c] += d * d;
        }
    for (std::size_t c = 0; c < D; ++c) {
      const double sd = std::sqrt(sq[c] / n);
      st.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return st;
  }

  double apply(std::size_t c, double v) const { return (v - mean[c]) / scale[c]; }
};

/// One post as a model sees it: standardized feature rows (at most seq_len)
/// and/or a token-embedding sequence. The label is a class index.
struct PostInput {
  std::string post_id;
  std::optional<std::size_t> label;
  Mat<double> features;  // (rows × feature_dim), already standardized
  const embedio::EmbeddingSequence* embedding = nullptr;
};

/// Truncates to the first seq_len sentences and standardizes.
inline PostInput make_input(const featx::FeatureSequence* fs, const embedio::EmbeddingSequence* emb,
                            std::optional<std::size_t> label, const Standardizer& st, std::size_t seq_len) {
  PostInput in;
  in.label = label;
  in.embedding = emb;
  if (fs) {
    in.post_id = fs->post_id;
    const std::size_t rows = std::min(seq_len, fs->n_rows);
    in.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(fs->n_cols));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < fs->n_cols; ++c)
        in.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = st.apply(c, fs->at(r, c));
  } else if (emb) {
    in.post_id = emb->post_id;
  }
  return in;
}

template <class S>
struct Batch {
  Seq<S> features;
  Lengths feature_len;
  Seq<S> embeddings;
  Lengths embedding_len;
  std::size_t size = 0;
};

/// Feature sequences are padded to exactly seq_len; embedding sequences to the
/// longest one in the batch. Padding rows are zero and masked.
template <class S>
Batch<S> make_batch(const ArchitectureSpec& spec, std::span<const PostInput* const> items, std::size_t seq_len) {
  Batch<S> b;
  b.size = items.size();
  const auto B = static_cast<Eigen::Index>(items.size());
  if (spec.uses(InputKind::Features)) {
    const auto D = static_cast<Eigen::Index>(spec.feature_dim);
    b.features.assign(seq_len, Mat<S>::Zero(B, D));
    for (Eigen::Index r = 0; r < B; ++r) {
      const auto& f = items[static_cast<std::size_t>(r)]->features;
      if (f.rows() > 0 && f.cols() != D)
        throw ArchitectureMismatch("feature width " + std::to_string(f.cols()) + ", model " + std::to_string(D));
      const auto rows = std::min<Eigen::Index>(f.rows(), static_cast<Eigen::Index>(seq_len));
      for (Eigen::Index t = 0; t < rows; ++t) b.features[static_cast<std::size_t>(t)].row(r) = f.row(t).template cast<S>();
      b.feature_len.push_back(static_cast<std::size_t>(rows));
    }
  }
  if (spec.uses(InputKind::Embeddings)) {
    std::size_t T = 0;
    for (const auto* it : items) {
      if (it->embedding == nullptr) throw ArchitectureMismatch("model needs embeddings for post " + it->post_id);
      if (it->embedding->embed_dim != spec.embed_dim)
        throw ArchitectureMismatch("embedding width " + std::to_string(it->embedding->embed_dim) + ", model " +
                                   std::to_string(spec.embed_dim));
      T = std::max(T, it->embedding->n_tokens);
    }
    const auto E = static_cast<Eigen::Index>(spec.embed_dim);
    b.embeddings.assign(T, Mat<S>::Zero(B, E));
    for (Eigen::Index r = 0; r < B; ++r) {
      const auto* e = items[static_cast<std::size_t>(r)]->embedding;
      for (std::size_t t = 0; t < e->n_tokens; ++t)
        for (std::size_t d = 0; d < e->embed_dim; ++d)
          b.embeddings[t](r, static_cast<Eigen::Index>(d)) = static_cast<S>(e->at(t, d));
      b.embedding_len.push_back(e->n_tokens);
    }
  }
  return b;
}

/// Branches → concatenation → linear head producing logits (sigmoid applied
/// by callers).
template <class S>
class Classifier {
 public:
  struct Branch {
    InputKind input;
    neural::BiLstmStack<S> stack;
    std::vector<neural::DenseLayer<S>> dense;
  };
  struct BranchCache {
    typename neural::BiLstmStack<S>::Cache stack;
    std::vector<typename neural::DenseLayer<S>::Cache> dense;
  };
  struct Cache {
    std::vector<BranchCache> branches;
    typename neural::Linear<S>::Cache head;
    std::vector<Eigen::Index> widths;
  };

  explicit Classifier(ArchitectureSpec spec) : spec_(std::move(spec)) {
    require_valid();
    std::size_t concat = 0;
    for (std::size_t k = 0; k < spec_.branches.size(); ++k) {
      const auto& bs = spec_.branches[k];
      const std::string name = "branch" + std::to_string(k);
      const std::size_t in = bs.input == InputKind::Features ? spec_.feature_dim : spec_.embed_dim;
      Branch br{bs.input, neural::BiLstmStack<S>(name + ".lstm", in, bs.hidden, bs.lstm_layers, bs.lstm_dropout), {}};
      std::size_t width = 2 * bs.hidden;
      for (std::size_t d = 0; d < bs.dense.size(); ++d) {
        br.dense.emplace_back(name + ".fc" + std::to_string(d), width, bs.dense[d].width, bs.dense[d].relu,
                              bs.dense[d].dropout);
        width = bs.dense[d].width;
      }
      concat += width;
      branches_.push_back(std::move(br));
    }
    head_ = neural::Linear<S>("head", concat, spec_.n_classes);
  }

  /// Parameters drawn in construction order from one stream.
  void init(Rng& rng) {
    for (auto& b : branches_) {
      b.stack.init(rng);
      for (auto& d : b.dense) d.init(rng);
    }
    head_.init(rng);
  }

  const ArchitectureSpec& spec() const { return spec_; }

  /// dropout == nullptr selects evaluation mode.
  Mat<S> logits(const Batch<S>& batch, Rng* dropout, Cache* cache = nullptr) const {
    std::vector<Mat<S>> outs;
    if (cache) {
      cache->branches.assign(branches_.size(), {});
      cache->widths.clear();
    }
    Eigen::Index total = 0;
    for (std::size_t k = 0; k < branches_.size(); ++k) {
      const Branch& br = branches_[k];
      BranchCache* bc = cache ? &cache->branches[k] : nullptr;
      const bool feats = br.input == InputKind::Features;
      const Seq<S>& x = feats ? batch.features : batch.embeddings;
      const Lengths& len = feats ? batch.feature_len : batch.embedding_len;
      if (len.size() != batch.size) throw ArchitectureMismatch("batch lacks an input this model consumes");
      Mat<S> h = br.stack.forward(x, len, dropout, bc ? &bc->stack : nullptr);
      if (bc) bc->dense.resize(br.dense.size());
      for (std::size_t d = 0; d < br.dense.size(); ++d) h = br.dense[d].forward(h, dropout, bc ? &bc->dense[d] : nullptr);
      total += h.cols();
      if (cache) cache->widths.push_back(h.cols());
      outs.push_back(std::move(h));
    }
    Mat<S> cat(static_cast<Eigen::Index>(batch.size), total);
    Eigen::Index off = 0;
    for (const auto& o : outs) {
      cat.middleCols(off, o.cols()) = o;
      off += o.cols();
    }
    return head_.forward(cat, cache ? &cache->head : nullptr);
  }

  void backward(const Cache& cache, const Mat<S>& d_logits) {
    Mat<S> d_cat = head_.backward(cache.head, d_logits);
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < branches_.size(); ++k) {
      Branch& br = branches_[k];
      const BranchCache& bc = cache.branches[k];
      Mat<S> d = d_cat.middleCols(off, cache.widths[k]);
      off += cache.widths[k];
      for (std::size_t j = br.dense.size(); j-- > 0;) d = br.dense[j].backward(bc.dense[j], d);
      br.stack.backward(bc.stack, d);
    }
  }

  ParamList<S> params() {
    ParamList<S> ps;
    for (auto& b : branches_) {
      b.stack.params(ps);
      for (auto& d : b.dense) d.params(ps);
    }
    head_.params(ps);
    return ps;
  }

  neural::Linear<S>& head() { return head_; }

 private:
  void require_valid() const {
    if (spec_.n_classes < 2) throw ConfigError("architecture needs at least 2 classes");
    if (spec_.branches.empty()) throw ConfigError("architecture has no branches");
    for (const auto& b : spec_.branches) {
      if (b.hidden == 0 || b.lstm_layers == 0) throw ConfigError("BiLSTM needs hidden > 0 and layers > 0");
      if (b.input == InputKind::Embeddings && spec_.embed_dim == 0) throw ConfigError("embedding branch needs embed_dim");
      for (const auto& d : b.dense)
        if (d.width == 0 || d.dropout < 0.0 || d.dropout >= 1.0) throw ConfigError("invalid dense layer");
      if (b.lstm_dropout < 0.0 || b.lstm_dropout >= 1.0) throw ConfigError("invalid BiLSTM dropout");
    }
  }

  ArchitectureSpec spec_;
  std::vector<Branch> branches_;
  neural::Linear<S> head_;
};

}  // namespace psyling::models
