#pragma once

// Training loop, inference and persistence for the component classifiers.
// Loss is mean sigmoid binary cross-entropy against one-hot targets. The
// checkpoint kept is the epoch with the strictly best dev macro F1.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "psyling/eval/metrics.hpp"
#include "psyling/labels.hpp"
#include "psyling/models/classifier.hpp"
#include "psyling/neural/adamw.hpp"
#include "psyling/neural/checkpoint.hpp"
#include "psyling/neural/loss.hpp"

namespace psyling::models {

struct TrainConfig {
  std::size_t epochs = 500;
  std::size_t batch_size = 256;
  std::size_t seq_len = 10;
  neural::AdamWConfig optimizer{1e-3, 0.9, 0.999, 1e-8, 1e-4};
  double clip_norm = 5.0;  // 0 disables clipping
  std::uint64_t seed = 0;

  static TrainConfig psyling_defaults() { return {}; }
  static TrainConfig hybrid_defaults() {
    TrainConfig c;
    c.epochs = 12;
    c.optimizer.lr = 2e-5;
    c.clip_norm = 0.0;
    return c;
  }
  static TrainConfig baseline_defaults() { return hybrid_defaults(); }
  static TrainConfig defaults_for(ModelKind k) {
    return k == ModelKind::Psyling ? psyling_defaults() : k == ModelKind::Hybrid ? hybrid_defaults() : baseline_defaults();
  }

  nlohmann::json to_json() const {
    return {{"epochs", epochs},
            {"batch_size", batch_size},
            {"seq_len", seq_len},
            {"lr", optimizer.lr},
            {"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"eps", optimizer.eps},
            {"weight_decay", optimizer.weight_decay},
            {"clip_norm", clip_norm},
            {"seed", seed}};
  }

  /// Missing keys keep the values of `base`.
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base) {
    try {
      base.epochs = j.value("epochs", base.epochs);
      base.batch_size = j.value("batch_size", base.batch_size);
      base.seq_len = j.value("seq_len", base.seq_len);
      base.optimizer.lr = j.value("lr", base.optimizer.lr);
      base.optimizer.beta1 = j.value("beta1", base.optimizer.beta1);
      base.optimizer.beta2 = j.value("beta2", base.optimizer.beta2);
      base.optimizer.eps = j.value("eps", base.optimizer.eps);
      base.optimizer.weight_decay = j.value("weight_decay", base.optimizer.weight_decay);
      base.clip_norm = j.value("clip_norm", base.clip_norm);
      base.seed = j.value("seed", base.seed);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("train config: ") + e.what());
    }
    if (base.batch_size == 0 || base.seq_len == 0) throw ConfigError("batch_size and seq_len must be positive");
    return base;
  }
};

/// A post as handed to training or inference. Pointers are borrowed.
struct Example {
  std::string post_id;
  const featx::FeatureSequence* features = nullptr;
  const embedio::EmbeddingSequence* embedding = nullptr;
  std::optional<std::size_t> label;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0;
  double dev_macro_f1 = 0;
};

template <class S>
struct TrainedModel {
  Classifier<S> model;
  Standardizer standardizer;
  TrainConfig config;
  ClassSet classes;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0;
  std::vector<EpochLog> log;
};

struct PredictionVector {
  std::string post_id;
  std::vector<double> scores;
  std::size_t decided = 0;
  std::optional<std::size_t> label_true;
};

/// Highest score; ties go to the lowest index.
inline std::size_t decide_argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return best;
}

/// Multi-label view: every class scoring at least tau.
inline std::vector<std::size_t> decide_threshold(std::span<const double> scores, double tau) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (scores[k] >= tau) out.push_back(k);
  return out;
}

namespace detail {

inline std::vector<PostInput> prepare(const ArchitectureSpec& spec, const std::vector<Example>& xs,
                                      const Standardizer& st, std::size_t seq_len) {
  std::vector<PostInput> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    if (spec.uses(InputKind::Features) && x.features == nullptr)
      throw ArchitectureMismatch("model needs feature sequences for post " + x.post_id);
    if (x.features && x.features->n_cols != spec.feature_dim)
      throw ArchitectureMismatch("feature width " + std::to_string(x.features->n_cols) + " for post " + x.post_id);
    PostInput in = make_input(spec.uses(InputKind::Features) ? x.features : nullptr, x.embedding, x.label, st, seq_len);
    in.post_id = x.post_id;
    out.push_back(std::move(in));
  }
  return out;
}

template <class S>
Mat<S> one_hot(std::span<const PostInput* const> items, std::size_t C) {
  Mat<S> y = Mat<S>::Zero(static_cast<Eigen::Index>(items.size()), static_cast<Eigen::Index>(C));
  for (std::size_t r = 0; r < items.size(); ++r) y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*items[r]->label)) = S(1);
  return y;
}

/// Sigmoid scores for every input, evaluation mode, in chunks of `chunk`.
template <class S>
std::vector<std::vector<double>> score_all(const Classifier<S>& model, const std::vector<PostInput>& inputs,
                                           std::size_t seq_len, std::size_t chunk) {
  std::vector<std::vector<double>> out;
  std::vector<const PostInput*> ptrs;
  for (const auto& in : inputs) ptrs.push_back(&in);
  for (std::size_t i = 0; i < ptrs.size(); i += chunk) {
    std::span<const PostInput* const> items(ptrs.data() + i, std::min(chunk, ptrs.size() - i));
    Mat<S> p = neural::sigmoid<S>(model.logits(make_batch<S>(model.spec(), items, seq_len), nullptr));
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(p.cols()));
      for (Eigen::Index c = 0; c < p.cols(); ++c) row[static_cast<std::size_t>(c)] = static_cast<double>(p(r, c));
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace detail

template <class S>
TrainedModel<S> train_model(const ArchitectureSpec& spec, const ClassSet& classes, const TrainConfig& cfg,
                            const std::vector<Example>& train, const std::vector<Example>& dev) {
  if (train.empty()) throw EmptySplit("training split is empty");
  if (dev.empty()) throw EmptySplit("dev split is empty");
  if (spec.n_classes != classes.size())
    throw ArchitectureMismatch("architecture has " + std::to_string(spec.n_classes) + " outputs for " +
                               std::to_string(classes.size()) + " classes");
  for (const auto* split : {&train, &dev})
    for (const auto& x : *split)
      if (!x.label || *x.label >= classes.size()) throw UnknownLabel("unlabeled or out-of-range post " + x.post_id);

  Standardizer st = Standardizer::identity(spec.feature_dim);
  if (spec.uses(InputKind::Features)) {
    std::vector<const featx::FeatureSequence*> seqs;
    for (const auto& x : train)
      if (x.features) seqs.push_back(x.features);
    st = Standardizer::fit(seqs, cfg.seq_len);
  }
  const auto train_in = detail::prepare(spec, train, st, cfg.seq_len);
  const auto dev_in = detail::prepare(spec, dev, st, cfg.seq_len);

  TrainedModel<S> tm{Classifier<S>(spec), st, cfg, classes, 0, 0.0, {}};
  Rng init_rng(mix_seed(cfg.seed, 0)), order_rng(mix_seed(cfg.seed, 1)), drop_rng(mix_seed(cfg.seed, 2));
  tm.model.init(init_rng);
  ParamList<S> params = tm.model.params();
  neural::AdamW<S> opt(params, cfg.optimizer);

  std::vector<Mat<S>> best;
  double best_f1 = -1.0;
  std::vector<std::size_t> truth;
  for (const auto& d : dev_in) truth.push_back(*d.label);

  std::vector<const PostInput*> order;
  for (const auto& in : train_in) order.push_back(&in);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(std::span<const PostInput*>(order), order_rng);
    double loss_sum = 0;
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
      std::span<const PostInput* const> items(order.data() + i, std::min(cfg.batch_size, order.size() - i));
      Batch<S> batch = make_batch<S>(spec, items, cfg.seq_len);
      typename Classifier<S>::Cache cache;
      Mat<S> logits = tm.model.logits(batch, &drop_rng, &cache);
      Mat<S> d_logits;
      const double loss = neural::sigmoid_bce_loss(logits, detail::one_hot<S>(items, classes.size()), &d_logits);
      if (!std::isfinite(loss)) throw DivergedLoss("non-finite loss at epoch " + std::to_string(epoch));
      neural::zero_grads(params);
      tm.model.backward(cache, d_logits);
      if (cfg.clip_norm > 0.0) {
        const double norm = neural::clip_grad_norm(params, cfg.clip_norm);
        if (!std::isfinite(norm)) throw DivergedLoss("non-finite gradient at epoch " + std::to_string(epoch));
      }
      opt.step();
      loss_sum += loss * static_cast<double>(items.size());
    }

    std::vector<std::size_t> pred;
    for (const auto& s : detail::score_all(tm.model, dev_in, cfg.seq_len, cfg.batch_size)) pred.push_back(decide_argmax(s));
    const double f1 = eval::macro_f1(truth, pred, classes.size());
    tm.log.push_back({epoch, loss_sum / static_cast<double>(order.size()), f1});
    if (f1 > best_f1) {
      best_f1 = f1;
      tm.best_epoch = epoch;
      best.clear();
      for (auto* p : params) best.push_back(p->value);
    }
  }
  if (!best.empty())
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best[k];
  tm.best_dev_f1 = std::max(best_f1, 0.0);
  return tm;
}

/// Scores each post on its own (batch of one), so a post's output never
/// depends on which other posts are scored alongside it.
template <class S>
std::vector<PredictionVector> predict_proba(const TrainedModel<S>& tm, const std::vector<Example>& posts) {
  const auto inputs = detail::prepare(tm.model.spec(), posts, tm.standardizer, tm.config.seq_len);
  const auto scores = detail::score_all(tm.model, inputs, tm.config.seq_len, 1);
  std::vector<PredictionVector> out;
  for (std::size_t i = 0; i < posts.size(); ++i)
    out.push_back({posts[i].post_id, scores[i], decide_argmax(scores[i]), posts[i].label});
  return out;
}

template <class S>
neural::Checkpoint to_checkpoint(TrainedModel<S>& tm) {
  neural::Checkpoint ck;
  ck.arch_id = static_cast<std::uint32_t>(tm.model.spec().kind);
  ck.hyper = {{"architecture", tm.model.spec().to_json()},
              {"train", tm.config.to_json()},
              {"classes", tm.classes.names()}};
  neural::store_params(ck, tm.model.params());
  Mat<double> mean(1, static_cast<Eigen::Index>(tm.standardizer.mean.size()));
  Mat<double> scale(1, static_cast<Eigen::Index>(tm.standardizer.scale.size()));
  for (std::size_t c = 0; c < tm.standardizer.mean.size(); ++c) {
    mean(0, static_cast<Eigen::Index>(c)) = tm.standardizer.mean[c];
    scale(0, static_cast<Eigen::Index>(c)) = tm.standardizer.scale[c];
  }
  ck.blobs.push_back(neural::to_blob("standardizer.mean", mean));
  ck.blobs.push_back(neural::to_blob("standardizer.scale", scale));
  ck.meta = {{"seed", tm.config.seed}, {"best_epoch", tm.best_epoch}, {"best_dev_macro_f1", tm.best_dev_f1},
             {"epochs_run", tm.log.size()}};
  return ck;
}

template <class S>
TrainedModel<S> from_checkpoint(const neural::Checkpoint& ck) {
  try {
    ArchitectureSpec spec = ArchitectureSpec::from_json(ck.hyper.at("architecture"));
    if (static_cast<std::uint32_t>(spec.kind) != ck.arch_id) throw ArchitectureMismatch("architecture id disagrees with spec");
    TrainConfig cfg = TrainConfig::from_json(ck.hyper.at("train"), TrainConfig{});
    ClassSet classes = ClassSet::from_names(ck.hyper.at("classes").get<std::vector<std::string>>());
    TrainedModel<S> tm{Classifier<S>(spec), Standardizer::identity(spec.feature_dim), cfg, classes,
                       ck.meta.value("best_epoch", std::size_t{0}), ck.meta.value("best_dev_macro_f1", 0.0), {}};
    neural::restore_params(ck, tm.model.params());
    const auto* mean = ck.find("standardizer.mean");
    const auto* scale = ck.find("standardizer.scale");
    if (!mean || !scale || mean->data.size() != spec.feature_dim || scale->data.size() != spec.feature_dim)
      throw ArchitectureMismatch("checkpoint standardizer missing or wrong width");
    tm.standardizer.mean = mean->data;
    tm.standardizer.scale = scale->data;
    return tm;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCheckpoint(e.what());
  }
}

inline std::filesystem::path arch_sidecar(const std::filesystem::path& ckpt) { return ckpt.string() + ".arch.json"; }

template <class S>
void save_model(const std::filesystem::path& path, TrainedModel<S>& tm) {
  neural::save_checkpoint(path, to_checkpoint(tm));
  std::ofstream(arch_sidecar(path), std::ios::binary) << tm.model.spec().to_json().dump(2) << '\n';
}

template <class S>
TrainedModel<S> load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingCheckpoint(path.string());
  return from_checkpoint<S>(neural::load_checkpoint(path));
}

inline nlohmann::json log_json(const std::vector<EpochLog>& log) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : log) j.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_macro_f1", e.dev_macro_f1}});
  return j;
}

/// post_id,label_true,score_0..score_{C-1},label_pred (label names; empty when unknown).
inline void write_predictions_csv(std::ostream& out, const std::vector<PredictionVector>& preds, const ClassSet& classes) {
  out << "post_id,label_true";
  for (std::size_t c = 0; c < classes.size(); ++c) out << ",score_" << c;
  out << ",label_pred\n" << std::setprecision(17);
  for (const auto& p : preds) {
    out << p.post_id << ',';
    if (p.label_true) out << label_name(classes.at(*p.label_true));
    for (double s : p.scores) out << ',' << s;
    out << ',' << label_name(classes.at(p.decided)) << '\n';
  }
}

}  // namespace psyling::models
