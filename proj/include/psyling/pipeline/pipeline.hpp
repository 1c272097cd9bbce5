#pragma once

// Command implementations behind the CLI. Each command checks for the
// artifacts of the commands it depends on; there is no other hidden state.
//
// Run directory layout (<output_dir>/<run_id>/):
//   config.json, provenance.json, run.log
//   features/features.fseq, features/stamp.json, features/catalog.tsv
//   models/<id>/fold<k>.ckpt (+ .arch.json, .log.json, .predictions.csv)
//   stack/matrix.csv, stack/matrix.json, stack/meta.ckpt, stack/predictions.csv
//   reports/<id>.fold<k>.json, reports/<id>.summary.json, reports/results.json, reports/confusion.json
//   ablation/<id>.importance.json, ablation/<id>.local.csv

#include <iostream>
#include <mutex>
#include <thread>

#include "psyling/ablate/ablate.hpp"
#include "psyling/corpus/folds.hpp"
#include "psyling/embedio/standin.hpp"
#include "psyling/featx/sequence.hpp"
#include "psyling/pipeline/config.hpp"

namespace psyling::pipeline {

inline constexpr std::string_view kVersion = "1.0.0";

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw MissingArtifact("cannot write " + path.string());
}

template <class J>
void write_json(const fs::path& path, const J& j) {
  write_text(path, j.dump(2) + "\n");
}

/// Lines go to the sink (stderr by default) and are appended to run.log.
class Logger {
 public:
  Logger(fs::path file, std::ostream* sink) : file_(std::move(file)), sink_(sink) {}

  void operator()(const std::string& line) {
    std::lock_guard lock(mu_);
    if (sink_) *sink_ << line << '\n';
    std::ofstream(file_, std::ios::app) << line << '\n';
  }

 private:
  fs::path file_;
  std::ostream* sink_;
  std::mutex mu_;
};

/// A run directory bound to its configuration. Constructing one records the
/// resolved config and provenance.
class Run {
 public:
  explicit Run(PipelineConfig cfg, std::ostream* log_sink = &std::cerr)
      : cfg_(std::move(cfg)), dir_(cfg_.run_dir()), log_(dir_ / "run.log", log_sink) {
    fs::create_directories(dir_);
    write_json(dir_ / "config.json", cfg_.to_json());
  }

  const PipelineConfig& config() const { return cfg_; }
  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& rel) const { return dir_ / rel; }
  void log(const std::string& line) { log_(line); }

  fs::path checkpoint(const std::string& model, int fold) const {
    return dir_ / "models" / model / ("fold" + std::to_string(fold) + ".ckpt");
  }

 private:
  PipelineConfig cfg_;
  fs::path dir_;
  Logger log_;
};

// ---- extract ---------------------------------------------------------------

struct ExtractResult {
  std::size_t posts = 0;
  std::size_t recomputed = 0;
};

inline ordered_json extraction_inputs(const PipelineConfig& cfg, const featx::ResourceBundle& res) {
  const auto& catalog = featx::FeatureCatalog::standard();
  ordered_json j;
  j["corpus_sha256"] = sha256_file(cfg.corpus);
  j["resources_fingerprint"] = res.fingerprint();
  j["catalog_version"] = featx::kCatalogVersion;
  j["catalog_sha256"] = sha256_hex(catalog.layout_text());
  return j;
}

/// Features for the whole corpus (exclusions apply later, at training time).
/// Skipped when the stamp says inputs and output are unchanged.
inline ExtractResult cmd_extract(Run& run) {
  const auto& cfg = run.config();
  const auto res = featx::load_resources(cfg.resources);
  const auto posts = ingest_corpus(cfg.corpus);
  const auto fseq = run.path("features/features.fseq");
  const auto stamp_path = run.path("features/stamp.json");
  ordered_json inputs = extraction_inputs(cfg, res);

  if (fs::exists(stamp_path) && fs::exists(fseq)) {
    json stamp = json::parse(read_file_bytes(stamp_path), nullptr, false);
    if (!stamp.is_discarded() && stamp.value("inputs", json()) == json(inputs) && stamp.value("fseq_sha256", "") == sha256_file(fseq)) {
      run.log("extract: 0 recomputed (" + std::to_string(posts.size()) + " posts up to date)");
      return {posts.size(), 0};
    }
  }
  std::vector<featx::FeatureSequence> seqs;
  seqs.reserve(posts.size());
  for (const auto& p : posts) seqs.push_back(featx::extract_document_sequence(p, res));
  fs::create_directories(fseq.parent_path());
  featx::write_fseq(fseq, seqs);
  write_text(run.path("features/catalog.tsv"), featx::FeatureCatalog::standard().layout_text());
  ordered_json stamp;
  stamp["inputs"] = inputs;
  stamp["posts"] = posts.size();
  stamp["fseq_sha256"] = sha256_file(fseq);
  write_json(stamp_path, stamp);

  ordered_json prov;
  prov["version"] = kVersion;
  prov["inputs"] = inputs;
  prov["resources"] = res.manifest();
  prov["fold_seed"] = cfg.fold_seed;
  prov["seed"] = cfg.seed;
  write_json(run.path("provenance.json"), prov);
  run.log("extract: " + std::to_string(seqs.size()) + " recomputed");
  return {posts.size(), seqs.size()};
}

// ---- shared data ---------------------------------------------------------------

/// Posts of the active classes with their features, folds and embeddings.
class Dataset {
 public:
  explicit Dataset(const Run& run) : cfg_(run.config()), classes_(cfg_.classes()) {
    const auto fseq = run.path("features/features.fseq");
    const auto stamp_path = run.path("features/stamp.json");
    if (!fs::exists(fseq) || !fs::exists(stamp_path)) throw MissingArtifact("features not extracted; run `psyling extract` first");
    json stamp = json::parse(read_file_bytes(stamp_path), nullptr, false);
    if (stamp.is_discarded() || stamp["inputs"].value("corpus_sha256", "") != sha256_file(cfg_.corpus) ||
        stamp.value("fseq_sha256", "") != sha256_file(fseq))
      throw MissingArtifact("features are stale for this corpus; rerun `psyling extract`");

    std::set<MhcLabel> excluded(cfg_.exclude.begin(), cfg_.exclude.end());
    posts_ = exclude_classes(ingest_corpus(cfg_.corpus), excluded);
    std::map<std::string, featx::FeatureSequence> by_id;
    for (auto& s : featx::read_fseq(fseq)) by_id.emplace(s.post_id, std::move(s));
    for (const auto& p : posts_) {
      auto it = by_id.find(p.post_id);
      if (it == by_id.end()) throw MissingArtifact("no features for post " + p.post_id);
      features_.push_back(std::move(it->second));
      labels_.push_back(*classes_.index_of(p.label));
      ids_.push_back(p.post_id);
    }
    folds_ = assign_folds(posts_, cfg_.n_folds, cfg_.fold_seed);
  }

  const ClassSet& classes() const { return classes_; }
  const std::vector<AnnotatedPost>& posts() const { return posts_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  const FoldAssignment& folds() const { return folds_; }
  std::size_t size() const { return posts_.size(); }

  /// Loads (once) and aligns the embedding file named by `source`.
  const std::vector<const embedio::EmbeddingSequence*>& embeddings(const std::string& source) {
    auto it = aligned_.find(source);
    if (it != aligned_.end()) return it->second;
    auto path = cfg_.embeddings.find(source);
    if (path == cfg_.embeddings.end()) throw ConfigError("no embedding file for source '" + source + "'");
    if (!fs::exists(path->second)) throw MissingEmbedding("embedding file " + path->second.string());
    auto& store = stores_.emplace(source, fs::exists(embedio::manifest_path(path->second))
                                              ? embedio::load_verified(path->second)
                                              : embedio::read_embeddings(path->second)).first->second;
    return aligned_.emplace(source, embedio::align_to_corpus(store, posts_)).first->second;
  }

  std::size_t embed_dim(const std::string& source) {
    embeddings(source);
    return stores_.at(source).embed_dim();
  }

  models::ArchitectureSpec spec(const ModelEntry& m) {
    return m.spec(classes_.size(), m.embedding.empty() ? 0 : embed_dim(m.embedding));
  }

  std::vector<models::Example> examples(const ModelEntry& m, const std::vector<std::size_t>& rows) {
    const std::vector<const embedio::EmbeddingSequence*>* emb = m.embedding.empty() ? nullptr : &embeddings(m.embedding);
    std::vector<models::Example> out;
    for (std::size_t r : rows) out.push_back({ids_[r], &features_[r], emb ? (*emb)[r] : nullptr, labels_[r]});
    return out;
  }

  std::vector<std::size_t> rows_in_folds(const std::function<bool(int)>& keep) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < size(); ++r)
      if (keep(folds_.fold[r])) rows.push_back(r);
    return rows;
  }

 private:
  PipelineConfig cfg_;
  ClassSet classes_;
  std::vector<AnnotatedPost> posts_;
  std::vector<featx::FeatureSequence> features_;
  std::vector<std::size_t> labels_;
  std::vector<std::string> ids_;
  FoldAssignment folds_;
  std::map<std::string, embedio::EmbeddingStore> stores_;
  std::map<std::string, std::vector<const embedio::EmbeddingSequence*>> aligned_;
};

/// Training seed of one (model, fold) job; independent of scheduling.
inline std::uint64_t job_seed(const PipelineConfig& cfg, const std::string& model, int fold) {
  return mix_seed(mix_seed(cfg.seed, embedio::fnv1a64(model)), static_cast<std::uint64_t>(fold));
}

/// Runs f(0..n-1) on up to `jobs` threads; the first exception is rethrown.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(jobs, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  pool.clear();
  if (err) std::rethrow_exception(err);
}

inline std::string predictions_csv(const std::vector<models::PredictionVector>& preds, const ClassSet& classes) {
  std::ostringstream out;
  models::write_predictions_csv(out, preds, classes);
  return out.str();
}

inline eval::FoldReport report_of(const std::string& model, int fold, const ClassSet& classes,
                                  const std::vector<models::PredictionVector>& preds) {
  std::vector<std::size_t> truth, pred;
  for (const auto& p : preds) {
    truth.push_back(*p.label_true);
    pred.push_back(p.decided);
  }
  return eval::make_fold_report(model, fold, classes, truth, pred);
}

inline void write_summary(Run& run, const std::string& model, const std::vector<eval::FoldReport>& reports) {
  for (const auto& r : reports)
    write_json(run.path("reports/" + model + ".fold" + std::to_string(r.fold) + ".json"), eval::fold_report_json(r));
  const auto s = eval::aggregate_folds(reports);
  write_json(run.path("reports/" + model + ".summary.json"), eval::summary_json(s));
  std::ostringstream msg;
  msg << std::fixed << std::setprecision(2) << "train " << model << ": macro F1 " << 100.0 * s.macro_f1 << " over "
      << reports.size() << " folds";
  run.log(msg.str());
}

// ---- train <model> ---------------------------------------------------------------

/// Fold k is the test fold, fold (k+1) mod n selects the checkpoint, the rest train.
template <class S>
eval::Summary cmd_train_model(Run& run, Dataset& data, const std::string& model_id) {
  const auto& cfg = run.config();
  const ModelEntry& entry = cfg.model(model_id);
  const auto spec = data.spec(entry);
  const int n = cfg.n_folds;
  std::vector<eval::FoldReport> reports(static_cast<std::size_t>(n));
  if (!entry.embedding.empty()) data.embeddings(entry.embedding);  // load before threads start

  parallel_for(static_cast<std::size_t>(n), cfg.jobs, [&](std::size_t kk) {
    const int k = static_cast<int>(kk), dev = (k + 1) % n;
    auto tcfg = entry.train;
    tcfg.seed = job_seed(cfg, model_id, k);
    const auto train = data.examples(entry, data.rows_in_folds([&](int f) { return f != k && f != dev; }));
    const auto devs = data.examples(entry, data.rows_in_folds([&](int f) { return f == dev; }));
    const auto test = data.examples(entry, data.rows_in_folds([&](int f) { return f == k; }));
    auto tm = models::train_model<S>(spec, data.classes(), tcfg, train, devs);
    const auto ckpt = run.checkpoint(model_id, k);
    fs::create_directories(ckpt.parent_path());
    models::save_model(ckpt, tm);
    write_json(fs::path(ckpt).replace_extension(".log.json"), models::log_json(tm.log));
    const auto preds = models::predict_proba(tm, test);
    write_text(fs::path(ckpt).replace_extension(".predictions.csv"), predictions_csv(preds, data.classes()));
    reports[kk] = report_of(model_id, k, data.classes(), preds);
    run.log("train " + model_id + " fold " + std::to_string(k) + ": best epoch " + std::to_string(tm.best_epoch) +
            ", dev macro F1 " + std::to_string(tm.best_dev_f1));
  });
  write_summary(run, model_id, reports);
  return eval::aggregate_folds(reports);
}

template <class S>
models::TrainedModel<S> load_fold(const Run& run, const std::string& model, int fold) {
  const auto p = run.checkpoint(model, fold);
  if (!fs::exists(p)) throw MissingCheckpoint("model " + model + " fold " + std::to_string(fold) + " (" + p.string() + "); train it first");
  return models::load_model<S>(p);
}

/// Every (component, fold) checkpoint must exist before any stacking work.
inline void require_stage1(const Run& run) {
  for (const auto& m : run.config().stack_components)
    for (int k = 0; k < run.config().n_folds; ++k)
      if (!fs::exists(run.checkpoint(m, k)))
        throw MissingCheckpoint("model " + m + " fold " + std::to_string(k) + " (" + run.checkpoint(m, k).string() +
                                "); run `psyling train " + m + "` first");
}

// ---- train stack ---------------------------------------------------------------

template <class S>
eval::Summary cmd_train_stack(Run& run, Dataset& data) {
  const auto& cfg = run.config();
  require_stage1(run);
  const auto& comps = cfg.stack_components;
  const std::size_t C = data.classes().size();

  auto held_out = [&](std::size_t m, int k) {
    const auto& entry = cfg.model(comps[m]);
    auto tm = load_fold<S>(run, comps[m], k);
    if (!(tm.classes == data.classes())) throw InconsistentClassSets("checkpoint of " + comps[m] + " has other classes");
    return models::predict_proba(tm, data.examples(entry, data.rows_in_folds([&](int f) { return f == k; })));
  };
  const auto sm = stacking::stage1_oof(comps, C, data.ids(), data.labels(), data.folds(), held_out);
  std::ostringstream csv;
  stacking::write_matrix_csv(csv, sm, data.classes());
  write_text(run.path("stack/matrix.csv"), csv.str());
  write_json(run.path("stack/matrix.json"), stacking::provenance_json(sm, data.classes()));

  const auto nested = stacking::nested_evaluation(sm, data.folds(), data.classes(), cfg.meta);
  write_text(run.path("stack/predictions.csv"), predictions_csv(nested.predictions, data.classes()));
  const auto meta = stacking::fit_meta(sm.values, sm.labels, C, cfg.meta);
  neural::save_checkpoint(run.path("stack/meta.ckpt"), stacking::meta_checkpoint(meta, comps, data.classes(), cfg.meta));
  write_summary(run, "stacking", nested.reports);
  return eval::aggregate_folds(nested.reports);
}

/// Ensemble inference on the run's posts: each component's five fold
/// instances are averaged, then the full-data meta model decides.
template <class S>
std::vector<models::PredictionVector> ensemble_predict(const Run& run, Dataset& data, const std::vector<std::size_t>& rows) {
  const auto& cfg = run.config();
  require_stage1(run);
  const auto meta_path = run.path("stack/meta.ckpt");
  if (!fs::exists(meta_path)) throw MissingCheckpoint("stacking meta model; run `psyling train stack` first");
  const auto meta = stacking::meta_from_checkpoint(neural::load_checkpoint(meta_path));
  std::vector<std::vector<std::vector<models::PredictionVector>>> per_model;
  for (const auto& id : cfg.stack_components) {
    const auto xs = data.examples(cfg.model(id), rows);
    auto& inst = per_model.emplace_back();
    for (int k = 0; k < cfg.n_folds; ++k) inst.push_back(models::predict_proba(load_fold<S>(run, id, k), xs));
  }
  return stacking::stack_predict(meta, per_model);
}

// ---- ablate ---------------------------------------------------------------

/// Each post is explained by the fold instance it was held out from.
template <class S>
ordered_json cmd_ablate(Run& run, Dataset& data, const std::string& model_id) {
  const auto& cfg = run.config();
  const ModelEntry& entry = cfg.model(model_id);
  if (!entry.uses_features()) throw ConfigError("ablation needs a model that reads the engineered features");
  std::vector<models::TrainedModel<S>> inst;
  for (int k = 0; k < cfg.n_folds; ++k) inst.push_back(load_fold<S>(run, model_id, k));
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto xs = data.examples(entry, all);
  const auto W = ablate::importance_matrices(data.size(), data.classes().size(), [&](std::size_t i) {
    return ablate::model_scorer(inst[static_cast<std::size_t>(data.folds().fold[i])], xs[i]);
  });
  auto report = ablate::importance_report(model_id, data.classes(), W);
  write_json(run.path("ablation/" + model_id + ".importance.json"), report);

  std::ostringstream csv;
  csv << "post_id,class";
  for (std::size_t g = 0; g < ablate::kGroups; ++g) csv << ',' << featx::group_name(featx::group_at(g));
  csv << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t c = 0; c < data.classes().size(); ++c) {
      csv << data.ids()[i] << ',' << label_name(data.classes().at(c));
      for (std::size_t g = 0; g < ablate::kGroups; ++g) csv << ',' << W[c](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g));
      csv << '\n';
    }
  write_text(run.path("ablation/" + model_id + ".local.csv"), csv.str());
  run.log("ablate " + model_id + ": " + std::to_string(data.size()) + " posts x " + std::to_string(ablate::kNumMasks) + " masks");
  return report;
}

// ---- report ---------------------------------------------------------------

/// Collects every summary present into one results table (per-class F1 rows);
/// the confusion report is the stacking one when present, else the best macro F1.
inline ordered_json cmd_report(Run& run, std::ostream& out) {
  const auto& cfg = run.config();
  std::vector<std::string> ids;
  for (const auto& m : cfg.models) ids.push_back(m.id);
  ids.push_back("stacking");
  ordered_json rows = ordered_json::array();
  ordered_json stack_cm, best_cm;
  double best_f1 = -1;
  for (const auto& id : ids) {
    const auto p = run.path("reports/" + id + ".summary.json");
    if (!fs::exists(p)) continue;
    auto s = ordered_json::parse(read_file_bytes(p));
    rows.push_back(s["results"]);
    const double f1 = s["results"]["Average"].get<double>();
    if (id == "stacking") {
      stack_cm = s["confusion"];
    } else if (f1 > best_f1) {
      best_f1 = f1;
      best_cm = s["confusion"];
    }
  }
  if (rows.empty()) throw MissingArtifact("no model summaries in " + run.dir().string() + "; run `psyling train` first");
  ordered_json table;
  table["classes"] = cfg.classes().names();
  table["rows"] = rows;
  write_json(run.path("reports/results.json"), table);
  write_json(run.path("reports/confusion.json"), stack_cm.is_null() ? best_cm : stack_cm);

  out << std::left << std::setw(12) << "model";
  for (const auto& [k, v] : rows.front().items())
    if (k != "model") out << std::right << std::setw(12) << k;
  out << '\n' << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r["model"].get<std::string>();
    for (const auto& [k, v] : r.items())
      if (k != "model") out << std::right << std::setw(12) << v.get<double>();
    out << '\n';
  }
  return table;
}

}  // namespace psyling::pipeline
