#pragma once

// Config for a synthetic workspace: desk-scale widths and epoch counts, paths
// relative to the workspace so the directory can be moved as a whole.

#include "psyling/pipeline/config.hpp"
#include "psyling/synth/synth.hpp"

namespace psyling::pipeline {

inline ordered_json scaled_models_json() {
  auto train = [](std::size_t epochs, double lr) {
    return ordered_json{{"epochs", epochs}, {"batch_size", 8}, {"seq_len", 10}, {"lr", lr}, {"weight_decay", 1e-4}, {"clip_norm", 5.0}};
  };
  ordered_json m;
  m["bert"] = {{"kind", "baseline"}, {"embedding", "bert"}, {"hidden", 8}, {"train", train(25, 1e-2)}};
  m["roberta"] = {{"kind", "baseline"}, {"embedding", "roberta"}, {"hidden", 8}, {"train", train(25, 1e-2)}};
  m["psyling"] = {{"kind", "psyling"}, {"hidden", 16}, {"layers", 2}, {"ffn", 16}, {"dropout", 0.1}, {"train", train(30, 5e-3)}};
  m["hybrid"] = {{"kind", "hybrid"}, {"embedding", "roberta"}, {"emb_hidden", 8}, {"feat_hidden", 16},
                 {"fc", 16},         {"dropout", 0.1},         {"train", train(25, 5e-3)}};
  return m;
}

inline ordered_json synth_config_json(const synth::SynthWorkspace& ws, const fs::path& base, const std::string& run_id,
                                      const std::vector<MhcLabel>& exclude = {}) {
  auto rel = [&](const fs::path& p) { return fs::relative(p, base).generic_string(); };
  ordered_json j;
  j["run_id"] = run_id;
  j["output_dir"] = "runs";
  j["corpus"] = rel(ws.corpus);
  j["resources"] = rel(ws.resources);
  j["embeddings"] = {{"bert", rel(ws.embeddings.at("bert-base-uncased"))}, {"roberta", rel(ws.embeddings.at("roberta-base"))}};
  ordered_json ex = ordered_json::array();
  for (MhcLabel l : exclude) ex.push_back(std::string(label_name(l)));
  j["exclude_classes"] = ex;
  j["folds"] = {{"n", 5}, {"seed", 42}};
  j["seed"] = 1;
  j["precision"] = "float32";
  j["jobs"] = 1;
  j["models"] = scaled_models_json();
  j["stack"] = {{"components", {"bert", "roberta", "psyling", "hybrid"}}, {"lambda", 1e-4}, {"tol", 1e-8}, {"max_iter", 5000}};
  j["ablate"] = {{"model", "psyling"}};
  return j;
}

}  // namespace psyling::pipeline
