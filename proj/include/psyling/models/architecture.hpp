#pragma once

// Declarative description of the component classifiers. Every classifier is a
// set of branches whose outputs are concatenated and fed to a final linear
// layer with sigmoid outputs; a branch is an input (feature sequence or token
// embeddings), a BiLSTM stack, then dense layers.
//
//   baseline  embeddings → BiLSTM(1 × 256) → FC(C)
//   psyling   features   → BiLSTM(4 × 1024) → FC+ReLU(512) → FC+ReLU(512)
//                        → FC+ReLU(512)+dropout 0.2 → FC(C)
//   hybrid    embeddings → BiLSTM(2 × 256, dropout 0.2) → FC+ReLU(128) ┐
//             features   → BiLSTM(3 × 512, dropout 0.2) → FC+ReLU(128) ┴→ FC(C)

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "psyling/error.hpp"
#include "psyling/featx/catalog.hpp"

namespace psyling::models {

enum class ModelKind : std::uint32_t { Baseline = 1, Psyling = 2, Hybrid = 3 };
enum class InputKind { Features, Embeddings };

inline std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Baseline: return "baseline";
    case ModelKind::Psyling: return "psyling";
    case ModelKind::Hybrid: return "hybrid";
  }
  return "?";
}

struct DenseSpec {
  std::size_t width = 0;
  bool relu = true;
  double dropout = 0.0;
  bool operator==(const DenseSpec&) const = default;
};

struct BranchSpec {
  InputKind input = InputKind::Features;
  std::size_t lstm_layers = 1;
  std::size_t hidden = 0;
  double lstm_dropout = 0.0;
  std::vector<DenseSpec> dense;
  bool operator==(const BranchSpec&) const = default;
};

struct ArchitectureSpec {
  ModelKind kind = ModelKind::Psyling;
  std::string embedding_source;  // "bert" / "roberta" for embedding-consuming models
  std::size_t n_classes = 7;
  std::size_t feature_dim = featx::kNumFeatures;
  std::size_t embed_dim = 0;
  std::vector<BranchSpec> branches;

  bool uses(InputKind k) const {
    for (const auto& b : branches)
      if (b.input == k) return true;
    return false;
  }
  bool operator==(const ArchitectureSpec&) const = default;

  static ArchitectureSpec baseline(std::string source, std::size_t embed_dim, std::size_t n_classes,
                                   std::size_t hidden = 256) {
    return {ModelKind::Baseline, std::move(source), n_classes, featx::kNumFeatures, embed_dim,
            {BranchSpec{InputKind::Embeddings, 1, hidden, 0.0, {}}}};
  }

  static ArchitectureSpec psyling(std::size_t n_classes, std::size_t hidden = 1024, std::size_t layers = 4,
                                  std::size_t ffn = 512, double dropout = 0.2) {
    return {ModelKind::Psyling, "", n_classes, featx::kNumFeatures, 0,
            {BranchSpec{InputKind::Features, layers, hidden, 0.0,
                        {{ffn, true, 0.0}, {ffn, true, 0.0}, {ffn, true, dropout}}}}};
  }

  static ArchitectureSpec hybrid(std::string source, std::size_t embed_dim, std::size_t n_classes,
                                 std::size_t emb_hidden = 256, std::size_t feat_hidden = 512,
                                 std::size_t fc = 128, double dropout = 0.2) {
    return {ModelKind::Hybrid, std::move(source), n_classes, featx::kNumFeatures, embed_dim,
            {BranchSpec{InputKind::Embeddings, 2, emb_hidden, dropout, {{fc, true, 0.0}}},
             BranchSpec{InputKind::Features, 3, feat_hidden, dropout, {{fc, true, 0.0}}}}};
  }

  nlohmann::json to_json() const {
    nlohmann::json br = nlohmann::json::array();
    for (const auto& b : branches) {
      nlohmann::json dense = nlohmann::json::array();
      for (const auto& d : b.dense) dense.push_back({{"width", d.width}, {"relu", d.relu}, {"dropout", d.dropout}});
      br.push_back({{"input", b.input == InputKind::Features ? "features" : "embeddings"},
                    {"lstm_layers", b.lstm_layers},
                    {"hidden", b.hidden},
                    {"lstm_dropout", b.lstm_dropout},
                    {"dense", dense}});
    }
    return {{"kind", std::string(kind_name(kind))}, {"embedding_source", embedding_source},
            {"n_classes", n_classes}, {"feature_dim", feature_dim}, {"embed_dim", embed_dim},
            {"branches", br}};
  }

  static ArchitectureSpec from_json(const nlohmann::json& j) {
    try {
      ArchitectureSpec s;
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "baseline") s.kind = ModelKind::Baseline;
      else if (kind == "psyling") s.kind = ModelKind::Psyling;
      else if (kind == "hybrid") s.kind = ModelKind::Hybrid;
      else throw ArchitectureMismatch("unknown architecture kind " + kind);
      s.embedding_source = j.at("embedding_source").get<std::string>();
      s.n_classes = j.at("n_classes").get<std::size_t>();
      s.feature_dim = j.at("feature_dim").get<std::size_t>();
      s.embed_dim = j.at("embed_dim").get<std::size_t>();
      for (const auto& b : j.at("branches")) {
        BranchSpec bs;
        bs.input = b.at("input").get<std::string>() == "features" ? InputKind::Features : InputKind::Embeddings;
        bs.lstm_layers = b.at("lstm_layers").get<std::size_t>();
        bs.hidden = b.at("hidden").get<std::size_t>();
        bs.lstm_dropout = b.at("lstm_dropout").get<double>();
        for (const auto& d : b.at("dense"))
          bs.dense.push_back({d.at("width").get<std::size_t>(), d.at("relu").get<bool>(), d.at("dropout").get<double>()});
        s.branches.push_back(std::move(bs));
      }
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw ArchitectureMismatch(std::string("architecture spec: ") + e.what());
    }
  }
};

}  // namespace psyling::models
