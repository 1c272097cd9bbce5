#include <gtest/gtest.h>

#include <cstdlib>

#include "fixtures.hpp"
#include "psyling/pipeline/pipeline.hpp"
#include "psyling/pipeline/workspace.hpp"

namespace psyling::pipeline {
namespace {

using psyling::testing::TempDir;

/// A synthetic workspace with its config on disk; epochs cut for test speed.
struct Workspace {
  TempDir tmp;
  synth::SynthWorkspace ws;
  fs::path config;

  explicit Workspace(std::size_t per_class = 5, std::vector<MhcLabel> exclude = {}) {
    synth::SynthOptions opt;
    opt.per_class = per_class;
    opt.max_sentences = 4;
    ws = synth::write_synth_workspace(tmp.path(), opt, 6);
    config = tmp / "config.json";
    auto j = synth_config_json(ws, tmp.path(), "t", exclude);
    for (auto& [id, m] : j["models"].items()) m["train"]["epochs"] = 4;
    write_json(config, j);
  }

  PipelineConfig load(std::vector<std::string> overrides = {}) const { return load_config(config, overrides); }
};

TEST(Config, DefaultsAndResolution) {
  auto c = parse_config(json{{"corpus", "c.jsonl"}, {"resources", "res"}, {"embeddings", {{"bert", "b"}, {"roberta", "r"}}}}, "/base");
  EXPECT_EQ(c.corpus, fs::path("/base/c.jsonl"));
  EXPECT_EQ(c.embeddings.at("roberta"), fs::path("/base/r"));
  EXPECT_EQ(c.n_folds, 5);
  ASSERT_EQ(c.models.size(), 4u);
  EXPECT_EQ(c.models[0].id, "bert");
  EXPECT_EQ(c.model("psyling").hidden, 1024u);
  EXPECT_EQ(c.model("psyling").train.epochs, 500u);
  EXPECT_EQ(c.model("psyling").train.batch_size, 256u);
  EXPECT_EQ(c.model("hybrid").train.epochs, 12u);
  EXPECT_DOUBLE_EQ(c.model("hybrid").train.optimizer.lr, 2e-5);
  EXPECT_EQ(c.model("hybrid").embedding, "roberta");
  EXPECT_EQ(c.stack_components, (std::vector<std::string>{"bert", "roberta", "psyling", "hybrid"}));
  EXPECT_EQ(c.classes().size(), 7u);
  EXPECT_EQ(parse_config(c.to_json(), "").to_json(), c.to_json());
}

TEST(Config, Rejections) {
  const json base{{"corpus", "c"}, {"resources", "r"}, {"embeddings", {{"bert", "b"}, {"roberta", "r"}}}};
  auto fails = [&](const std::string& override_) {
    json j = base;
    apply_override(j, override_);
    EXPECT_THROW(parse_config(j), ConfigError) << override_;
  };
  fails("colour=1");
  fails("models.psyling.kind=\"transformer\"");
  fails("models.x.kind=\"baseline\"");
  fails("models.bert.embedding=\"elmo\"");
  fails("models.psyling.train.learning_rate=1");
  fails("precision=\"float16\"");
  fails("folds.n=2");
  fails("exclude_classes=[\"Schizophrenia\"]");
  fails("exclude_classes=[\"ADHD\",\"Anxiety\",\"Bipolar\",\"Depression\",\"PTSD\",\"Stress\"]");
  fails("stack.components=[\"bert\",\"gpt\"]");
  fails("run_id=\"../escape\"");
  json j = base;
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
}

TEST(Config, OverridesSetNestedKeys) {
  json j{{"a", {{"b", 1}}}};
  apply_override(j, "a.b=5");
  apply_override(j, "a.c.d=true");
  apply_override(j, "name=plain text");
  EXPECT_EQ(j["a"]["b"], 5);
  EXPECT_EQ(j["a"]["c"]["d"], true);
  EXPECT_EQ(j["name"], "plain text");
}

TEST(Synth, CorpusIsValidAndRoundTrips) {
  TempDir tmp;
  synth::SynthOptions opt;
  opt.per_class = 3;
  auto ws = synth::write_synth_workspace(tmp.path(), opt, 4);
  auto posts = ingest_corpus(ws.corpus);
  EXPECT_EQ(posts, synth::synth_corpus(opt));
  EXPECT_EQ(posts.size(), 21u);
  EXPECT_EQ(distinct_users(posts), 21u);
  EXPECT_NO_THROW(featx::load_resources(ws.resources));
  EXPECT_EQ(embedio::load_verified(ws.embeddings.at("roberta-base")).size(), 21u);
}

TEST(Extract, ShapesIdempotenceAndHashCheck) {
  Workspace w(1, {});
  auto cfg = w.load();
  {
    // 3-post fixture: keep three posts of the synthetic corpus.
    auto posts = ingest_corpus(cfg.corpus);
    posts.resize(3);
    emit_corpus(cfg.corpus, posts);
  }
  std::ostringstream log;
  pipeline::Run run(cfg, &log);
  EXPECT_EQ(cmd_extract(run).recomputed, 3u);
  auto seqs = featx::read_fseq(run.path("features/features.fseq"));
  auto posts = ingest_corpus(cfg.corpus);
  ASSERT_EQ(seqs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(seqs[i].n_rows, posts[i].sentences.size());
    EXPECT_EQ(seqs[i].n_cols, 436u);
  }
  EXPECT_EQ(cmd_extract(run).recomputed, 0u);
  EXPECT_NE(log.str().find("0 recomputed"), std::string::npos);

  fs::path victim;
  for (const auto& f : fs::directory_iterator(cfg.resources))
    if (f.path().extension() == ".tsv" && (victim.empty() || f.path() < victim)) victim = f.path();
  std::ofstream(victim, std::ios::app) << "tampered\n";
  EXPECT_THROW(cmd_extract(run), HashMismatch);
}

TEST(Train, OrderingGuards) {
  Workspace w;
  std::ostringstream log;
  pipeline::Run run(w.load(), &log);
  EXPECT_THROW((void)Dataset{run}, MissingArtifact);
  cmd_extract(run);
  Dataset data(run);
  EXPECT_THROW(cmd_train_stack<double>(run, data), MissingCheckpoint);
  EXPECT_THROW(cmd_ablate<double>(run, data, "psyling"), MissingCheckpoint);
  EXPECT_THROW(cmd_report(run, log), MissingArtifact);
}

TEST(Train, ExcludingPtsdGivesSixClassReports) {
  Workspace w(5, {MhcLabel::PTSD});
  std::ostringstream log;
  pipeline::Run run(w.load(), &log);
  cmd_extract(run);
  Dataset data(run);
  EXPECT_EQ(data.size(), 30u);
  for (const auto& m : run.config().models) EXPECT_EQ(cmd_train_model<double>(run, data, m.id).classes.size(), 6u);
  auto s = cmd_train_stack<double>(run, data);
  EXPECT_EQ(s.classes.size(), 6u);
  auto prov = json::parse(read_file_bytes(run.path("stack/matrix.json")));
  EXPECT_EQ(prov["cols"], 24);
  auto table = cmd_report(run, log);
  EXPECT_EQ(table["classes"].size(), 6u);
  EXPECT_EQ(table["rows"].size(), 5u);
  for (const auto& f : fs::directory_iterator(run.path("reports")))
    EXPECT_EQ(read_file_bytes(f.path()).find("PTSD"), std::string::npos) << f.path();
}

TEST(Train, EnsemblePredictAndAblationArtifacts) {
  Workspace w;
  std::ostringstream log;
  pipeline::Run run(w.load({"models.psyling.train.epochs=15"}), &log);
  cmd_extract(run);
  Dataset data(run);
  for (const auto& m : run.config().models) cmd_train_model<double>(run, data, m.id);
  cmd_train_stack<double>(run, data);
  std::vector<std::size_t> rows{4, 0, 9};
  auto preds = ensemble_predict<double>(run, data, rows);
  ASSERT_EQ(preds.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(preds[i].post_id, data.ids()[rows[i]]);
    double sum = 0;
    for (double s : preds[i].scores) sum += s;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  auto rep = cmd_ablate<double>(run, data, "psyling");
  EXPECT_EQ(rep["samples"], 35);
  EXPECT_EQ(rep["per_class"].size(), 7u);
  EXPECT_TRUE(fs::exists(run.path("ablation/psyling.local.csv")));
  EXPECT_THROW(cmd_ablate<double>(run, data, "bert"), ConfigError);
}

TEST(Train, JobSeedsAreDistinct) {
  PipelineConfig c;
  std::set<std::uint64_t> seeds;
  for (const char* m : {"bert", "roberta", "psyling", "hybrid"})
    for (int k = 0; k < 5; ++k) seeds.insert(job_seed(c, m, k));
  EXPECT_EQ(seeds.size(), 20u);
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(PSYLING_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, ExitCodes) {
  Workspace w;
  const std::string cfg = "-c " + w.config.string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("extract " + cfg + " --set colour=1"), 2);
  EXPECT_EQ(run_cli("train psyling " + cfg), 3);  // features not extracted yet
  EXPECT_EQ(run_cli("extract " + cfg), 0);
  EXPECT_EQ(run_cli("train stack " + cfg), 3);
  EXPECT_EQ(run_cli("train psyling " + cfg + " --set models.psyling.train.lr=1e30"), 4);
  for (const auto& f : fs::directory_iterator(w.ws.resources))
    if (f.path().extension() == ".tsv") std::ofstream(f.path(), std::ios::app) << "extra\n";
  EXPECT_EQ(run_cli("extract " + cfg), 3);
}

}  // namespace
}  // namespace psyling::pipeline
