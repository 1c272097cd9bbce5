// psyling: extract features, train components and the ensemble, ablate, report.
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 training error.

#include <CLI11.hpp>
#include <iostream>

#include "psyling/pipeline/pipeline.hpp"
#include "psyling/pipeline/workspace.hpp"

namespace pl = psyling::pipeline;

namespace {

constexpr int kExitConfig = 2, kExitData = 3, kExitTraining = 4;

int exit_code(psyling::ErrorCategory c) {
  switch (c) {
    case psyling::ErrorCategory::Config: return kExitConfig;
    case psyling::ErrorCategory::Data: return kExitData;
    case psyling::ErrorCategory::Training: return kExitTraining;
  }
  return 1;
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string run_id;
  std::size_t jobs = 0;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "Override a config key, e.g. --set models.psyling.train.epochs=5");
    app->add_option("--run-id", run_id, "Override run_id");
    app->add_option("-j,--jobs", jobs, "Override jobs (concurrent fold trainings)");
  }

  pl::PipelineConfig load() const {
    auto o = overrides;
    if (!run_id.empty()) o.push_back("run_id=\"" + run_id + "\"");
    if (jobs) o.push_back("jobs=" + std::to_string(jobs));
    return pl::load_config(config, o);
  }
};

template <class S>
void train(pl::Run& run, const std::string& target) {
  pl::Dataset data(run);
  if (target == "stack") {
    pl::cmd_train_stack<S>(run, data);
  } else if (target == "all") {
    for (const auto& m : run.config().models) pl::cmd_train_model<S>(run, data, m.id);
    pl::cmd_train_stack<S>(run, data);
  } else {
    pl::cmd_train_model<S>(run, data, target);
  }
}

template <class S>
void ablate(pl::Run& run, const std::string& model) {
  pl::Dataset data(run);
  pl::cmd_ablate<S>(run, data, model.empty() ? run.config().ablate_model : model);
}

template <class S>
void predict(pl::Run& run) {
  pl::Dataset data(run);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  auto preds = pl::ensemble_predict<S>(run, data, rows);
  pl::write_text(run.path("stack/ensemble_predictions.csv"), pl::predictions_csv(preds, data.classes()));
  run.log("predict: " + std::to_string(preds.size()) + " posts scored by the averaged ensemble");
}

template <template <class> class F, class... A>
void dispatch(pl::Run& run, A&&... args) {
  if (run.config().precision == pl::Precision::Float64) F<double>::run(run, std::forward<A>(args)...);
  else F<float>::run(run, std::forward<A>(args)...);
}

template <class S> struct Train { static void run(pl::Run& r, const std::string& t) { train<S>(r, t); } };
template <class S> struct Ablate { static void run(pl::Run& r, const std::string& m) { ablate<S>(r, m); } };
template <class S> struct Predict { static void run(pl::Run& r) { predict<S>(r); } };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Psycholinguistic mental-health-condition classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pl::kVersion));

  Common common;
  auto* extract = app.add_subcommand("extract", "Compute per-sentence feature sequences for the corpus");
  common.attach(extract);

  std::string target;
  auto* train_cmd = app.add_subcommand("train", "Train a component model over all folds, all of them, or the stacking ensemble");
  common.attach(train_cmd);
  train_cmd->add_option("target", target, "Model id from the config, 'all', or 'stack'")->required();

  std::string ablate_model;
  auto* ablate_cmd = app.add_subcommand("ablate", "Feature-group importance for a trained feature model");
  common.attach(ablate_cmd);
  ablate_cmd->add_option("model", ablate_model, "Model id (default: ablate.model from the config)");

  auto* report = app.add_subcommand("report", "Collect model summaries into the results tables");
  common.attach(report);

  auto* predict_cmd = app.add_subcommand("predict", "Score the run's posts with the averaged stacking ensemble");
  common.attach(predict_cmd);

  std::string synth_out, synth_run = "synth";
  psyling::synth::SynthOptions sopt;
  std::size_t embed_dim = 16;
  std::vector<std::string> synth_exclude;
  auto* synth = app.add_subcommand("synth", "Write a synthetic workspace (corpus, resources, embeddings, config)");
  synth->add_option("-o,--out", synth_out, "Workspace directory")->required();
  synth->add_option("--per-class", sopt.per_class, "Posts per class")->capture_default_str();
  synth->add_option("--seed", sopt.seed, "Generator seed")->capture_default_str();
  synth->add_option("--embed-dim", embed_dim, "Stand-in embedding width")->capture_default_str();
  synth->add_option("--exclude", synth_exclude, "Classes to exclude in the generated config");
  synth->add_option("--run-id", synth_run, "run_id written into the config")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      std::vector<psyling::MhcLabel> ex;
      for (const auto& n : synth_exclude) ex.push_back(psyling::parse_label(n));
      const pl::fs::path dir(synth_out);
      auto ws = psyling::synth::write_synth_workspace(dir, sopt, embed_dim);
      pl::write_json(dir / "config.json", pl::synth_config_json(ws, dir, synth_run, ex));
      std::cerr << "synth: wrote " << sopt.per_class * sopt.classes.size() << " posts and " << (dir / "config.json").string()
                << '\n';
      return 0;
    }
    pl::Run run(common.load());
    if (extract->parsed()) pl::cmd_extract(run);
    else if (train_cmd->parsed()) dispatch<Train>(run, target);
    else if (ablate_cmd->parsed()) dispatch<Ablate>(run, ablate_model);
    else if (report->parsed()) pl::cmd_report(run, std::cout);
    else if (predict_cmd->parsed()) dispatch<Predict>(run);
    return 0;
  } catch (const psyling::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
