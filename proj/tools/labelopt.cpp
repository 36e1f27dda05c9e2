// Copyright 2026 The Labelopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the labelopt library.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "labelopt/csv.hpp"
#include "labelopt/error.hpp"
#include "labelopt/evalharness.hpp"
#include "labelopt/io.hpp"
#include "labelopt/milp.hpp"
#include "labelopt/pipeline.hpp"
#include "labelopt/predictors.hpp"
#include "labelopt/service.hpp"
#include "labelopt/splitter.hpp"

namespace fs = std::filesystem;
using namespace labelopt;

namespace {

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    csv::WriteText(path, text);
  }
}

struct MilpFlags {
  double alpha = 1.0;
  double big_m = 1e6;
  double epsilon = 1e-6;
  double omega_lower = 0.0;
  std::optional<double> omega_upper;
  std::optional<int64_t> node_limit;
  std::optional<double> time_limit;

  void Add(CLI::App* app) {
    app->add_option("--alpha", alpha, "Accuracy target in (0,1]")->capture_default_str();
    app->add_option("--big-m", big_m, "Big-M constant")->capture_default_str();
    app->add_option("--epsilon", epsilon, "Strictness margin")->capture_default_str();
    app->add_option("--omega-lower", omega_lower, "Lower bound of every weight")->capture_default_str();
    app->add_option("--omega-upper", omega_upper, "Upper bound of every weight [(M-1)/n]");
    app->add_option("--node-limit", node_limit, "Branch-and-bound node limit");
    app->add_option("--time-limit", time_limit, "Branch-and-bound time limit in seconds");
  }
  MilpConfig Config() const {
    MilpConfig c;
    c.alpha = alpha;
    c.big_m = big_m;
    c.epsilon = epsilon;
    c.omega_lower = omega_lower;
    c.omega_upper = omega_upper;
    c.node_limit = node_limit;
    c.time_limit_seconds = time_limit;
    return c;
  }
};

// Flags shared by the commands that load a dataset and simulate labelling.
struct DataFlags {
  std::string dataset;
  std::string features;
  std::vector<std::string> predictions;
  std::string oracle;
  std::vector<std::string> alphabet;

  void Add(CLI::App* app, bool with_predictions = true) {
    app->add_option("--dataset", dataset, "Dataset CSV (id,truth,payload_uri)")->required();
    app->add_option("--features", features, "Feature CSV (id,f1..fd)");
    if (with_predictions) {
      app->add_option("--predictions", predictions, "Prediction CSVs")->delimiter(',');
    }
    app->add_option("--oracle", oracle, "Manual-label oracle, truth:<csv>")->required();
    app->add_option("--alphabet", alphabet, "Label tokens in order")->delimiter(',');
  }

  fs::path OraclePath() const {
    Require(oracle.rfind("truth:", 0) == 0, ErrorCode::kConfig, "--oracle must look like truth:<file>");
    return oracle.substr(6);
  }

  LabelAlphabet Alphabet() const {
    if (!alphabet.empty()) return LabelAlphabet(alphabet);
    std::vector<std::string> tokens = io::CollectTruthLabels(dataset);
    std::vector<fs::path> paths(predictions.begin(), predictions.end());
    for (auto& t : io::CollectPredictionLabels(paths)) tokens.push_back(std::move(t));
    const csv::Table truth = csv::ReadFile(OraclePath());
    auto col = truth.Column("truth");
    if (!col) col = truth.Column("label");
    if (col) {
      for (const auto& row : truth.rows) tokens.push_back(row[*col]);
    }
    return io::InferAlphabet(std::move(tokens));
  }

  std::shared_ptr<const Dataset> Load(const LabelAlphabet& alpha) const {
    std::optional<fs::path> f;
    if (!features.empty()) f = features;
    return std::make_shared<const Dataset>(io::LoadDataset(dataset, f, alpha));
  }

  GroundTruthOracle Oracle(const LabelAlphabet& alpha) const {
    return GroundTruthOracle(io::LoadLabels(OraclePath(), alpha));
  }
};

struct ProviderFlags {
  int synthetic = 0;
  std::string correctness;
  double synthetic_p = 1.0;
  bool uncalibrated = false;
  int softmax = 0;
  TrainConfig train;

  void Add(CLI::App* app) {
    app->add_option("--synthetic", synthetic, "Number of synthetic noisy-oracle classifiers");
    app->add_option("--correctness", correctness, "Per-element correctness CSV (id,p)");
    app->add_option("--synthetic-p", synthetic_p, "Global correctness probability")->capture_default_str();
    app->add_flag("--uncalibrated", uncalibrated, "Synthetic confidences uniform in (0.5,1]");
    app->add_option("--softmax", softmax, "Number of softmax classifiers trained on D_t");
    app->add_option("--epochs", train.epochs, "Softmax training epochs")->capture_default_str();
    app->add_option("--learning-rate", train.learning_rate, "Softmax learning rate")->capture_default_str();
    app->add_option("--l2", train.l2, "Softmax L2 penalty")->capture_default_str();
  }

  std::vector<ProviderSpec> Build(const DataFlags& data, const LabelAlphabet& alphabet) const {
    std::vector<ProviderSpec> out;
    if (!data.predictions.empty()) {
      std::vector<fs::path> paths(data.predictions.begin(), data.predictions.end());
      out = FileProviders(io::LoadPredictions(paths, alphabet));
    }
    SynthConfig synth;
    synth.correct_probability = synthetic_p;
    synth.calibrated = !uncalibrated;
    if (!correctness.empty()) synth.per_element = io::LoadScalarColumn(correctness, "p");
    for (int j = 1; j <= synthetic; ++j) {
      out.push_back(ProviderSpec::Synthetic("synth" + std::to_string(j), synth));
    }
    for (int j = 1; j <= softmax; ++j) {
      out.push_back(ProviderSpec::Softmax("softmax" + std::to_string(j), train));
    }
    Require(!out.empty(), ErrorCode::kConfig,
            "no classifiers: pass --predictions, --synthetic N or --softmax N");
    return out;
  }
};

void PrintSummary(const RunReport& report) {
  std::cerr << report.method << ": manual_effort=" << report.manual_effort;
  if (report.accuracy) std::cerr << " accuracy=" << *report.accuracy;
  if (!report.milp_status.empty()) std::cerr << " milp=" << report.milp_status << " gap=" << report.milp_gap;
  std::cerr << "\n";
}

httplib::Server* g_server = nullptr;

void StopServer(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labelopt: label a dataset to an accuracy target with minimal manual effort"};
  app.require_subcommand(1);

  // split
  auto* split = app.add_subcommand("split", "Cluster and split a dataset into D_t, D_o and D'");
  std::string split_dataset, split_features, split_out;
  SplitConfig split_config;
  split->add_option("--dataset", split_dataset, "Dataset CSV")->required();
  split->add_option("--features", split_features, "Feature CSV");
  split->add_option("--h-initial", split_config.h_initial, "Fraction labelled up front")->capture_default_str();
  split->add_option("--s-max", split_config.s_max, "Upper bound on |D_o|")->capture_default_str();
  split->add_option("--seed", split_config.seed, "Random seed")->capture_default_str();
  split->add_option("--dbscan-eps", split_config.dbscan_eps, "DBSCAN radius [90th pct k-distance]");
  split->add_option("--min-pts", split_config.dbscan_min_pts, "DBSCAN minPts")->capture_default_str();
  split->add_option("--out", split_out, "Partition JSON");

  // train
  auto* train = app.add_subcommand("train", "Train a softmax classifier");
  std::string train_features, train_labels, train_out;
  std::vector<std::string> train_alphabet;
  TrainConfig train_config;
  train->add_option("--features", train_features, "Feature CSV")->required();
  train->add_option("--labels", train_labels, "Label CSV (id,label)")->required();
  train->add_option("--alphabet", train_alphabet, "Label tokens in order")->delimiter(',');
  train->add_option("--epochs", train_config.epochs, "Epochs")->capture_default_str();
  train->add_option("--learning-rate", train_config.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--l2", train_config.l2, "L2 penalty")->capture_default_str();
  train->add_option("--out", train_out, "Model JSON");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict with a softmax model");
  std::string predict_model, predict_features, predict_id = "softmax", predict_out;
  predict->add_option("--model", predict_model, "Model JSON")->required();
  predict->add_option("--features", predict_features, "Feature CSV")->required();
  predict->add_option("--classifier-id", predict_id, "Classifier id written to the output")->capture_default_str();
  predict->add_option("--out", predict_out, "Predictions CSV");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the labelling MILP for an instance CSV");
  std::string solve_instance, solve_out, solve_method = "auto";
  MilpFlags solve_flags;
  solve->add_option("--instance", solve_instance, "Instance CSV (z,b,theta1..thetan)")->required();
  solve_flags.Add(solve);
  solve->add_option("--method", solve_method, "auto, bb, 1d or brute")->capture_default_str();
  solve->add_option("--out", solve_out, "Solution JSON");

  // export-mps
  auto* mps = app.add_subcommand("export-mps", "Write the MILP in MPS format");
  std::string mps_instance, mps_out;
  MilpFlags mps_flags;
  mps->add_option("--instance", mps_instance, "Instance CSV")->required();
  mps_flags.Add(mps);
  mps->add_option("--out", mps_out, "MPS file");

  // run-opal / run-opal-al
  DataFlags opal_data, al_data;
  ProviderFlags opal_providers, al_providers;
  MilpFlags opal_milp, al_milp;
  double opal_h = 0.15, al_h = 0.15;
  int64_t opal_smax = 1000, al_smax = 1000;
  uint64_t opal_seed = 0, al_seed = 0;
  std::string opal_report, al_report;
  bool opal_no_timings = false, al_no_timings = false;
  int al_beta = 50;
  auto* run_opal = app.add_subcommand("run-opal", "Label a dataset end to end");
  auto* run_al = app.add_subcommand("run-opal-al", "Label a dataset with active-learning rounds");
  for (auto [cmd, data, prov, milp, h, smax, seed, report, no_timings] :
       {std::tuple{run_opal, &opal_data, &opal_providers, &opal_milp, &opal_h, &opal_smax, &opal_seed,
                   &opal_report, &opal_no_timings},
        std::tuple{run_al, &al_data, &al_providers, &al_milp, &al_h, &al_smax, &al_seed, &al_report,
                   &al_no_timings}}) {
    data->Add(cmd);
    prov->Add(cmd);
    milp->Add(cmd);
    cmd->add_option("--h-initial", *h, "Fraction labelled up front")->capture_default_str();
    cmd->add_option("--s-max", *smax, "Upper bound on |D_o|")->capture_default_str();
    cmd->add_option("--seed", *seed, "Random seed")->capture_default_str();
    cmd->add_option("--report", *report, "Report JSON");
    cmd->add_flag("--no-timings", *no_timings, "Leave timings out of the report");
  }
  run_al->add_option("--beta", al_beta, "Manual labels per round")->capture_default_str();

  // run-baseline
  auto* baseline = app.add_subcommand("run-baseline", "Run a comparison baseline");
  std::string baseline_kind, baseline_report, baseline_metric, baseline_metric_column = "metric";
  std::string baseline_classifier = "softmax";
  DataFlags baseline_data;
  ProviderFlags baseline_providers;
  BaselineConfig baseline_config;
  bool baseline_no_timings = false;
  baseline->add_option("kind", baseline_kind, "supervised, pseudo or threshold")
      ->required()
      ->check(CLI::IsMember({"supervised", "pseudo", "threshold"}));
  baseline_data.Add(baseline);
  baseline_providers.Add(baseline);
  baseline->add_option("--h-total", baseline_config.h_total, "Fraction labelled manually")->capture_default_str();
  baseline->add_option("--v", baseline_config.v, "Validation size for pseudo-labelling");
  baseline->add_option("--overfit-gap", baseline_config.overfit_gap, "Overfitting gap")->capture_default_str();
  baseline->add_option("--max-iterations", baseline_config.max_iterations, "Pseudo-labelling rounds")
      ->capture_default_str();
  baseline->add_option("--time-limit", baseline_config.time_limit_seconds, "Pseudo-labelling wall-clock limit");
  baseline->add_option("--seed", baseline_config.seed, "Random seed")->capture_default_str();
  baseline->add_option("--metric", baseline_metric, "Metric CSV for the threshold baseline");
  baseline->add_option("--metric-column", baseline_metric_column, "Metric column")->capture_default_str();
  baseline->add_option("--classifier", baseline_classifier, "Supervised classifier: softmax or provider")
      ->capture_default_str();
  baseline->add_option("--report", baseline_report, "Report JSON");
  baseline->add_flag("--no-timings", baseline_no_timings, "Leave timings out of the report");

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "Spec JSON")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();

  // run-grid
  auto* grid = app.add_subcommand("run-grid", "Run an experiment grid");
  std::string grid_spec, grid_method = "opal", grid_out;
  std::optional<int> grid_workers;
  grid->add_option("--grid", grid_spec, "Grid JSON")->required();
  grid->add_option("--method", grid_method, "opal, opal-al, supervised, pseudo or threshold")
      ->capture_default_str();
  grid->add_option("--workers", grid_workers, "Concurrent cells");
  grid->add_option("--out", grid_out, "Results CSV");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the labelling HTTP service");
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1", serve_dir, serve_simulate;
  serve->add_option("--port", serve_port, "Port")->capture_default_str();
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve->add_option("--data-dir", serve_dir, "Session snapshot directory")->required();
  serve->add_option("--simulate", serve_simulate, "Truth CSV enabling simulated answers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*split) {
      std::optional<fs::path> f;
      if (!split_features.empty()) f = split_features;
      // Labels play no part in splitting.
      const Dataset data =
          io::LoadDataset(split_dataset, f, LabelAlphabet({"a", "b"}), /*read_truth=*/false);
      const Partition p = Split(data, split_config);
      io::Json j{{"dT", p.d_t}, {"dO", p.d_o}, {"dPrime", p.d_prime}};
      WriteOutput(split_out, io::DumpJson(j));
      std::cerr << "split: |dT|=" << p.d_t.size() << " |dO|=" << p.d_o.size()
                << " |dPrime|=" << p.d_prime.size() << "\n";
    } else if (*train) {
      LabelAlphabet alphabet;
      if (!train_alphabet.empty()) {
        alphabet = LabelAlphabet(train_alphabet);
      } else {
        const csv::Table t = csv::ReadFile(train_labels);
        auto col = t.Column("label");
        if (!col) col = t.Column("truth");
        Require(col.has_value(), ErrorCode::kParse, train_labels + ": needs a label column");
        std::vector<std::string> tokens;
        for (const auto& row : t.rows) tokens.push_back(row[*col]);
        alphabet = io::InferAlphabet(tokens);
      }
      const auto labels = io::LoadLabels(train_labels, alphabet);
      const csv::Table t = csv::ReadFile(train_features);
      TrainingSet set;
      for (size_t r = 0; r < t.rows.size(); ++r) {
        auto it = labels.find(t.rows[r][0]);
        if (it == labels.end()) continue;
        std::vector<double> x;
        for (size_t k = 1; k < t.rows[r].size(); ++k) x.push_back(csv::ParseDouble(t.rows[r][k], train_features));
        set.features.push_back(std::move(x));
        set.labels.push_back(it->second);
      }
      TrainLog log;
      const SoftmaxModel model = TrainSoftmax(set, alphabet, train_config, &log);
      WriteOutput(train_out, model.ToJson());
      std::cerr << "train: " << set.features.size() << " examples, final loss " << log.losses.back()
                << ", learning-rate halvings " << log.learning_rate_halvings << "\n";
    } else if (*predict) {
      const SoftmaxModel model = SoftmaxModel::FromJson(csv::ReadText(predict_model));
      const csv::Table t = csv::ReadFile(predict_features);
      PredictionSet set(std::vector<std::string>{predict_id});
      for (size_t r = 0; r < t.rows.size(); ++r) {
        std::vector<double> x;
        for (size_t k = 1; k < t.rows[r].size(); ++k) x.push_back(csv::ParseDouble(t.rows[r][k], predict_features));
        set.Set(0, t.rows[r][0], model.Predict(x));
      }
      WriteOutput(predict_out, io::FormatPredictions(set, model.alphabet()));
    } else if (*solve) {
      const OptimizationInstance instance = io::LoadInstance(solve_instance);
      const MilpConfig config = solve_flags.Config();
      MilpSolution solution;
      std::string method = solve_method;
      if (method == "auto") method = instance.num_classifiers() == 1 ? "1d" : "bb";
      if (method == "1d") {
        solution = Solve1D(instance, config);
      } else if (method == "bb") {
        solution = SolveBranchAndBound(Formulate(instance, config));
      } else if (method == "brute") {
        solution = BruteForce(instance, config);
      } else {
        Fail(ErrorCode::kConfig, "unknown method '" + solve_method + "'");
      }
      const VerifyReport verify = Verify(solution, instance, config);
      WriteOutput(solve_out, io::DumpJson(io::SolutionToJson(solution)));
      std::cerr << "solve: status=" << MilpStatusName(solution.status)
                << " manual_count=" << solution.manual_count << " gap=" << solution.gap
                << " verified=" << (verify.ok ? "yes" : "NO") << "\n";
      for (const auto& f : verify.failures) std::cerr << "  " << f << "\n";
      if (!verify.ok) return 3;
    } else if (*mps) {
      const OptimizationInstance instance = io::LoadInstance(mps_instance);
      WriteOutput(mps_out, ExportMps(Formulate(instance, mps_flags.Config())));
    } else if (*run_opal || *run_al) {
      const bool al = run_al->parsed();
      const DataFlags& data = al ? al_data : opal_data;
      const ProviderFlags& prov = al ? al_providers : opal_providers;
      const MilpFlags& milp = al ? al_milp : opal_milp;
      const LabelAlphabet alphabet = data.Alphabet();
      auto dataset = data.Load(alphabet);
      GroundTruthOracle oracle = data.Oracle(alphabet);
      OpalConfig config;
      config.alpha = milp.alpha;
      config.milp = milp.Config();
      config.split.h_initial = al ? al_h : opal_h;
      config.split.s_max = al ? al_smax : opal_smax;
      config.seed = al ? al_seed : opal_seed;
      config.providers = prov.Build(data, alphabet);
      const RunReport report =
          al ? RunOpalAl(dataset, ALConfig{config, al_beta}, oracle) : RunOpal(dataset, config, oracle);
      const bool no_timings = al ? al_no_timings : opal_no_timings;
      WriteOutput(al ? al_report : opal_report, io::DumpJson(io::ReportToJson(report, {!no_timings})));
      PrintSummary(report);
    } else if (*baseline) {
      const LabelAlphabet alphabet = baseline_data.Alphabet();
      auto dataset = baseline_data.Load(alphabet);
      GroundTruthOracle oracle = baseline_data.Oracle(alphabet);
      RunReport report;
      if (baseline_kind == "supervised") {
        ProviderSpec classifier = ProviderSpec::Softmax("softmax", baseline_providers.train);
        if (baseline_classifier != "softmax") {
          classifier = baseline_providers.Build(baseline_data, alphabet).front();
        }
        report = RunSupervised(dataset, classifier, baseline_config, oracle);
      } else if (baseline_kind == "pseudo") {
        report = RunPseudo(dataset, baseline_providers.train, baseline_config, oracle);
      } else {
        Require(!baseline_metric.empty(), ErrorCode::kConfig, "threshold baseline needs --metric");
        report = RunThresholdBaseline(dataset, io::LoadScalarColumn(baseline_metric, baseline_metric_column),
                                      baseline_config, oracle);
      }
      WriteOutput(baseline_report, io::DumpJson(io::ReportToJson(report, {!baseline_no_timings})));
      PrintSummary(report);
    } else if (*gen) {
      const SynthDatasetSpec spec = SynthDatasetSpec::FromJson(csv::ReadText(gen_spec));
      const SynthFiles files = WriteSynth(GenerateSynth(spec), gen_out);
      std::cerr << "gen-synth: wrote " << files.dataset.string() << ", " << files.features.string()
                << ", " << files.correctness.string() << "\n";
    } else if (*grid) {
      GridSpec spec = GridSpec::FromJson(csv::ReadText(grid_spec), fs::path(grid_spec).parent_path());
      if (grid_workers) spec.workers = *grid_workers;
      const auto rows = RunGrid(spec, grid_method);
      WriteOutput(grid_out, FormatGridCsv(rows));
      size_t failed = 0;
      for (const auto& row : rows) failed += row.error.empty() ? 0 : 1;
      std::cerr << "run-grid: " << rows.size() << " rows, " << failed << " failed\n";
    } else if (*serve) {
      ServiceOptions options;
      options.data_dir = serve_dir;
      if (!serve_simulate.empty()) options.simulate_truth = serve_simulate;
      LabelService service(options);
      httplib::Server server;
      service.Mount(server);
      g_server = &server;
      std::signal(SIGINT, StopServer);
      std::signal(SIGTERM, StopServer);
      std::cerr << "serving on " << serve_host << ":" << serve_port << " (" << service.session_count()
                << " sessions restored" << (service.simulating() ? ", simulation on" : "") << ")\n";
      if (!server.listen(serve_host, serve_port)) {
        std::cerr << "error: cannot listen on " << serve_host << ":" << serve_port << "\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
