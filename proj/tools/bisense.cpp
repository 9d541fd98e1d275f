// Command-line front end: synthesize datasets, train and evaluate the two
// detector families, run accuracy-vs-SNR sweeps, and exercise the built-in
// numerical cross-checks.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bisense/dataset.hpp"
#include "bisense/errors.hpp"
#include "bisense/harness.hpp"
#include "bisense/selfcheck.hpp"

namespace {

using namespace bisense;

struct GenerateArgs {
  std::string profile = "desk";
  std::string waveform_path;
  std::string scenario = "los";
  std::string scenario_path;
  std::string use_case = "moving";
  int count = 200;
  double snr_db = 40.0;
  std::uint64_t seed = 1;
  std::uint64_t grid_seed = 0;
  bool grid_seed_set = false;
  int roi_delay_bins = 128;
  int roi_doppler_bins = 128;
  int threads = 1;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  DatasetSpec spec;
  spec.waveform = !a.waveform_path.empty()
                      ? WaveformConfig::from_json_file(a.waveform_path)
                      : (a.profile == "full" ? WaveformConfig::full_profile()
                                             : WaveformConfig::desk_profile());
  if (!a.scenario_path.empty()) {
    spec.scenario = ScenarioSpec::from_json_file(a.scenario_path);
  } else {
    spec.scenario.scenario = scenario_from_string(a.scenario);
    spec.scenario.seed = a.seed;
  }
  spec.use_case = use_case_from_string(a.use_case);
  spec.count_per_class = a.count;
  spec.snr_db = a.snr_db;
  spec.seed_base = a.seed;
  if (a.grid_seed_set) spec.grid_seed = a.grid_seed;
  spec.roi.delay_bins = a.roi_delay_bins;
  spec.roi.doppler_bins = a.roi_doppler_bins;
  spec.num_threads = a.threads;
  spec.validate();

  const Dataset ds = generate_dataset(spec);
  save_dataset(ds, a.out);
  std::cout << "wrote " << ds.records.size() << " records ("
            << ds.meta.tensor_rows << "x" << ds.meta.tensor_cols
            << " tensors, " << to_string(ds.meta.scenario) << "/"
            << to_string(ds.meta.use_case) << ", " << ds.meta.snr_db
            << " dB) to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double split = 0.7;
  int threads = 1;
  TrainHyperparams hp;
};

int run_train(const TrainArgs& a) {
  const Dataset ds = load_dataset(a.data);
  const std::uint64_t seed = a.seed_set ? a.seed : ds.meta.seed_base;

  std::vector<double> energies;
  std::vector<int> labels;
  energies.reserve(ds.records.size());
  labels.reserve(ds.records.size());
  for (const DatasetRecord& rec : ds.records) {
    energies.push_back(rec.energy_dbw);
    labels.push_back(rec.label);
  }
  const EnergyDetector energy = fit_energy_threshold(energies, labels);

  const auto [train, val] = split_dataset(ds, a.split, seed);
  CnnConfig cfg = ds.meta.use_case == UseCase::moving
                      ? CnnConfig::for_moving()
                      : CnnConfig::for_stationary();
  cfg.input_rows = ds.meta.tensor_rows;
  cfg.input_cols = ds.meta.tensor_cols;
  CnnModel model = CnnModel::init(cfg, seed);
  const TrainReport report = train_cnn(model, train.labeled_set(),
                                       val.labeled_set(), a.hp, seed,
                                       a.threads);

  model.save(a.out + "/cnn");
  energy.save(a.out + "/energy.json");

  nlohmann::json j;
  j["schema_version"] = 1;
  j["epochs_run"] = report.epochs_run;
  j["best_epoch"] = report.best_epoch;
  j["best_val_accuracy"] = report.best_val_accuracy;
  j["train_loss"] = report.train_loss;
  j["val_accuracy"] = report.val_accuracy;
  j["seed"] = seed;
  j["train_records"] = train.records.size();
  j["val_records"] = val.records.size();
  std::ofstream rf(a.out + "/train_report.json");
  rf << j.dump(2) << "\n";
  if (!rf) throw IoError("cannot write " + a.out + "/train_report.json");

  std::cout << "trained " << ds.records.size() << " records for "
            << report.epochs_run << " epochs; best val accuracy "
            << report.best_val_accuracy << " at epoch " << report.best_epoch
            << "; energy threshold " << energy.threshold_dbw << " dBW; model in "
            << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  const Dataset ds = load_dataset(a.data);
  const BaselineDetector baseline(EnergyDetector::load(a.model + "/energy.json"));
  const AiDetector ai(CnnModel::load(a.model + "/cnn"));

  SweepResult result;
  result.rows.push_back(evaluate_detector(baseline, ds, a.threads));
  result.rows.push_back(evaluate_detector(ai, ds, a.threads));

  const std::string csv = to_csv(result);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_csv(result, a.out);
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string out;
  int threads = 0;
  bool threads_set = false;
  bool quiet = false;
};

int run_sweep(const SweepArgs& a) {
  SweepConfig cfg = SweepConfig::from_json_file(a.config);
  if (a.threads_set) cfg.num_threads = a.threads;
  cfg.validate();
  const SweepResult result = sweep_snr(cfg, a.quiet ? nullptr : &std::cerr);
  write_csv(result, a.out);
  std::cout << "wrote " << result.rows.size() << " rows to " << a.out << "\n";
  return 0;
}

int run_selftest() {
  const std::vector<CheckResult> checks = run_selfchecks();
  int failures = 0;
  for (const CheckResult& c : checks) {
    if (!c.pass) failures += 1;
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << std::left
              << std::setw(34) << c.name << std::right << std::scientific
              << std::setprecision(3) << " value=" << c.value
              << " limit=" << c.limit << std::defaultfloat << "  " << c.detail
              << "\n";
  }
  if (failures > 0) {
    std::cout << failures << " of " << checks.size() << " checks failed\n";
    return 1;
  }
  std::cout << "all " << checks.size() << " checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bisense: bistatic passive sensing over an OFDM downlink"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cg = app.add_subcommand(
      "generate", "Synthesize a labelled detection dataset");
  cg->add_option("--profile", gen.profile, "Waveform profile")
      ->check(CLI::IsMember({"desk", "full"}))
      ->capture_default_str();
  cg->add_option("--waveform", gen.waveform_path,
                 "Waveform config JSON (overrides --profile)");
  cg->add_option("--scenario", gen.scenario, "Propagation scenario")
      ->check(CLI::IsMember({"los", "nlos"}))
      ->capture_default_str();
  cg->add_option("--scenario-config", gen.scenario_path,
                 "Scenario JSON (overrides --scenario)");
  cg->add_option("--use-case", gen.use_case, "Target kinematics")
      ->check(CLI::IsMember({"moving", "stationary"}))
      ->capture_default_str();
  cg->add_option("--count,-k", gen.count, "Records per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cg->add_option("--snr-db", gen.snr_db, "Direct-path SNR in dB")
      ->capture_default_str();
  cg->add_option("--seed", gen.seed, "Record seed base")
      ->capture_default_str();
  CLI::Option* gseed = cg->add_option("--grid-seed", gen.grid_seed,
                                      "Reference-grid seed override");
  cg->add_option("--roi-delay-bins", gen.roi_delay_bins, "Crop: delay bins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cg->add_option("--roi-doppler-bins", gen.roi_doppler_bins,
                 "Crop: Doppler bins (2-D maps only)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cg->add_option("--threads", gen.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cg->add_option("--out", gen.out, "Output dataset directory")->required();

  TrainArgs tr;
  CLI::App* ct = app.add_subcommand(
      "train", "Fit both detectors on a generated dataset");
  ct->add_option("--data", tr.data, "Training dataset directory")->required();
  ct->add_option("--out", tr.out, "Output model directory")->required();
  CLI::Option* tseed = ct->add_option(
      "--seed", tr.seed, "Split/init/shuffle seed (default: dataset seed)");
  ct->add_option("--split", tr.split, "Train fraction of the split")
      ->check(CLI::Range(0.05, 0.95))
      ->capture_default_str();
  ct->add_option("--threads", tr.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--epochs", tr.hp.max_epochs, "Max training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--patience", tr.hp.patience, "Early-stopping patience")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--batch-size", tr.hp.batch_size, "Mini-batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--learning-rate", tr.hp.learning_rate, "Adam step size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvalArgs ev;
  CLI::App* ce = app.add_subcommand(
      "eval", "Evaluate a trained model directory on a dataset");
  ce->add_option("--model", ev.model, "Model directory from `train`")
      ->required();
  ce->add_option("--data", ev.data, "Evaluation dataset directory")
      ->required();
  ce->add_option("--out", ev.out, "CSV output path (default: stdout)");
  ce->add_option("--threads", ev.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SweepArgs sw;
  CLI::App* cs = app.add_subcommand(
      "sweep", "Run an accuracy-vs-SNR sweep from a JSON config");
  cs->add_option("--config", sw.config, "Sweep config JSON")->required();
  cs->add_option("--out", sw.out, "CSV output path")->required();
  CLI::Option* sthr = cs->add_option("--threads", sw.threads,
                                     "Override config worker threads")
                          ->check(CLI::PositiveNumber);
  cs->add_flag("--quiet", sw.quiet, "Suppress per-point progress");

  CLI::App* cself = app.add_subcommand(
      "selftest", "Run the built-in numerical cross-checks");

  CLI11_PARSE(app, argc, argv);

  gen.grid_seed_set = gseed->count() > 0;
  tr.seed_set = tseed->count() > 0;
  sw.threads_set = sthr->count() > 0;

  try {
    if (cg->parsed()) return run_generate(gen);
    if (ct->parsed()) return run_train(tr);
    if (ce->parsed()) return run_eval(ev);
    if (cs->parsed()) return run_sweep(sw);
    if (cself->parsed()) return run_selftest();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
