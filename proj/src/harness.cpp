#include "bisense/harness.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bisense/errors.hpp"
#include "bisense/parallel.hpp"
#include "bisense/rng.hpp"

namespace bisense {

using nlohmann::json;

EvalReport evaluate_detector(const Detector& det, const Dataset& test,
                             int num_threads) {
  const int n = static_cast<int>(test.records.size());
  if (n == 0) throw DomainError("test set is empty");
  EvalReport r;
  r.detector = det.name();
  r.scenario = test.meta.scenario;
  r.use_case = test.meta.use_case;
  r.snr_db = test.meta.snr_db;
  r.seed = test.meta.seed_base;
  r.n_test = n;
  for (const DatasetRecord& rec : test.records) {
    (rec.label == 1 ? r.n_h1 : r.n_h0) += 1;
  }
  if (r.n_h0 == 0 || r.n_h1 == 0) {
    throw DomainError(
        "test set must contain both hypotheses to report error rates");
  }
  std::vector<int> decisions(n, 0);
  parallel_for(n, num_threads,
               [&](int i) { decisions[i] = det.predict(test, i).decision; });
  for (int i = 0; i < n; ++i) {
    if (test.records[i].label == 1) {
      if (decisions[i] == 0) ++r.n_missed;
    } else {
      if (decisions[i] == 1) ++r.n_false_alarm;
    }
  }
  r.p_fa = static_cast<double>(r.n_false_alarm) / r.n_h0;
  r.p_md = static_cast<double>(r.n_missed) / r.n_h1;
  r.accuracy = 1.0 - (r.p_fa * r.n_h0 + r.p_md * r.n_h1) / n;
  return r;
}

void SweepConfig::validate() const {
  waveform.validate();
  scenario.validate();
  if (snr_grid_db.empty()) throw ConfigError("snr_grid_db must be non-empty");
  for (double s : snr_grid_db) {
    if (!std::isfinite(s)) throw ConfigError("snr_grid_db entries must be finite");
  }
  if (train_per_class < 2 || test_per_class < 1) {
    throw ConfigError("train_per_class must be >= 2 and test_per_class >= 1");
  }
  if (!(split_fraction > 0.0) || !(split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie strictly between 0 and 1");
  }
}

SweepConfig SweepConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sweep JSON malformed: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("sweep JSON must be an object");

  SweepConfig cfg;
  try {
    if (j.contains("waveform")) {
      cfg.waveform = WaveformConfig::from_json_text(j.at("waveform").dump());
    } else {
      const std::string profile = j.value("profile", std::string("desk"));
      if (profile == "desk") {
        cfg.waveform = WaveformConfig::desk_profile();
      } else if (profile == "full") {
        cfg.waveform = WaveformConfig::full_profile();
      } else {
        throw ConfigError("unknown waveform profile: " + profile);
      }
    }
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("scenario") && j.at("scenario").is_object()) {
      cfg.scenario = ScenarioSpec::from_json_text(j.at("scenario").dump());
    } else {
      cfg.scenario.scenario = scenario_from_string(
          j.value("scenario", std::string("los")));
      cfg.scenario.seed = cfg.seed;
    }
    cfg.use_case =
        use_case_from_string(j.value("use_case", std::string("moving")));
    if (!j.contains("snr_grid_db") || !j.at("snr_grid_db").is_array()) {
      throw ConfigError("sweep JSON needs an snr_grid_db array");
    }
    for (const auto& v : j.at("snr_grid_db")) {
      cfg.snr_grid_db.push_back(v.get<double>());
    }
    cfg.train_per_class = j.value("train_per_class", cfg.train_per_class);
    cfg.test_per_class = j.value("test_per_class", cfg.test_per_class);
    cfg.split_fraction = j.value("split_fraction", cfg.split_fraction);
    cfg.num_threads = j.value("threads", cfg.num_threads);
    if (j.contains("hyperparams")) {
      const json& h = j.at("hyperparams");
      cfg.hyperparams.learning_rate =
          h.value("learning_rate", cfg.hyperparams.learning_rate);
      cfg.hyperparams.batch_size =
          h.value("batch_size", cfg.hyperparams.batch_size);
      cfg.hyperparams.max_epochs =
          h.value("max_epochs", cfg.hyperparams.max_epochs);
      cfg.hyperparams.patience = h.value("patience", cfg.hyperparams.patience);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep JSON has wrong value type: ") +
                      e.what());
  }
  cfg.validate();
  return cfg;
}

SweepConfig SweepConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

SweepResult sweep_snr(const SweepConfig& cfg, std::ostream* progress) {
  cfg.validate();
  SweepResult result;

  // One reference grid and one clutter layout for the whole sweep, so SNR is
  // the only thing moving between points.
  const std::uint64_t grid_seed = derive_seed(cfg.seed, Stream::kSensingGrid);

  for (std::size_t q = 0; q < cfg.snr_grid_db.size(); ++q) {
    const double snr = cfg.snr_grid_db[q];

    DatasetSpec train_spec;
    train_spec.waveform = cfg.waveform;
    train_spec.scenario = cfg.scenario;
    train_spec.use_case = cfg.use_case;
    train_spec.count_per_class = cfg.train_per_class;
    train_spec.snr_db = snr;
    train_spec.seed_base = derive_seed(cfg.seed, Stream::kTrainBase, q);
    train_spec.grid_seed = grid_seed;
    train_spec.num_threads = cfg.num_threads;

    DatasetSpec test_spec = train_spec;
    test_spec.count_per_class = cfg.test_per_class;
    test_spec.seed_base = derive_seed(cfg.seed, Stream::kTestBase, q);

    if (progress) {
      *progress << "snr " << snr << " dB: synthesizing "
                << 2 * cfg.train_per_class << " train + "
                << 2 * cfg.test_per_class << " test records\n"
                << std::flush;
    }
    const Dataset train_all = generate_dataset(train_spec);
    const Dataset test = generate_dataset(test_spec);

    // Baseline: fit on every training energy.
    std::vector<double> energies;
    std::vector<int> labels;
    energies.reserve(train_all.records.size());
    labels.reserve(train_all.records.size());
    for (const DatasetRecord& rec : train_all.records) {
      energies.push_back(rec.energy_dbw);
      labels.push_back(rec.label);
    }
    const BaselineDetector baseline(fit_energy_threshold(energies, labels));

    // Learned detector: stratified split, then mini-batch training.
    const auto [train, val] = split_dataset(
        train_all, cfg.split_fraction, derive_seed(cfg.seed, Stream::kSplit, q));
    const CnnConfig net_cfg = cfg.use_case == UseCase::moving
                                  ? CnnConfig::for_moving()
                                  : CnnConfig::for_stationary();
    CnnModel model =
        CnnModel::init(net_cfg, derive_seed(cfg.seed, Stream::kInit, q));
    const LabeledSet train_set = train.labeled_set();
    const LabeledSet val_set = val.labeled_set();
    const TrainReport tr =
        train_cnn(model, train_set, val_set, cfg.hyperparams,
                  derive_seed(cfg.seed, Stream::kShuffle, q), cfg.num_threads);
    if (progress) {
      *progress << "snr " << snr << " dB: trained " << tr.epochs_run
                << " epochs (best val acc " << tr.best_val_accuracy << ")\n"
                << std::flush;
    }
    const AiDetector ai(std::move(model));

    result.rows.push_back(evaluate_detector(baseline, test, cfg.num_threads));
    result.rows.push_back(evaluate_detector(ai, test, cfg.num_threads));
  }
  return result;
}

std::string to_csv(const SweepResult& result) {
  std::string out = "scenario,use_case,snr_db,detector,accuracy,p_fa,p_md,"
                    "n_test,seed\n";
  char buf[256];
  for (const EvalReport& r : result.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%.10g,%s,%.10g,%.10g,%.10g,%d,%" PRIu64 "\n",
                  to_string(r.scenario).c_str(), to_string(r.use_case).c_str(),
                  r.snr_db, r.detector.c_str(), r.accuracy, r.p_fa, r.p_md,
                  r.n_test, static_cast<std::uint64_t>(r.seed));
    out += buf;
  }
  return out;
}

void write_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write results CSV: " + path);
  out << to_csv(result);
  if (!out) throw IoError("short write of results CSV: " + path);
}

}  // namespace bisense
