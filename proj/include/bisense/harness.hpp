#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "bisense/dataset.hpp"

namespace bisense {

// Common face of the two detector families for the evaluation loop.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  virtual Prediction predict(const Dataset& ds, int record) const = 0;
};

// Threshold test on the stored energy statistic.
class BaselineDetector : public Detector {
 public:
  explicit BaselineDetector(EnergyDetector det) : det_(det) {}
  std::string name() const override { return "baseline"; }
  Prediction predict(const Dataset& ds, int record) const override {
    return classify_energy(det_, ds.records[record].energy_dbw);
  }
  const EnergyDetector& fitted() const { return det_; }

 private:
  EnergyDetector det_;
};

// Learned test on the stored feature tensor.
class AiDetector : public Detector {
 public:
  explicit AiDetector(CnnModel model) : model_(std::move(model)) {}
  std::string name() const override { return "ai"; }
  Prediction predict(const Dataset& ds, int record) const override {
    return model_.predict(ds.view(record));
  }
  const CnnModel& model() const { return model_; }

 private:
  CnnModel model_;
};

struct EvalReport {
  std::string detector;
  ScenarioKind scenario = ScenarioKind::los;
  UseCase use_case = UseCase::moving;
  double snr_db = 0.0;
  std::uint64_t seed = 0;  // test-set seed base
  int n_test = 0;
  int n_h0 = 0, n_h1 = 0;
  int n_false_alarm = 0;  // decided 1 on an H0 record
  int n_missed = 0;       // decided 0 on an H1 record
  double p_fa = 0.0;
  double p_md = 0.0;
  double accuracy = 0.0;  // 1 - (p_fa * n_h0 + p_md * n_h1) / n_test
};

// Confusion counts of `det` over every record of `test`, which must contain
// both classes (error rates are per-class).
EvalReport evaluate_detector(const Detector& det, const Dataset& test,
                             int num_threads = 1);

// One Monte-Carlo accuracy-vs-SNR experiment: per SNR point, synthesize a
// training set and a test set, fit the baseline on the training energies,
// train the learned detector on a stratified split, evaluate both on the
// held-out test set.
struct SweepConfig {
  WaveformConfig waveform;
  ScenarioSpec scenario;
  UseCase use_case = UseCase::moving;
  std::vector<double> snr_grid_db;
  int train_per_class = 400;
  int test_per_class = 150;
  double split_fraction = 0.7;
  TrainHyperparams hyperparams;
  RoiSpec roi;
  std::uint64_t seed = 0;
  int num_threads = 1;

  void validate() const;
  // JSON with keys: profile ("desk"/"full") or waveform object, scenario
  // ("los"/"nlos") or scenario object, use_case, snr_grid_db,
  // train_per_class, test_per_class, seed, threads.
  static SweepConfig from_json_text(const std::string& text);
  static SweepConfig from_json_file(const std::string& path);
};

struct SweepResult {
  std::vector<EvalReport> rows;  // per SNR point: baseline row, then ai row
};

SweepResult sweep_snr(const SweepConfig& cfg, std::ostream* progress = nullptr);

// scenario,use_case,snr_db,detector,accuracy,p_fa,p_md,n_test,seed with
// fixed numeric formatting, so identical results serialize to identical
// bytes.
std::string to_csv(const SweepResult& result);
void write_csv(const SweepResult& result, const std::string& path);

}  // namespace bisense
