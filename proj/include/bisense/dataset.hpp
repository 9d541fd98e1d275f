#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bisense/cnn.hpp"
#include "bisense/features.hpp"
#include "bisense/geometry.hpp"
#include "bisense/numerology.hpp"

namespace bisense {

enum class UseCase { moving, stationary };

std::string to_string(UseCase u);
UseCase use_case_from_string(const std::string& s);

// Everything needed to synthesize one labelled record set.
struct DatasetSpec {
  WaveformConfig waveform;
  ScenarioSpec scenario;  // scenario.seed keys the shared clutter draw
  UseCase use_case = UseCase::moving;
  int count_per_class = 0;
  double snr_db = 0.0;
  std::uint64_t seed_base = 0;  // record i draws from seed_base + i
  // Reference-grid seed; defaults to a stream of seed_base.
  std::optional<std::uint64_t> grid_seed;
  RoiSpec roi;
  int num_threads = 1;

  void validate() const;
};

struct DatasetRecord {
  int label = 0;            // 1 = target present
  double energy_dbw = 0.0;  // raw statistic for the baseline detector
  std::vector<float> tensor;
};

struct DatasetMeta {
  int schema_version = 1;
  ScenarioKind scenario = ScenarioKind::los;
  UseCase use_case = UseCase::moving;
  double snr_db = 0.0;
  int count_per_class = 0;
  std::uint64_t seed_base = 0;
  std::uint64_t grid_seed = 0;
  int tensor_rows = 0;
  int tensor_cols = 0;
  WaveformConfig waveform;
  ScenarioSpec scenario_spec;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<DatasetRecord> records;

  std::uint64_t record_seed(int i) const { return meta.seed_base + i; }
  FeatureView view(int i) const {
    return {records[i].tensor.data(), meta.tensor_rows, meta.tensor_cols};
  }
  LabeledSet labeled_set() const;
};

// Synthesizes count_per_class H1 records followed by count_per_class H0
// records.  Record i is fully determined by (spec, i): the scene target and
// the noise draw from streams of seed_base + i, the clutter from the
// scenario seed, the reference grid from grid_seed.  Moving use cases store
// the delay-Doppler map, stationary ones the delay profile.
Dataset generate_dataset(const DatasetSpec& spec);

// Deterministic stratified split: per-class shuffles keyed by `seed`, class
// train counts chosen so the train side holds round(fraction * total)
// records with per-class balance within one record.  Throws DomainError when
// either side would come out empty.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction,
                                          std::uint64_t seed);

// On-disk layout: <dir>/manifest.json + <dir>/records.bin, each record a
// label byte, a float64 energy, then the row-major float32 tensor, all
// little-endian.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace bisense
