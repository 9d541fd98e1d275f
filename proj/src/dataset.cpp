#include "bisense/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bisense/channel.hpp"
#include "bisense/energy.hpp"
#include "bisense/errors.hpp"
#include "bisense/parallel.hpp"
#include "bisense/rng.hpp"

namespace bisense {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(UseCase u) {
  return u == UseCase::moving ? "moving" : "stationary";
}

UseCase use_case_from_string(const std::string& s) {
  if (s == "moving") return UseCase::moving;
  if (s == "stationary") return UseCase::stationary;
  throw ConfigError("unknown use case: " + s +
                    " (expected moving or stationary)");
}

void DatasetSpec::validate() const {
  waveform.validate();
  scenario.validate();
  if (count_per_class < 1) {
    throw ConfigError("count_per_class must be at least 1");
  }
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
  if (scenario.target_speed_range) {
    const auto& [lo, hi] = *scenario.target_speed_range;
    if (use_case == UseCase::stationary && hi > 0.0) {
      throw ConfigError(
          "stationary use case conflicts with a moving-target scenario "
          "(nonzero target_speed_range)");
    }
    if (use_case == UseCase::moving && hi <= 0.0) {
      throw ConfigError(
          "moving use case conflicts with a zero target_speed_range");
    }
  }
}

LabeledSet Dataset::labeled_set() const {
  LabeledSet s;
  s.x.reserve(records.size());
  s.y.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    s.x.push_back(view(static_cast<int>(i)));
    s.y.push_back(records[i].label);
  }
  return s;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();

  // Resolve the target motion for the scenario before sampling scenes.
  ScenarioSpec scenario = spec.scenario;
  if (!scenario.target_speed_range) {
    scenario.target_speed_range = spec.use_case == UseCase::moving
                                      ? std::make_pair(0.5, 2.0)
                                      : std::make_pair(0.0, 0.0);
  }

  const DerivedParams derived = derive_params(spec.waveform);
  const std::uint64_t grid_seed =
      spec.grid_seed.value_or(derive_seed(spec.seed_base, Stream::kSensingGrid));
  const SymbolGrid sensing = generate_sensing_grid(spec.waveform, grid_seed);

  Dataset ds;
  ds.meta.scenario = scenario.scenario;
  ds.meta.use_case = spec.use_case;
  ds.meta.snr_db = spec.snr_db;
  ds.meta.count_per_class = spec.count_per_class;
  ds.meta.seed_base = spec.seed_base;
  ds.meta.grid_seed = grid_seed;
  ds.meta.tensor_rows = spec.roi.delay_bins;
  ds.meta.tensor_cols =
      spec.use_case == UseCase::moving ? spec.roi.doppler_bins : 1;
  ds.meta.waveform = spec.waveform;
  ds.meta.scenario_spec = scenario;

  const int total = 2 * spec.count_per_class;
  ds.records.resize(total);
  parallel_for(total, spec.num_threads, [&](int i) {
    const bool target_present = i < spec.count_per_class;
    ScenarioSpec rec_spec = scenario;
    rec_spec.hypothesis = target_present ? Hypothesis::h1 : Hypothesis::h0;
    const std::uint64_t rec_seed = ds.meta.seed_base + i;

    const Deployment scene = sample_deployment(rec_spec, rec_seed);
    const PathSet paths = enumerate_paths(scene, spec.waveform.center_freq_hz);
    const NoiseSpec noise =
        noise_from_snr(spec.snr_db, scene, spec.waveform.center_freq_hz);
    SplitMix64 noise_rng = derive_stream(rec_seed, Stream::kNoise);
    const SymbolGrid rx =
        synthesize_rx_grid(sensing, paths, spec.waveform.subcarrier_spacing_hz,
                           derived.sensing_spacing_s, noise, noise_rng);

    DatasetRecord& rec = ds.records[i];
    rec.label = target_present ? 1 : 0;
    rec.energy_dbw = energy_statistic(rx);
    if (spec.use_case == UseCase::moving) {
      const DelayDopplerProfile ddp =
          compute_ddp(rx, sensing, spec.waveform.subcarrier_spacing_hz,
                      derived.sensing_spacing_s);
      rec.tensor = extract_roi(ddp, spec.roi).data;
    } else {
      const PowerDelayProfile pdp =
          compute_pdp(rx, sensing, spec.waveform.subcarrier_spacing_hz);
      rec.tensor = extract_roi(pdp, spec.roi).data;
    }
  });
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ConfigError("split fraction must lie strictly between 0 and 1");
  }
  const int n = static_cast<int>(ds.records.size());
  if (n < 2) throw DomainError("need at least two records to split");

  std::vector<int> idx0, idx1;
  for (int i = 0; i < n; ++i) {
    (ds.records[i].label == 1 ? idx1 : idx0).push_back(i);
  }
  SplitMix64 rng = derive_stream(seed, Stream::kSplit);
  const auto shuffle = [&rng](std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next() % (i + 1));
      std::swap(v[i], v[j]);
    }
  };
  shuffle(idx0);
  shuffle(idx1);

  // Per-class floor counts, then at most one remainder per class (larger
  // fractional entitlement first, H1 breaking ties) until the train side
  // holds round(fraction * n) records.
  const int want_train = static_cast<int>(std::lround(fraction * n));
  const int n1 = static_cast<int>(idx1.size());
  const int n0 = static_cast<int>(idx0.size());
  const double frac1 = fraction * n1 - std::floor(fraction * n1);
  const double frac0 = fraction * n0 - std::floor(fraction * n0);
  int take1 = static_cast<int>(std::floor(fraction * n1));
  int take0 = static_cast<int>(std::floor(fraction * n0));
  bool bumped1 = false, bumped0 = false;
  while (take0 + take1 < want_train) {
    if (!bumped1 && (bumped0 || frac1 >= frac0) && take1 < n1) {
      ++take1;
      bumped1 = true;
    } else if (!bumped0 && take0 < n0) {
      ++take0;
      bumped0 = true;
    } else if (take1 < n1) {
      ++take1;
    } else {
      ++take0;
    }
  }

  std::vector<int> train_idx, val_idx;
  for (int i = 0; i < static_cast<int>(idx1.size()); ++i) {
    (i < take1 ? train_idx : val_idx).push_back(idx1[i]);
  }
  for (int i = 0; i < static_cast<int>(idx0.size()); ++i) {
    (i < take0 ? train_idx : val_idx).push_back(idx0[i]);
  }
  if (train_idx.empty() || val_idx.empty()) {
    throw DomainError("split would leave one side empty");
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  const auto take = [&](const std::vector<int>& which) {
    Dataset out;
    out.meta = ds.meta;
    out.records.reserve(which.size());
    for (int i : which) out.records.push_back(ds.records[i]);
    return out;
  };
  return {take(train_idx), take(val_idx)};
}

namespace {

json meta_to_json(const DatasetMeta& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["scenario"] = to_string(m.scenario);
  j["use_case"] = to_string(m.use_case);
  j["snr_db"] = m.snr_db;
  j["count_per_class"] = m.count_per_class;
  j["seed_base"] = m.seed_base;
  j["grid_seed"] = m.grid_seed;
  j["tensor_rows"] = m.tensor_rows;
  j["tensor_cols"] = m.tensor_cols;
  j["waveform"] = json::parse(m.waveform.to_json_text());
  j["scenario_spec"] = json::parse(m.scenario_spec.to_json_text());
  return j;
}

DatasetMeta meta_from_json(const json& j) {
  if (j.value("schema_version", 0) != 1) {
    throw VersionError("unsupported dataset schema version");
  }
  DatasetMeta m;
  try {
    m.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    m.use_case = use_case_from_string(j.at("use_case").get<std::string>());
    m.snr_db = j.at("snr_db").get<double>();
    m.count_per_class = j.at("count_per_class").get<int>();
    m.seed_base = j.at("seed_base").get<std::uint64_t>();
    m.grid_seed = j.at("grid_seed").get<std::uint64_t>();
    m.tensor_rows = j.at("tensor_rows").get<int>();
    m.tensor_cols = j.at("tensor_cols").get<int>();
    m.waveform = WaveformConfig::from_json_text(j.at("waveform").dump());
    m.scenario_spec = ScenarioSpec::from_json_text(j.at("scenario_spec").dump());
  } catch (const json::exception& e) {
    throw CorruptDataError(std::string("dataset manifest incomplete: ") +
                           e.what());
  }
  if (m.tensor_rows < 1 || m.tensor_cols < 1 || m.count_per_class < 1) {
    throw CorruptDataError("dataset manifest has non-positive dimensions");
  }
  return m;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  {
    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw IoError("cannot write dataset manifest in " + dir);
    mf << meta_to_json(ds.meta).dump(2) << "\n";
  }
  std::ofstream rf(fs::path(dir) / "records.bin", std::ios::binary);
  if (!rf) throw IoError("cannot write dataset records in " + dir);
  const std::size_t tensor_len =
      static_cast<std::size_t>(ds.meta.tensor_rows) * ds.meta.tensor_cols;
  for (const DatasetRecord& rec : ds.records) {
    if (rec.tensor.size() != tensor_len) {
      throw ShapeError("record tensor disagrees with the dataset shape");
    }
    const unsigned char label = static_cast<unsigned char>(rec.label);
    rf.write(reinterpret_cast<const char*>(&label), 1);
    rf.write(reinterpret_cast<const char*>(&rec.energy_dbw),
             sizeof(rec.energy_dbw));
    rf.write(reinterpret_cast<const char*>(rec.tensor.data()),
             static_cast<std::streamsize>(tensor_len * sizeof(float)));
  }
  if (!rf) throw IoError("short write of dataset records in " + dir);
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("cannot open dataset manifest in " + dir);
  json j;
  try {
    mf >> j;
  } catch (const json::parse_error& e) {
    throw CorruptDataError(std::string("dataset manifest malformed: ") +
                           e.what());
  }
  Dataset ds;
  ds.meta = meta_from_json(j);

  std::ifstream rf(fs::path(dir) / "records.bin", std::ios::binary);
  if (!rf) throw IoError("cannot open dataset records in " + dir);
  const std::size_t tensor_len =
      static_cast<std::size_t>(ds.meta.tensor_rows) * ds.meta.tensor_cols;
  const std::size_t rec_bytes = 1 + sizeof(double) + tensor_len * sizeof(float);
  rf.seekg(0, std::ios::end);
  const std::size_t bytes = static_cast<std::size_t>(rf.tellg());
  rf.seekg(0);
  const std::size_t expect =
      rec_bytes * 2 * static_cast<std::size_t>(ds.meta.count_per_class);
  if (bytes != expect) {
    std::ostringstream os;
    os << "dataset records truncated: have " << bytes << " bytes, manifest "
       << "implies " << expect << " (record " << bytes / rec_bytes << ")";
    throw CorruptDataError(os.str());
  }
  const int total = 2 * ds.meta.count_per_class;
  ds.records.resize(total);
  for (int i = 0; i < total; ++i) {
    DatasetRecord& rec = ds.records[i];
    unsigned char label = 0;
    rf.read(reinterpret_cast<char*>(&label), 1);
    rf.read(reinterpret_cast<char*>(&rec.energy_dbw), sizeof(rec.energy_dbw));
    rec.tensor.resize(tensor_len);
    rf.read(reinterpret_cast<char*>(rec.tensor.data()),
            static_cast<std::streamsize>(tensor_len * sizeof(float)));
    if (!rf) {
      std::ostringstream os;
      os << "dataset records unreadable at record " << i;
      throw CorruptDataError(os.str());
    }
    if (label > 1) {
      std::ostringstream os;
      os << "dataset record " << i << " has invalid label "
         << static_cast<int>(label);
      throw CorruptDataError(os.str());
    }
    rec.label = label;
  }
  return ds;
}

}  // namespace bisense
