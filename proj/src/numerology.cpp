#include "bisense/numerology.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bisense/constants.hpp"
#include "bisense/errors.hpp"
#include "bisense/rng.hpp"

namespace bisense {

using nlohmann::json;

void WaveformConfig::validate() const {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
  if (!(center_freq_hz > 0.0)) {
    throw ConfigError("center_freq_hz must be positive");
  }
  if (num_subcarriers <= 0) {
    throw ConfigError("num_subcarriers must be positive");
  }
  if (!(subcarrier_spacing_hz > 0.0)) {
    throw ConfigError("subcarrier_spacing_hz must be positive");
  }
  if (!(sensing_fraction > 0.0) || sensing_fraction > 1.0) {
    throw ConfigError("sensing_fraction must lie in (0, 1]");
  }
  if (num_sensing_symbols <= 0) {
    throw ConfigError("num_sensing_symbols must be positive");
  }
  const double product = num_subcarriers * subcarrier_spacing_hz;
  if (std::abs(product - bandwidth_hz) > 1e-6 * bandwidth_hz) {
    std::ostringstream os;
    os << "bandwidth_hz (" << bandwidth_hz
       << ") must equal num_subcarriers * subcarrier_spacing_hz (" << product
       << ") within 1 ppm";
    throw ConfigError(os.str());
  }
}

WaveformConfig WaveformConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("waveform JSON malformed: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("waveform JSON must be an object");

  static const std::set<std::string> known = {
      "bandwidth_hz",      "center_freq_hz",    "num_subcarriers",
      "subcarrier_spacing_hz", "sensing_fraction", "num_sensing_symbols",
      "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("waveform JSON has unknown key: " + key);
    }
  }
  for (const auto& key : known) {
    if (key != "seed" && !j.contains(key)) {
      throw ConfigError("waveform JSON missing key: " + key);
    }
  }

  WaveformConfig cfg;
  try {
    cfg.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    cfg.center_freq_hz = j.at("center_freq_hz").get<double>();
    cfg.num_subcarriers = j.at("num_subcarriers").get<int>();
    cfg.subcarrier_spacing_hz = j.at("subcarrier_spacing_hz").get<double>();
    cfg.sensing_fraction = j.at("sensing_fraction").get<double>();
    cfg.num_sensing_symbols = j.at("num_sensing_symbols").get<int>();
    cfg.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("waveform JSON has wrong value type: ") +
                      e.what());
  }
  cfg.validate();
  return cfg;
}

WaveformConfig WaveformConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open waveform config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string WaveformConfig::to_json_text() const {
  json j;
  j["bandwidth_hz"] = bandwidth_hz;
  j["center_freq_hz"] = center_freq_hz;
  j["num_subcarriers"] = num_subcarriers;
  j["subcarrier_spacing_hz"] = subcarrier_spacing_hz;
  j["sensing_fraction"] = sensing_fraction;
  j["num_sensing_symbols"] = num_sensing_symbols;
  j["seed"] = seed;
  return j.dump(2);
}

WaveformConfig WaveformConfig::full_profile() {
  WaveformConfig cfg;
  cfg.bandwidth_hz = 500e6;
  cfg.center_freq_hz = 28e9;
  cfg.num_subcarriers = 1024;
  cfg.subcarrier_spacing_hz = 500e6 / 1024;  // 488.28125 kHz
  cfg.sensing_fraction = 0.1;
  cfg.num_sensing_symbols = 1024;
  cfg.seed = 0;
  cfg.validate();
  return cfg;
}

WaveformConfig WaveformConfig::desk_profile() {
  WaveformConfig cfg;
  cfg.bandwidth_hz = 256 * 1.92e6;  // 491.52 MHz
  cfg.center_freq_hz = 28e9;
  cfg.num_subcarriers = 256;
  cfg.subcarrier_spacing_hz = 1.92e6;
  cfg.sensing_fraction = 0.003125;  // sensing-symbol period 1/6 ms
  cfg.num_sensing_symbols = 128;
  cfg.seed = 0;
  cfg.validate();
  return cfg;
}

DerivedParams derive_params(const WaveformConfig& cfg) {
  cfg.validate();
  const double c = kNominalSpeedOfLight;
  DerivedParams p;
  p.symbol_duration_s = 1.0 / cfg.subcarrier_spacing_hz;
  p.sensing_spacing_s = p.symbol_duration_s / cfg.sensing_fraction;
  p.cpi_s = cfg.num_sensing_symbols * p.sensing_spacing_s;
  p.range_resolution_m = c / cfg.bandwidth_hz;
  p.velocity_resolution_mps = c / (p.cpi_s * cfg.center_freq_hz);
  p.wavelength_m = c / cfg.center_freq_hz;
  p.max_unambiguous_delay_s = 1.0 / cfg.subcarrier_spacing_hz;
  p.max_unambiguous_doppler_hz = 0.5 / p.sensing_spacing_s;
  p.speed_of_light = c;
  return p;
}

SymbolGrid generate_sensing_grid(const WaveformConfig& cfg,
                                 std::uint64_t seed) {
  cfg.validate();
  SymbolGrid g(cfg.num_subcarriers, cfg.num_sensing_symbols);
  SplitMix64 rng = derive_stream(seed, Stream::kSensingGrid);
  const double a = std::numbers::sqrt2 / 2.0;  // 1/sqrt(2)
  for (int k = 0; k < g.rows(); ++k) {
    for (int n = 0; n < g.cols(); ++n) {
      const std::uint64_t bits = rng.next();
      const double re = (bits & 1) ? a : -a;
      const double im = (bits & 2) ? a : -a;
      g(k, n) = {re, im};
    }
  }
  return g;
}

}  // namespace bisense
