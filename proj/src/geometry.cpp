#include "bisense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bisense/constants.hpp"
#include "bisense/errors.hpp"
#include "bisense/rng.hpp"

namespace bisense {

using nlohmann::json;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// One resolvable leg between a terminal and a scatterer.
struct Leg {
  double length = 0.0;
  Vec2 dir_at_scatterer;  // unit vector from the scatterer toward the leg
  int num_reflections = 0;
};

double orientation(Vec2 a, Vec2 b, Vec2 p) { return cross(b - a, p - a); }

// Proper crossing of segments ab and cd: both endpoints of each segment lie
// strictly on opposite sides of the other.  Any zero orientation (endpoint
// on the other segment's line, collinear overlap) is grazing, not a crossing.
bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orientation(a, b, c);
  const double o2 = orientation(a, b, d);
  const double o3 = orientation(c, d, a);
  const double o4 = orientation(c, d, b);
  return (o1 * o2 < 0.0) && (o3 * o4 < 0.0);
}

// Specular point for a bounce of the leg endpoint->s off wall w, or nullopt
// when the mirror ray misses the wall segment.  The reflection point must be
// a strict interior point of the mirror ray (a bounce exactly at the
// terminal or the scatterer is degenerate) but may sit anywhere on the wall
// segment itself.
std::optional<Vec2> specular_point(Vec2 endpoint, Vec2 s, const Wall& w) {
  const Vec2 img = reflect_point(endpoint, w);
  const Vec2 ab = w.b - w.a;
  const Vec2 ds = s - img;
  const double denom = cross(ab, ds);
  if (denom == 0.0) return std::nullopt;  // ray parallel to the wall
  const Vec2 r = img - w.a;
  const double t = cross(r, ab) / denom;  // along img -> s
  const double u = cross(r, ds) / denom;  // along wall a -> b
  if (!(t > 0.0 && t < 1.0)) return std::nullopt;
  if (!(u >= 0.0 && u <= 1.0)) return std::nullopt;
  return img + ds * t;
}

// Occlusion test that skips one wall.  A bounce sub-segment terminates on
// its mirror wall, so in exact arithmetic it can never properly cross that
// wall; testing against it anyway would let rounding noise in the specular
// point decide the outcome.
bool occluded_excluding(Vec2 a, Vec2 b, std::span<const Wall> walls,
                        const Wall* skip) {
  for (const Wall& w : walls) {
    if (&w == skip) continue;
    if (segments_cross(a, b, w.a, w.b)) return true;
  }
  return false;
}

// All usable legs between a terminal and a scatterer position: the straight
// segment when no wall properly crosses it, plus one leg per wall with a
// valid, unobstructed specular bounce.
std::vector<Leg> build_legs(Vec2 endpoint, Vec2 s,
                            std::span<const Wall> walls) {
  std::vector<Leg> legs;
  const double straight = distance(endpoint, s);
  if (straight <= 0.0) {
    throw DomainError("scatterer coincides with a terminal");
  }
  if (!segment_occluded(endpoint, s, walls)) {
    legs.push_back({straight, normalized(endpoint - s), 0});
  }
  for (const Wall& w : walls) {
    const auto p = specular_point(endpoint, s, w);
    if (!p) continue;
    const double l1 = distance(endpoint, *p);
    const double l2 = distance(*p, s);
    if (l1 <= 0.0 || l2 <= 0.0) continue;
    if (occluded_excluding(endpoint, *p, walls, &w)) continue;
    if (occluded_excluding(*p, s, walls, &w)) continue;
    legs.push_back({l1 + l2, normalized(*p - s), 1});
  }
  return legs;
}

double reflection_amplitude(int bounces) {
  return std::pow(10.0, -kReflectionLossDb * bounces / 20.0);
}

PropagationPath combine_legs(const Deployment& d, const Scatterer& s,
                             const Leg& tx_leg, const Leg& rx_leg,
                             double wavelength) {
  PropagationPath p;
  p.dist_tx_m = tx_leg.length;
  p.dist_rx_m = rx_leg.length;
  p.num_reflections = tx_leg.num_reflections + rx_leg.num_reflections;
  p.source = s.is_target ? SourceKind::target : SourceKind::clutter;
  p.gain_amplitude = d.tx_gain * d.rx_gain * s.rcs_m2 * wavelength *
                     wavelength /
                     (kFourPi * kFourPi * kFourPi * tx_leg.length *
                      tx_leg.length * rx_leg.length * rx_leg.length) *
                     reflection_amplitude(p.num_reflections);
  p.delay_s = (tx_leg.length + rx_leg.length) / kSpeedOfLight;
  // Positive Doppler when the motion shortens the bistatic path sum, i.e.
  // when the velocity points along the outgoing leg directions.
  p.doppler_hz = wavelength > 0.0
                     ? (dot(s.velocity, tx_leg.dir_at_scatterer) +
                        dot(s.velocity, rx_leg.dir_at_scatterer)) /
                           wavelength
                     : 0.0;
  return p;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0)
                              : 0.0;
  return distance(p, a + ab * t);
}

// Scatterers keep the same standoff from walls as from terminals; a
// scatterer flush against its own mirror produces a vanishing bounce leg and
// a diverging bistatic gain.
bool clear_of_scene(Vec2 p, const Deployment& d) {
  if (distance(p, d.tx_pos) < kMinTerminalClearance ||
      distance(p, d.rx_pos) < kMinTerminalClearance) {
    return false;
  }
  for (const Wall& w : d.walls) {
    if (point_segment_distance(p, w.a, w.b) < kMinTerminalClearance) {
      return false;
    }
  }
  return true;
}

Vec2 draw_clear_position(SplitMix64& rng, const Deployment& d) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vec2 p{rng.uniform(0.0, d.room_extent.x),
                 rng.uniform(0.0, d.room_extent.y)};
    if (clear_of_scene(p, d)) return p;
  }
  throw DomainError("could not place a scatterer clear of the terminals");
}

json wall_to_json(const Wall& w) {
  return json{{"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}};
}

Wall wall_from_json(const json& j) {
  if (!j.is_object() || !j.contains("a") || !j.contains("b")) {
    throw ConfigError("wall entries need \"a\" and \"b\" endpoints");
  }
  const auto read_pt = [](const json& v) -> Vec2 {
    if (!v.is_array() || v.size() != 2) {
      throw ConfigError("wall endpoints must be [x, y] pairs");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  };
  Wall w{read_pt(j.at("a")), read_pt(j.at("b"))};
  if (w.a == w.b) throw ConfigError("wall endpoints must be distinct");
  return w;
}

}  // namespace

std::vector<Wall> default_nlos_walls() {
  // x = 4 wall hangs from the top edge, x = 6 wall rises from the bottom;
  // the 3.5 m overlap blocks the (0,0)-(10,10) diagonal for every corridor
  // point while leaving each wall's far face visible from one terminal.
  return {Wall{{4.0, 3.5}, {4.0, 10.0}}, Wall{{6.0, 0.0}, {6.0, 6.5}}};
}

Vec2 reflect_point(Vec2 p, const Wall& w) {
  const Vec2 ab = w.b - w.a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) throw DomainError("wall endpoints coincide");
  const Vec2 v = p - w.a;
  const Vec2 proj = ab * (dot(v, ab) / len2);
  return w.a + proj * 2.0 - v;
}

bool segment_occluded(Vec2 a, Vec2 b, std::span<const Wall> walls) {
  for (const Wall& w : walls) {
    if (segments_cross(a, b, w.a, w.b)) return true;
  }
  return false;
}

PropagationPath direct_path(const Deployment& d, double center_freq_hz) {
  const double dist = distance(d.tx_pos, d.rx_pos);
  if (dist <= 0.0) throw DomainError("tx and rx positions coincide");
  if (!(center_freq_hz > 0.0)) {
    throw DomainError("center frequency must be positive");
  }
  const double wavelength = kSpeedOfLight / center_freq_hz;
  PropagationPath p;
  p.gain_amplitude =
      d.tx_gain * d.rx_gain * wavelength * wavelength / (kFourPi * dist * dist);
  p.delay_s = dist / kSpeedOfLight;
  p.doppler_hz = 0.0;
  p.dist_tx_m = dist;
  p.dist_rx_m = 0.0;
  p.num_reflections = 0;
  p.source = SourceKind::direct;
  return p;
}

PropagationPath scatter_path(const Deployment& d, const Scatterer& s,
                             double center_freq_hz) {
  if (!(center_freq_hz > 0.0)) {
    throw DomainError("center frequency must be positive");
  }
  const double wavelength = kSpeedOfLight / center_freq_hz;
  const double d_tx = distance(d.tx_pos, s.position);
  const double d_rx = distance(d.rx_pos, s.position);
  if (d_tx <= 0.0 || d_rx <= 0.0) {
    throw DomainError("scatterer coincides with a terminal");
  }
  const Leg tx_leg{d_tx, normalized(d.tx_pos - s.position), 0};
  const Leg rx_leg{d_rx, normalized(d.rx_pos - s.position), 0};
  return combine_legs(d, s, tx_leg, rx_leg, wavelength);
}

PathSet enumerate_paths(const Deployment& d, double center_freq_hz) {
  if (!(center_freq_hz > 0.0)) {
    throw DomainError("center frequency must be positive");
  }
  const double wavelength = kSpeedOfLight / center_freq_hz;
  PathSet paths;
  if (!segment_occluded(d.tx_pos, d.rx_pos, d.walls)) {
    paths.push_back(direct_path(d, center_freq_hz));
  }
  const auto add_scatterer = [&](const Scatterer& s) {
    const auto tx_legs = build_legs(d.tx_pos, s.position, d.walls);
    const auto rx_legs = build_legs(d.rx_pos, s.position, d.walls);
    for (const Leg& lt : tx_legs) {
      for (const Leg& lr : rx_legs) {
        paths.push_back(combine_legs(d, s, lt, lr, wavelength));
      }
    }
  };
  for (const Scatterer& s : d.clutter) add_scatterer(s);
  if (d.target) add_scatterer(*d.target);
  for (const PropagationPath& p : paths) {
    if (!std::isfinite(p.gain_amplitude) || !std::isfinite(p.delay_s) ||
        !std::isfinite(p.doppler_hz) || p.delay_s <= 0.0) {
      throw DomainError("degenerate propagation path");
    }
  }
  return paths;
}

void ScenarioSpec::validate() const {
  if (num_clutter < 0) throw ConfigError("num_clutter must be >= 0");
  if (!(clutter_rcs_min_m2 > 0.0) ||
      clutter_rcs_max_m2 < clutter_rcs_min_m2) {
    throw ConfigError("clutter RCS range must satisfy 0 < min <= max");
  }
  if (!(target_rcs_m2 > 0.0)) throw ConfigError("target_rcs must be positive");
  if (target_speed_range) {
    const auto& [lo, hi] = *target_speed_range;
    if (lo < 0.0 || hi < lo) {
      throw ConfigError("target speed range must satisfy 0 <= min <= max");
    }
  }
  if (scenario == ScenarioKind::nlos && walls && walls->empty()) {
    throw ConfigError("NLOS scenario requires at least one wall");
  }
}

std::vector<Wall> ScenarioSpec::effective_walls() const {
  if (walls) return *walls;
  if (scenario == ScenarioKind::nlos) return default_nlos_walls();
  return {};
}

ScenarioSpec ScenarioSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario JSON malformed: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario JSON must be an object");
  static const std::set<std::string> known = {
      "scenario",   "hypothesis",        "num_clutter", "clutter_rcs_range",
      "target_rcs", "target_speed_range", "walls",      "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("scenario JSON has unknown key: " + key);
    }
  }
  if (!j.contains("scenario")) {
    throw ConfigError("scenario JSON missing key: scenario");
  }
  ScenarioSpec s;
  try {
    s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("hypothesis")) {
      s.hypothesis = hypothesis_from_string(j.at("hypothesis").get<std::string>());
    }
    s.num_clutter = j.value("num_clutter", s.num_clutter);
    if (j.contains("clutter_rcs_range")) {
      const auto& r = j.at("clutter_rcs_range");
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("clutter_rcs_range must be [min, max]");
      }
      s.clutter_rcs_min_m2 = r[0].get<double>();
      s.clutter_rcs_max_m2 = r[1].get<double>();
    }
    s.target_rcs_m2 = j.value("target_rcs", s.target_rcs_m2);
    if (j.contains("target_speed_range")) {
      const auto& r = j.at("target_speed_range");
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("target_speed_range must be [min, max]");
      }
      s.target_speed_range = std::make_pair(r[0].get<double>(), r[1].get<double>());
    }
    if (j.contains("walls")) {
      std::vector<Wall> ws;
      for (const auto& wj : j.at("walls")) ws.push_back(wall_from_json(wj));
      s.walls = std::move(ws);
    }
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario JSON has wrong value type: ") +
                      e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ScenarioSpec::to_json_text() const {
  json j;
  j["scenario"] = to_string(scenario);
  j["hypothesis"] = to_string(hypothesis);
  j["num_clutter"] = num_clutter;
  j["clutter_rcs_range"] = {clutter_rcs_min_m2, clutter_rcs_max_m2};
  j["target_rcs"] = target_rcs_m2;
  if (target_speed_range) {
    j["target_speed_range"] = {target_speed_range->first,
                               target_speed_range->second};
  }
  json ws = json::array();
  for (const Wall& w : effective_walls()) ws.push_back(wall_to_json(w));
  j["walls"] = ws;
  j["seed"] = seed;
  return j.dump(2);
}

Deployment sample_deployment(const ScenarioSpec& spec,
                             std::uint64_t record_seed) {
  spec.validate();
  Deployment d;
  d.walls = spec.effective_walls();

  // Static environment: one stream keyed by the scenario seed only, so every
  // record drawn from this spec sees the same clutter.
  SplitMix64 clutter_rng = derive_stream(spec.seed, Stream::kClutter);
  const double log_lo = std::log(spec.clutter_rcs_min_m2);
  const double log_hi = std::log(spec.clutter_rcs_max_m2);
  d.clutter.reserve(spec.num_clutter);
  for (int i = 0; i < spec.num_clutter; ++i) {
    Scatterer s;
    s.position = draw_clear_position(clutter_rng, d);
    s.rcs_m2 = std::exp(clutter_rng.uniform(log_lo, log_hi));
    d.clutter.push_back(s);
  }

  if (spec.hypothesis == Hypothesis::h1) {
    SplitMix64 target_rng = derive_stream(record_seed, Stream::kTarget);
    Scatterer t;
    t.is_target = true;
    t.rcs_m2 = spec.target_rcs_m2;
    if (spec.scenario == ScenarioKind::los) {
      t.position = draw_clear_position(target_rng, d);
    } else {
      // Corridor between the walls, re-drawn until both straight legs are
      // blocked — so every NLOS target really is hidden from both terminals —
      // and a bounce route to each terminal survives: a target with no echo
      // at all is outside the detection problem entirely.
      bool placed = false;
      for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
        const Vec2 p{target_rng.uniform(4.0, 6.0),
                     target_rng.uniform(0.0, 10.0)};
        if (!clear_of_scene(p, d)) continue;
        if (segment_occluded(d.tx_pos, p, d.walls) &&
            segment_occluded(d.rx_pos, p, d.walls) &&
            !build_legs(d.tx_pos, p, d.walls).empty() &&
            !build_legs(d.rx_pos, p, d.walls).empty()) {
          t.position = p;
          placed = true;
        }
      }
      if (!placed) {
        throw DomainError(
            "could not place a doubly-occluded NLOS target; check the wall "
            "layout");
      }
    }
    auto range = spec.target_speed_range.value_or(std::make_pair(0.5, 2.0));
    if (range.second > 0.0) {
      const double speed = target_rng.uniform(range.first, range.second);
      const double heading = target_rng.uniform(0.0, 2.0 * std::numbers::pi);
      t.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
    }
    d.target = t;
  }
  return d;
}

std::string to_string(ScenarioKind k) {
  return k == ScenarioKind::los ? "los" : "nlos";
}

std::string to_string(Hypothesis h) { return h == Hypothesis::h0 ? "h0" : "h1"; }

ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "los") return ScenarioKind::los;
  if (s == "nlos") return ScenarioKind::nlos;
  throw ConfigError("unknown scenario: " + s + " (expected los or nlos)");
}

Hypothesis hypothesis_from_string(const std::string& s) {
  if (s == "h0") return Hypothesis::h0;
  if (s == "h1") return Hypothesis::h1;
  throw ConfigError("unknown hypothesis: " + s + " (expected h0 or h1)");
}

}  // namespace bisense
