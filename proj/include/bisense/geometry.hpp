#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bisense/vec2.hpp"

namespace bisense {

// Amplitude hit per reflection, applied once per bounce on top of the
// free-space spreading terms.
inline constexpr double kReflectionLossDb = 3.0;

// Scatterers closer than this to either terminal are re-drawn: the inverse
// square-distance gain diverges and the 2-D geometry degenerates.
inline constexpr double kMinTerminalClearance = 0.5;

struct Scatterer {
  Vec2 position;
  Vec2 velocity;       // m/s; zero for clutter and stationary targets
  double rcs_m2 = 1.0;
  bool is_target = false;
};

// Thin specular reflector, stored as a segment between its two endpoints.
struct Wall {
  Vec2 a;
  Vec2 b;
};

// A sampled scene: terminals in opposite corners of a 10 m x 10 m room,
// static clutter, optional walls, and (under H1 only) one passive target.
struct Deployment {
  Vec2 room_extent{10.0, 10.0};
  Vec2 tx_pos{0.0, 0.0};
  Vec2 rx_pos{10.0, 10.0};
  double tx_gain = 1.0;  // linear antenna gains
  double rx_gain = 1.0;
  std::vector<Scatterer> clutter;
  std::optional<Scatterer> target;
  std::vector<Wall> walls;
};

enum class SourceKind { direct, clutter, target };

// One resolvable propagation path tx -> (scatterer) -> rx.
struct PropagationPath {
  double gain_amplitude = 0.0;  // linear amplitude applied to symbols
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  double dist_tx_m = 0.0;       // tx-side leg length (whole path for direct)
  double dist_rx_m = 0.0;       // rx-side leg length (0 for direct)
  int num_reflections = 0;
  SourceKind source = SourceKind::direct;
};

using PathSet = std::vector<PropagationPath>;

enum class ScenarioKind { los, nlos };
enum class Hypothesis { h0, h1 };

// Declarative scene description; sample_deployment turns it into a concrete
// Deployment.  `seed` drives the clutter draw only, so every record sampled
// from the same spec shares one static environment while per-record streams
// move the target around.
struct ScenarioSpec {
  ScenarioKind scenario = ScenarioKind::los;
  Hypothesis hypothesis = Hypothesis::h1;
  int num_clutter = 8;
  double clutter_rcs_min_m2 = 1.0;
  double clutter_rcs_max_m2 = 20.0;
  double target_rcs_m2 = 1.0;
  // Drawn target speed range; nullopt resolves to [0.5, 2] m/s for moving
  // use cases and [0, 0] for stationary ones.
  std::optional<std::pair<double, double>> target_speed_range;
  // nullopt -> scenario default (none for LOS, the standard two-wall blind
  // corridor for NLOS).  An explicit empty list under NLOS is rejected.
  std::optional<std::vector<Wall>> walls;
  std::uint64_t seed = 0;

  void validate() const;
  // Walls after applying scenario defaults.
  std::vector<Wall> effective_walls() const;

  static ScenarioSpec from_json_text(const std::string& text);
  static ScenarioSpec from_json_file(const std::string& path);
  std::string to_json_text() const;
};

// The standard NLOS obstruction: two staggered walls flanking a corridor
// between the terminals.  Their spans overlap in y so the corner-to-corner
// direct ray is always blocked, while each terminal can still illuminate the
// corridor via a single specular bounce off the far wall face.
std::vector<Wall> default_nlos_walls();

// Mirror image of p across the infinite line through the wall segment.
Vec2 reflect_point(Vec2 p, const Wall& w);

// True when segment a-b properly crosses any wall segment.  Grazing contact
// (an endpoint exactly on a wall, or collinear overlap) does not occlude.
bool segment_occluded(Vec2 a, Vec2 b, std::span<const Wall> walls);

// Unobstructed tx -> rx leakage path.
PropagationPath direct_path(const Deployment& d, double center_freq_hz);

// Two straight legs tx -> s -> rx, ignoring walls.
PropagationPath scatter_path(const Deployment& d, const Scatterer& s,
                             double center_freq_hz);

// Every resolvable path in the scene: the direct path when unobstructed plus,
// for each scatterer, all combinations of valid tx- and rx-side legs (the
// straight leg when unobstructed plus each single-bounce leg whose specular
// point falls inside its wall and whose sub-segments are clear).  Paths are
// emitted in a fixed order: direct, then clutter in deployment order, then
// the target, legs ordered straight-then-walls with the tx side as the major
// index.
PathSet enumerate_paths(const Deployment& d, double center_freq_hz);

// Draw a concrete deployment.  Clutter comes from a stream of spec.seed;
// target position/velocity from a stream of record_seed, so identical
// arguments always reproduce the identical scene.  All scatterers keep a
// 0.5 m standoff from the terminals and from every wall.  NLOS targets are
// redrawn inside the corridor until both straight sight lines are occluded
// and a one-bounce route to each terminal exists.
Deployment sample_deployment(const ScenarioSpec& spec,
                             std::uint64_t record_seed);

std::string to_string(ScenarioKind k);
std::string to_string(Hypothesis h);
ScenarioKind scenario_from_string(const std::string& s);
Hypothesis hypothesis_from_string(const std::string& s);

}  // namespace bisense
