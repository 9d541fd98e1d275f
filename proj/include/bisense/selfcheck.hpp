#pragma once

#include <string>
#include <vector>

#include "bisense/grid.hpp"

namespace bisense {

// Independent reference implementations used to validate the fast pipeline.
// Everything here is written the slow, obvious way on purpose: plain
// double-sum DFTs and textbook closed forms, no shared code with the
// production transforms.

// Brute-force delay-Doppler map of a deconvolved grid G (M x N): unscaled
// forward DFT over the symbol axis, 1/M inverse DFT over the subcarrier
// axis, |.|^2, Doppler axis rotated so zero sits at column N/2.
RMat reference_ddp(const CMat& g);

// Brute-force per-symbol delay response power, averaged over symbols.
std::vector<double> reference_pdp(const CMat& g);

// One self-contained pipeline check, e.g. "delay-Doppler transform matches
// brute force".  value is the measured figure, limit the bound it must stay
// within (interpreted by `pass`).
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

// The full battery: transform-vs-oracle errors, conservation identities,
// detector closed forms, gradient checks, generator statistics.  Runs in a
// few seconds; every check is deterministic.
std::vector<CheckResult> run_selfchecks();

}  // namespace bisense
