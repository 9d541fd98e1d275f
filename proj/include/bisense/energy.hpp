#pragma once

#include <span>
#include <string>

#include "bisense/grid.hpp"

namespace bisense {

// Soft detector output; decision is the hard label (1 = target present).
struct Prediction {
  double prob_h1 = 0.5;
  int decision = 0;
};

// Total received energy over the sensing burst, in dB re 1 W:
//   e = 10 log10( sum |R[k][n]|^2 ).
// Throws DomainError on an all-zero grid (the statistic would be -inf).
double energy_statistic(const SymbolGrid& received);

// Two-Gaussian model of the energy statistic under each hypothesis, with the
// decision threshold at the likelihood crossover between the class means.
struct EnergyDetector {
  double mu0 = 0.0;     // H0 mean, dBW
  double sigma0 = 0.0;
  double mu1 = 0.0;     // H1 mean, dBW
  double sigma1 = 0.0;
  double threshold_dbw = 0.0;

  std::string to_json_text() const;
  static EnergyDetector from_json_text(const std::string& text);
  void save(const std::string& path) const;
  static EnergyDetector load(const std::string& path);
};

// Maximum-likelihood fit (per-class mean and population standard deviation)
// of labelled energies, then the equal-likelihood threshold: the midpoint of
// the means when the deviations match, otherwise the root of the two-Gaussian
// log-likelihood equality that lies between the means.  Throws DomainError
// unless both classes contribute at least two samples with nonzero spread.
EnergyDetector fit_energy_threshold(std::span<const double> energies_dbw,
                                    std::span<const int> labels);

// Density comparison under the fitted model; prob_h1 uses equal priors and
// ties break toward H1.
Prediction classify_energy(const EnergyDetector& det, double energy_dbw);

// Expected accuracy of threshold `det.threshold_dbw` under the fitted
// Gaussians with equal priors:  1 - (Q((eta-mu0)/s0) + Q((mu1-eta)/s1)) / 2.
double closed_form_accuracy(const EnergyDetector& det);

}  // namespace bisense
