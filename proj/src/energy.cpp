#include "bisense/energy.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bisense/errors.hpp"

namespace bisense {

using nlohmann::json;

double energy_statistic(const SymbolGrid& received) {
  double total = 0.0;
  const std::complex<double>* d = received.data();
  for (std::size_t i = 0; i < received.size(); ++i) total += std::norm(d[i]);
  if (!(total > 0.0)) {
    throw DomainError("energy statistic undefined for an all-zero grid");
  }
  return 10.0 * std::log10(total);
}

namespace {

struct Moments {
  double mu = 0.0;
  double sigma = 0.0;
  int count = 0;
};

Moments class_moments(std::span<const double> e, std::span<const int> labels,
                      int cls) {
  Moments m;
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (labels[i] == cls) {
      sum += e[i];
      ++m.count;
    }
  }
  if (m.count < 2) return m;
  m.mu = sum / m.count;
  double ss = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (labels[i] == cls) {
      const double d = e[i] - m.mu;
      ss += d * d;
    }
  }
  m.sigma = std::sqrt(ss / m.count);
  return m;
}

double log_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace

EnergyDetector fit_energy_threshold(std::span<const double> energies_dbw,
                                    std::span<const int> labels) {
  if (energies_dbw.size() != labels.size()) {
    throw ShapeError("energies and labels differ in length");
  }
  const Moments m0 = class_moments(energies_dbw, labels, 0);
  const Moments m1 = class_moments(energies_dbw, labels, 1);
  if (m0.count < 2 || m1.count < 2) {
    throw DomainError("threshold fit needs at least two samples per class");
  }
  if (!(m0.sigma > 0.0) || !(m1.sigma > 0.0)) {
    throw DomainError("threshold fit needs nonzero spread in both classes");
  }

  EnergyDetector det;
  det.mu0 = m0.mu;
  det.sigma0 = m0.sigma;
  det.mu1 = m1.mu;
  det.sigma1 = m1.sigma;

  const double lo = std::min(det.mu0, det.mu1);
  const double hi = std::max(det.mu0, det.mu1);
  const double rel = std::abs(det.sigma0 - det.sigma1) /
                     std::max(det.sigma0, det.sigma1);
  if (rel < 1e-12) {
    det.threshold_dbw = 0.5 * (det.mu0 + det.mu1);
    return det;
  }

  // Equal-likelihood points solve A e^2 + B e + C = 0.
  const double s0 = det.sigma0 * det.sigma0;
  const double s1 = det.sigma1 * det.sigma1;
  const double a = 0.5 / s1 - 0.5 / s0;
  const double b = det.mu0 / s0 - det.mu1 / s1;
  const double c = 0.5 * det.mu1 * det.mu1 / s1 - 0.5 * det.mu0 * det.mu0 / s0 +
                   std::log(det.sigma1 / det.sigma0);
  const double disc = b * b - 4.0 * a * c;
  if (!(disc >= 0.0)) {
    det.threshold_dbw = 0.5 * (det.mu0 + det.mu1);
    return det;
  }
  const double r = std::sqrt(disc);
  const double e1 = (-b + r) / (2.0 * a);
  const double e2 = (-b - r) / (2.0 * a);
  const bool in1 = e1 >= lo && e1 <= hi;
  const bool in2 = e2 >= lo && e2 <= hi;
  if (in1 && !in2) {
    det.threshold_dbw = e1;
  } else if (in2 && !in1) {
    det.threshold_dbw = e2;
  } else if (in1 && in2) {
    // Ambiguous double crossing inside the gap; take the one nearer the
    // midpoint.
    const double mid = 0.5 * (lo + hi);
    det.threshold_dbw = std::abs(e1 - mid) < std::abs(e2 - mid) ? e1 : e2;
  } else {
    det.threshold_dbw = 0.5 * (lo + hi);
  }
  return det;
}

Prediction classify_energy(const EnergyDetector& det, double energy_dbw) {
  if (!std::isfinite(energy_dbw)) {
    throw DomainError("energy must be finite");
  }
  const double l0 = log_density(energy_dbw, det.mu0, det.sigma0);
  const double l1 = log_density(energy_dbw, det.mu1, det.sigma1);
  Prediction p;
  p.prob_h1 = 1.0 / (1.0 + std::exp(l0 - l1));
  p.decision = l1 >= l0 ? 1 : 0;  // ties resolve to target-present
  return p;
}

double closed_form_accuracy(const EnergyDetector& det) {
  const double pfa = q_function((det.threshold_dbw - det.mu0) / det.sigma0);
  const double pmd = q_function((det.mu1 - det.threshold_dbw) / det.sigma1);
  return 1.0 - 0.5 * (pfa + pmd);
}

std::string EnergyDetector::to_json_text() const {
  json j;
  j["schema_version"] = 1;
  j["mu0_dbw"] = mu0;
  j["sigma0_db"] = sigma0;
  j["mu1_dbw"] = mu1;
  j["sigma1_db"] = sigma1;
  j["threshold_dbw"] = threshold_dbw;
  return j.dump(2);
}

EnergyDetector EnergyDetector::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorruptDataError(std::string("energy detector JSON malformed: ") +
                           e.what());
  }
  if (j.value("schema_version", 0) != 1) {
    throw VersionError("unsupported energy detector schema version");
  }
  EnergyDetector det;
  try {
    det.mu0 = j.at("mu0_dbw").get<double>();
    det.sigma0 = j.at("sigma0_db").get<double>();
    det.mu1 = j.at("mu1_dbw").get<double>();
    det.sigma1 = j.at("sigma1_db").get<double>();
    det.threshold_dbw = j.at("threshold_dbw").get<double>();
  } catch (const json::exception& e) {
    throw CorruptDataError(std::string("energy detector JSON incomplete: ") +
                           e.what());
  }
  return det;
}

void EnergyDetector::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write energy detector: " + path);
  out << to_json_text() << "\n";
}

EnergyDetector EnergyDetector::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open energy detector: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

}  // namespace bisense
