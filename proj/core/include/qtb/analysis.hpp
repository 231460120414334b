#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace qtb {

struct FringeSample {
  double phase_rad = 0.0;  // scanned analyzer phase (beta)
  double count = 0.0;
  double dwell_s = 1.0;
};

/// Triple-coincidence fringe scan for one port pair, fixing alpha and
/// scanning beta.
struct FringeScan {
  std::string port_pair;  // "A1B1", "A1B2", "A2B1" or "A2B2"
  double alpha_rad = 0.0;
  std::vector<FringeSample> samples;
};

struct VisibilityResult {
  double visibility = 0.0;
  double sigma = 0.0;              // 1-sigma error from Poisson propagation
  double amplitude = 0.0;          // mean fringe level A (rate units)
  double phase_offset_rad = 0.0;   // fitted fringe phase minus alpha, in [0, 2pi)
  bool unphysical = false;         // V > 1 is flagged but still returned
};

struct ChshResult {
  double s = 0.0;
  double n_sigma_violation = 0.0;
};

struct RawVisibilityResult {
  double visibility = 0.0;
  double sigma = 0.0;
  bool weighted = true;  // false when a zero sigma forced an unweighted mean
};

/// Linear least squares of count rate on {1, cos(beta), sin(beta)}:
/// rate = A + B cos + C sin, V = sqrt(B^2+C^2)/A. Errors propagate from
/// Poisson count variances. Throws DegenerateDataError on a rank-deficient
/// phase set or non-positive fitted mean level.
VisibilityResult fit_fringe(const FringeScan& scan);

/// E = (n11 - n12 - n21 + n22) / total. Throws DegenerateDataError on zero
/// total.
double correlation_coefficient(double n11, double n12, double n21, double n22);

/// S = 2 sqrt(2) V; violation significance (V - 1/sqrt(2)) / sigma.
ChshResult chsh_from_visibility(double visibility, double sigma);

/// Inverse-variance weighted mean of the four port-pair visibilities.
RawVisibilityResult raw_visibility(const std::array<VisibilityResult, 4>& per_port);

/// Fringe-scan CSV: `phase_rad,count,dwell_s`, or with a leading `port`
/// column holding the port-pair label. Returns scans keyed by port pair
/// (single unlabeled file maps to key "").
std::map<std::string, FringeScan> read_fringe_csv(const std::string& path);

}  // namespace qtb
