#pragma once

#include <array>
#include <string>
#include <vector>

#include "qtb/quantities.hpp"

namespace qtb {

/// All-pass microring resonance: symmetric Lorentzian transmission dip.
struct Resonance {
  Frequency center;          // nu_0
  Frequency linewidth_fwhm;  // delta nu
  double t_min = 0.0;        // on-resonance transmission minimum, in [0,1)
};

struct RingGeometry {
  double radius_m = 0.0;
  double group_index = 0.0;
};

/// T(nu) = 1 - (1 - T_min) (dnu/2)^2 / ((nu - nu0)^2 + (dnu/2)^2).
double transmission(const Resonance& res, Frequency nu);

/// Q = nu_0 / delta nu.
double q_factor(const Resonance& res);

/// FSR = c / (2 pi R n_g).
Frequency free_spectral_range(const RingGeometry& geom);

struct TracePoint {
  Frequency frequency;
  double transmission = 0.0;
};

struct ResonanceFit {
  Resonance resonance;
  // standard errors for {center_hz, linewidth_hz, t_min}
  std::array<double, 3> std_errors{};
  double residual_rms = 0.0;
  int iterations = 0;
};

/// Least-squares Lorentzian dip fit. Initial guess is derived internally
/// (argmin sample for nu_0, half-depth crossings for the linewidth).
/// Throws DegenerateDataError if the samples do not bracket a dip and
/// FitError (best-so-far parameters attached) on non-convergence.
ResonanceFit fit_resonance(const std::vector<TracePoint>& samples);

/// Reads a transmission trace CSV with header `frequency_hz,transmission`
/// or `wavelength_nm,transmission` (detected by name). `#` starts a comment.
/// Wavelength traces are converted to frequency before fitting.
std::vector<TracePoint> read_transmission_csv(const std::string& path);

}  // namespace qtb
