#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qtb/histogram.hpp"
#include "qtb/quantities.hpp"

namespace qtb {

/// Kerr waveguide material parameters of the pair source.
struct MaterialWaveguide {
  double n2_m2_per_w = 0.0;       // nonlinear refractive index
  double a_eff_m2 = 0.0;          // effective mode area
  Wavelength pump_wavelength{};
};

/// Singles-rate power law R(P) = a P^2 + b P + c, with P in mW.
/// a: SFWM quadratic coefficient [1/(s mW^2)], b: linear noise [1/(s mW)],
/// c: dark counts [1/s].
struct SinglesModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct SinglesFit {
  SinglesModel model;
  std::array<double, 3> std_errors{};
  bool negative_c_flag = false;  // fitted c < 0 is reported, not clamped
};

/// Measured two-fold statistics within one coincidence window.
struct PairStatistics {
  double coincidence_rate_hz = 0.0;  // N_cc
  double accidental_rate_hz = 0.0;   // N_acc
  double window_s = 0.0;
};

struct CarResult {
  double value = 0.0;
  bool finite = true;  // false when accidentals are zero (+inf sentinel)
};

struct PgrResult {
  double pair_rate_hz = 0.0;
  // PGR / (P^2 * bandwidth), reported when a bandwidth is supplied.
  std::optional<double> brightness_per_ghz = std::nullopt;
};

struct DoubleExponentialFit {
  double tau_s = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double center_s = 0.0;
  std::array<double, 4> std_errors{};  // {tau, amplitude, baseline, center}
  Frequency bandwidth{};               // 1/(2 pi tau)
};

/// gamma = 2 pi n2 / (lambda_p A_eff).
double nonlinear_coefficient(const MaterialWaveguide& mw);

/// Relative pair-rate figure of merit n2^2 / (A_eff^2 R^2 dnu^3).
/// A proportionality, not an absolute rate.
double brightness_figure_of_merit(const MaterialWaveguide& mw, double radius_m,
                                  Frequency linewidth);

/// Exact linear least squares of rate on {P^2, P, 1}.
/// Throws DegenerateDataError with fewer than 3 distinct powers.
SinglesFit fit_singles(const std::vector<std::pair<double, double>>& power_mw_rate_hz);

double eval_singles(const SinglesModel& m, Power p);

/// CAR = N_cc / N_acc. Zero accidentals yield {+inf, finite=false}.
CarResult car(const PairStatistics& stats);

/// PGR = a_s P^2 a_i P^2 / (N_cc - N_acc). Throws DegenerateDataError when
/// N_cc <= N_acc (no signal above accidentals).
PgrResult infer_pgr(const SinglesModel& signal, const SinglesModel& idler, Power p,
                    const PairStatistics& stats,
                    std::optional<Frequency> bandwidth = std::nullopt);

/// Lorentzian pair: dnu = 1/(2 pi tau) and tau = 1/(2 pi dnu).
Frequency bandwidth_from_coherence(double tau_s);
double coherence_from_bandwidth(Frequency dnu);

/// Fits A exp(-|t - t0|/tau) + B to a delay histogram.
/// Throws DegenerateDataError when no dominant peak is present and FitError
/// on non-convergence.
DoubleExponentialFit fit_double_exponential(const Histogram& hist);

/// Reads a power-sweep CSV `power_mw,counts,dwell_s`; rates = counts/dwell.
std::vector<std::pair<double, double>> read_power_sweep_csv(const std::string& path);

}  // namespace qtb
