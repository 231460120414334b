#include "qtb/pairsource.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "qtb/errors.hpp"
#include "qtb/fitting.hpp"

namespace qtb {

double nonlinear_coefficient(const MaterialWaveguide& mw) {
  if (!(mw.n2_m2_per_w > 0) || !(mw.a_eff_m2 > 0) || !(mw.pump_wavelength.meters > 0)) {
    throw DomainError("nonlinear_coefficient: all material parameters must be positive");
  }
  return 2.0 * std::numbers::pi * mw.n2_m2_per_w / (mw.pump_wavelength.meters * mw.a_eff_m2);
}

double brightness_figure_of_merit(const MaterialWaveguide& mw, double radius_m,
                                  Frequency linewidth) {
  if (!(mw.n2_m2_per_w > 0) || !(mw.a_eff_m2 > 0) || !(radius_m > 0) || !(linewidth.hertz > 0)) {
    throw DomainError("brightness_figure_of_merit: all inputs must be positive");
  }
  const double n2 = mw.n2_m2_per_w;
  const double aeff = mw.a_eff_m2;
  const double dnu = linewidth.hertz;
  return n2 * n2 / (aeff * aeff * radius_m * radius_m * dnu * dnu * dnu);
}

SinglesFit fit_singles(const std::vector<std::pair<double, double>>& data) {
  if (data.size() < 4) throw DegenerateDataError("fit_singles: need at least 4 points");
  std::set<double> powers;
  for (const auto& [p, r] : data) {
    if (r < 0) throw DomainError("fit_singles: negative rate");
    powers.insert(p);
  }
  if (powers.size() < 3) {
    throw DegenerateDataError("fit_singles: need at least 3 distinct powers");
  }

  const int n = static_cast<int>(data.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double p = data[i].first;
    design(i, 0) = p * p;
    design(i, 1) = p;
    design(i, 2) = 1.0;
    y[i] = data[i].second;
  }
  Eigen::MatrixXd cov;
  Eigen::VectorXd theta = linear_least_squares(design, y, &cov);

  SinglesFit fit;
  fit.model = {theta[0], theta[1], theta[2]};
  fit.std_errors = {std::sqrt(std::max(0.0, cov(0, 0))), std::sqrt(std::max(0.0, cov(1, 1))),
                    std::sqrt(std::max(0.0, cov(2, 2)))};
  fit.negative_c_flag = theta[2] < 0;
  return fit;
}

double eval_singles(const SinglesModel& m, Power p) {
  if (p.watts < 0) throw DomainError("eval_singles: negative power");
  const double mw = p.milliwatts();
  return m.a * mw * mw + m.b * mw + m.c;
}

CarResult car(const PairStatistics& stats) {
  if (stats.coincidence_rate_hz < 0 || stats.accidental_rate_hz < 0) {
    throw DomainError("car: rates must be non-negative");
  }
  if (stats.accidental_rate_hz == 0) {
    return {std::numeric_limits<double>::infinity(), false};
  }
  return {stats.coincidence_rate_hz / stats.accidental_rate_hz, true};
}

PgrResult infer_pgr(const SinglesModel& signal, const SinglesModel& idler, Power p,
                    const PairStatistics& stats, std::optional<Frequency> bandwidth) {
  if (!(p.watts > 0)) throw DomainError("infer_pgr: pump power must be positive");
  const double net = stats.coincidence_rate_hz - stats.accidental_rate_hz;
  if (!(net > 0)) {
    throw DegenerateDataError("infer_pgr: coincidences do not exceed accidentals");
  }
  const double pmw = p.milliwatts();
  const double p2 = pmw * pmw;
  PgrResult result;
  result.pair_rate_hz = (signal.a * p2) * (idler.a * p2) / net;
  if (bandwidth.has_value()) {
    result.brightness_per_ghz = result.pair_rate_hz / (p2 * bandwidth->ghz());
  }
  return result;
}

Frequency bandwidth_from_coherence(double tau_s) {
  if (!(tau_s > 0)) throw DomainError("bandwidth_from_coherence: tau must be positive");
  return Frequency::hz(1.0 / (2.0 * std::numbers::pi * tau_s));
}

double coherence_from_bandwidth(Frequency dnu) {
  if (!(dnu.hertz > 0)) throw DomainError("coherence_from_bandwidth: bandwidth must be positive");
  return 1.0 / (2.0 * std::numbers::pi * dnu.hertz);
}

DoubleExponentialFit fit_double_exponential(const Histogram& hist) {
  const std::size_t nbins = hist.counts.size();
  if (nbins < 11) throw DegenerateDataError("fit_double_exponential: too few bins");

  std::size_t i_max = 0;
  for (std::size_t i = 0; i < nbins; ++i) {
    if (hist.counts[i] > hist.counts[i_max]) i_max = i;
  }
  if (i_max < 5 || i_max + 5 >= nbins) {
    throw DegenerateDataError("fit_double_exponential: peak needs >= 5 bins on each flank");
  }

  // Baseline from the outer 10% of bins on each side.
  const std::size_t edge = std::max<std::size_t>(1, nbins / 10);
  double baseline0 = 0.0;
  for (std::size_t i = 0; i < edge; ++i) baseline0 += hist.counts[i] + hist.counts[nbins - 1 - i];
  baseline0 /= 2.0 * edge;
  const double amp0 = static_cast<double>(hist.counts[i_max]) - baseline0;
  if (amp0 < 5.0 * std::sqrt(std::max(baseline0, 1.0))) {
    throw DegenerateDataError("fit_double_exponential: no significant peak above baseline");
  }

  // Half-max width for the initial tau: |t|-exponential FWHM = 2 tau ln 2.
  const double half_level = baseline0 + amp0 / 2.0;
  std::size_t lo = i_max, hi = i_max;
  while (lo > 0 && hist.counts[lo] > half_level) --lo;
  while (hi + 1 < nbins && hist.counts[hi] > half_level) ++hi;
  const double fwhm = std::max(1.0, static_cast<double>(hi - lo)) * hist.bin_width_s;
  const double tau0 = fwhm / (2.0 * std::numbers::ln2);
  const double t00 = hist.bin_center(i_max);

  // Scaled parameters: {tau/tau0, amp/amp0, baseline/amp0, (t0-t00)/tau0}.
  const int n = static_cast<int>(nbins);
  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const double tau = std::abs(p[0]) * tau0;
    const double amp = p[1] * amp0;
    const double base = p[2] * amp0;
    const double t0 = t00 + p[3] * tau0;
    for (int i = 0; i < n; ++i) {
      const double dt = std::abs(hist.bin_center(i) - t0);
      r[i] = amp * std::exp(-dt / std::max(tau, 1e-18)) + base -
             static_cast<double>(hist.counts[i]);
    }
  };

  Eigen::VectorXd params(4);
  params << 1.0, 1.0, baseline0 / amp0, 0.0;
  Eigen::MatrixXd cov;
  FitSummary summary = levenberg_marquardt(residuals, params, n, &cov);
  (void)summary;

  DoubleExponentialFit fit;
  fit.tau_s = std::abs(params[0]) * tau0;
  fit.amplitude = params[1] * amp0;
  fit.baseline = params[2] * amp0;
  fit.center_s = t00 + params[3] * tau0;
  fit.std_errors = {std::sqrt(std::max(0.0, cov(0, 0))) * tau0,
                    std::sqrt(std::max(0.0, cov(1, 1))) * amp0,
                    std::sqrt(std::max(0.0, cov(2, 2))) * amp0,
                    std::sqrt(std::max(0.0, cov(3, 3))) * tau0};
  fit.bandwidth = bandwidth_from_coherence(fit.tau_s);
  return fit;
}

std::vector<std::pair<double, double>> read_power_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open power sweep file");
  std::string line;
  bool header = false;
  std::vector<std::pair<double, double>> data;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("power_mw", 0) != 0) throw ConfigError(path, "expected power_mw,counts,dwell_s header");
      header = true;
      continue;
    }
    std::istringstream ss(line);
    double p, counts, dwell;
    char c1, c2;
    if (!(ss >> p >> c1 >> counts >> c2 >> dwell) || dwell <= 0) {
      throw ConfigError(path, "malformed power sweep row: " + line);
    }
    data.emplace_back(p, counts / dwell);
  }
  return data;
}

}  // namespace qtb
