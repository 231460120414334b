#include "qtb/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qtb/errors.hpp"
#include "qtb/fitting.hpp"

namespace qtb {

double transmission(const Resonance& res, Frequency nu) {
  const double half = res.linewidth_fwhm.hertz / 2.0;
  const double detuning = nu.hertz - res.center.hertz;
  return 1.0 - (1.0 - res.t_min) * half * half / (detuning * detuning + half * half);
}

double q_factor(const Resonance& res) { return res.center.hertz / res.linewidth_fwhm.hertz; }

Frequency free_spectral_range(const RingGeometry& geom) {
  if (!(geom.radius_m > 0) || !(geom.group_index > 0)) {
    throw DomainError("ring geometry must have positive radius and group index");
  }
  return Frequency::hz(kSpeedOfLight / (2.0 * std::numbers::pi * geom.radius_m * geom.group_index));
}

ResonanceFit fit_resonance(const std::vector<TracePoint>& samples) {
  if (samples.size() < 8) {
    throw DegenerateDataError("fit_resonance: need at least 8 samples");
  }
  std::vector<TracePoint> pts = samples;
  std::sort(pts.begin(), pts.end(),
            [](const TracePoint& a, const TracePoint& b) { return a.frequency.hertz < b.frequency.hertz; });

  std::size_t i_min = 0;
  double t_max = pts[0].transmission;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].transmission < pts[i_min].transmission) i_min = i;
    t_max = std::max(t_max, pts[i].transmission);
  }
  const double t_min0 = pts[i_min].transmission;
  if (i_min == 0 || i_min + 1 == pts.size() || t_max - t_min0 < 0.05) {
    throw DegenerateDataError("fit_resonance: samples do not bracket a dip");
  }

  // Half-depth crossings for the linewidth guess.
  const double half_level = (t_max + t_min0) / 2.0;
  double lo = pts.front().frequency.hertz, hi = pts.back().frequency.hertz;
  for (std::size_t i = i_min; i-- > 0;) {
    if (pts[i].transmission >= half_level) {
      lo = pts[i].frequency.hertz;
      break;
    }
  }
  for (std::size_t i = i_min + 1; i < pts.size(); ++i) {
    if (pts[i].transmission >= half_level) {
      hi = pts[i].frequency.hertz;
      break;
    }
  }
  const double nu0_guess = pts[i_min].frequency.hertz;
  const double dnu_guess = std::max(hi - lo, 1e-9 * nu0_guess + 1.0);

  // Fit in scaled variables: detuning and linewidth in units of the guess,
  // which keeps the Jacobian well conditioned at optical frequencies.
  const int n = static_cast<int>(pts.size());
  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    Resonance res{Frequency::hz(nu0_guess + p[0] * dnu_guess), Frequency::hz(p[1] * dnu_guess),
                  p[2]};
    for (int i = 0; i < n; ++i) {
      r[i] = transmission(res, pts[i].frequency) - pts[i].transmission;
    }
  };

  Eigen::VectorXd params(3);
  params << 0.0, 1.0, std::max(0.0, t_min0);
  Eigen::MatrixXd cov;
  FitSummary summary;
  try {
    summary = levenberg_marquardt(residuals, params, n, &cov);
  } catch (const FitError& e) {
    // Rescale best-so-far parameters to physical units before rethrowing.
    const auto& b = e.best_params();
    throw FitError(e.what(), {nu0_guess + b[0] * dnu_guess, b[1] * dnu_guess, b[2]});
  }

  ResonanceFit fit;
  fit.resonance = Resonance{Frequency::hz(nu0_guess + params[0] * dnu_guess),
                            Frequency::hz(std::abs(params[1]) * dnu_guess), params[2]};
  fit.std_errors = {std::sqrt(std::max(0.0, cov(0, 0))) * dnu_guess,
                    std::sqrt(std::max(0.0, cov(1, 1))) * dnu_guess,
                    std::sqrt(std::max(0.0, cov(2, 2)))};
  fit.residual_rms = summary.residual_rms;
  fit.iterations = summary.iterations;
  return fit;
}

std::vector<TracePoint> read_transmission_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open transmission trace");

  std::string line;
  bool header_seen = false;
  bool wavelength_axis = false;
  std::vector<TracePoint> pts;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("frequency_hz", 0) == 0) {
        wavelength_axis = false;
      } else if (line.rfind("wavelength_nm", 0) == 0) {
        wavelength_axis = true;
      } else {
        throw ConfigError(path, "expected header frequency_hz,... or wavelength_nm,...");
      }
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    double x, t;
    char comma;
    if (!(ss >> x >> comma >> t)) throw ConfigError(path, "malformed trace row: " + line);
    Frequency nu = wavelength_axis ? wavelength_to_frequency(Wavelength::nm(x)) : Frequency::hz(x);
    pts.push_back({nu, t});
  }
  return pts;
}

}  // namespace qtb
