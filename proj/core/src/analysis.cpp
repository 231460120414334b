#include "qtb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qtb/errors.hpp"
#include "qtb/fitting.hpp"

namespace qtb {

namespace {

double fold_2pi(double phase) {
  phase = std::fmod(phase, 2.0 * std::numbers::pi);
  if (phase < 0) phase += 2.0 * std::numbers::pi;
  return phase;
}

}  // namespace

VisibilityResult fit_fringe(const FringeScan& scan) {
  const std::size_t n = scan.samples.size();
  std::set<double> distinct;
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const FringeSample& s = scan.samples[i];
    if (s.count < 0) throw DomainError("fit_fringe: negative count");
    if (!(s.dwell_s > 0)) throw DomainError("fit_fringe: dwell must be positive");
    distinct.insert(s.phase_rad);
    lo = i == 0 ? s.phase_rad : std::min(lo, s.phase_rad);
    hi = i == 0 ? s.phase_rad : std::max(hi, s.phase_rad);
  }
  if (distinct.size() < 5) throw DegenerateDataError("fit_fringe: need >= 5 distinct phases");
  if (hi - lo < std::numbers::pi - 1e-9) {
    throw DegenerateDataError("fit_fringe: phases must span at least pi");
  }

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rates(n), variances(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FringeSample& s = scan.samples[i];
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(s.phase_rad);
    design(i, 2) = std::sin(s.phase_rad);
    rates[i] = s.count / s.dwell_s;
    variances[i] = std::max(s.count, 1.0) / (s.dwell_s * s.dwell_s);
  }

  Eigen::MatrixXd cov;
  Eigen::VectorXd theta = linear_least_squares_known_errors(design, rates, variances, &cov);
  const double a = theta[0], b = theta[1], c = theta[2];
  if (!(a > 0)) throw DegenerateDataError("fit_fringe: non-positive mean fringe level");

  const double r = std::hypot(b, c);
  VisibilityResult result;
  result.amplitude = a;
  result.visibility = r / a;
  result.phase_offset_rad = fold_2pi(std::atan2(-c, b) - scan.alpha_rad);
  result.unphysical = result.visibility > 1.0;

  if (r > 1e-12 * a) {
    Eigen::Vector3d grad(-result.visibility / a, b / (a * r), c / (a * r));
    result.sigma = std::sqrt(std::max(0.0, (grad.transpose() * cov * grad).value()));
  } else {
    // Zero-contrast fringe: V's gradient in (B, C) is direction-free;
    // quote the quadrature sum of the component errors.
    result.sigma = std::sqrt(std::max(0.0, cov(1, 1) + cov(2, 2))) / a;
  }
  return result;
}

double correlation_coefficient(double n11, double n12, double n21, double n22) {
  for (double v : {n11, n12, n21, n22}) {
    if (v < 0) throw DomainError("correlation_coefficient: negative count");
  }
  const double total = n11 + n12 + n21 + n22;
  if (!(total > 0)) throw DegenerateDataError("correlation_coefficient: zero total counts");
  return (n11 - n12 - n21 + n22) / total;
}

ChshResult chsh_from_visibility(double visibility, double sigma) {
  if (visibility < 0 || visibility > 1.05) {
    throw DomainError("chsh_from_visibility: visibility outside [0, 1.05]");
  }
  if (!(sigma > 0)) throw DomainError("chsh_from_visibility: sigma must be positive");
  ChshResult r;
  r.s = 2.0 * std::numbers::sqrt2 * visibility;
  r.n_sigma_violation = (visibility - 1.0 / std::numbers::sqrt2) / sigma;
  return r;
}

RawVisibilityResult raw_visibility(const std::array<VisibilityResult, 4>& per_port) {
  RawVisibilityResult result;
  bool any_zero_sigma = false;
  for (const VisibilityResult& v : per_port) {
    if (!(v.sigma > 0)) any_zero_sigma = true;
  }
  if (any_zero_sigma) {
    double sum = 0, var = 0;
    for (const VisibilityResult& v : per_port) {
      sum += v.visibility;
      var += v.sigma * v.sigma;
    }
    result.visibility = sum / 4.0;
    result.sigma = std::sqrt(var) / 4.0;
    result.weighted = false;
    return result;
  }
  double wsum = 0, vsum = 0;
  for (const VisibilityResult& v : per_port) {
    const double w = 1.0 / (v.sigma * v.sigma);
    wsum += w;
    vsum += w * v.visibility;
  }
  result.visibility = vsum / wsum;
  result.sigma = 1.0 / std::sqrt(wsum);
  result.weighted = true;
  return result;
}

std::map<std::string, FringeScan> read_fringe_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open fringe scan file");
  std::string line;
  bool header = false;
  bool has_port = false;
  std::map<std::string, FringeScan> scans;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("port,phase_rad", 0) == 0) {
        has_port = true;
      } else if (line.rfind("phase_rad", 0) != 0) {
        throw ConfigError(path, "expected header [port,]phase_rad,count,dwell_s");
      }
      header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string port;
    if (has_port) {
      if (!std::getline(ss, port, ',')) throw ConfigError(path, "malformed fringe row: " + line);
    }
    double phase, count, dwell;
    char c1, c2;
    if (!(ss >> phase >> c1 >> count >> c2 >> dwell)) {
      throw ConfigError(path, "malformed fringe row: " + line);
    }
    FringeScan& scan = scans[port];
    scan.port_pair = port;
    scan.samples.push_back({phase, count, dwell});
  }
  if (scans.empty()) throw ConfigError(path, "no fringe samples found");
  return scans;
}

}  // namespace qtb
