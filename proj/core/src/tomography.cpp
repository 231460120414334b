#include "qtb/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include <json.hpp>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

using Complex = std::complex<double>;

constexpr double kProbFloor = 1e-15;

Eigen::Matrix4cd hermitize(const Eigen::Matrix4cd& m) { return 0.5 * (m + m.adjoint()); }

/// Real basis of 4x4 Hermitian matrices: 4 diagonal units, then for each
/// pair i<j the symmetric and antisymmetric (times i) off-diagonal units.
Eigen::Matrix4cd hermitian_basis(int m) {
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  if (m < 4) {
    h(m, m) = 1.0;
    return h;
  }
  static constexpr int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  const int p = (m - 4) / 2;
  const int i = kPairs[p][0], j = kPairs[p][1];
  if ((m - 4) % 2 == 0) {
    h(i, j) = 1.0;
    h(j, i) = 1.0;
  } else {
    h(i, j) = Complex(0.0, -1.0);
    h(j, i) = Complex(0.0, 1.0);
  }
  return h;
}

struct NormalizedData {
  std::array<Eigen::Matrix4cd, 16> projectors;
  std::array<double, 16> counts{};
  std::array<double, 16> dwells{};
  double intensity_rate = 0.0;  // rate of the computational quartet
};

int setting_index(const Setting& s) {
  return 4 * static_cast<int>(s.signal) + static_cast<int>(s.idler);
}

NormalizedData normalize_records(const std::vector<MeasurementRecord>& records) {
  NormalizedData data;
  std::array<bool, 16> seen{};
  for (const MeasurementRecord& r : records) {
    if (r.count < 0) throw DomainError("tomography: negative count");
    if (!(r.dwell_s > 0)) throw DomainError("tomography: dwell must be positive");
    const int k = setting_index(r.setting);
    if (seen[k]) throw DomainError("tomography: duplicate setting " + setting_label(r.setting));
    seen[k] = true;
    data.counts[k] = r.count;
    data.dwells[k] = r.dwell_s;
  }
  for (int k = 0; k < 16; ++k) {
    if (!seen[k]) {
      throw DegenerateDataError("tomography: missing setting " +
                                setting_label(all_settings()[static_cast<std::size_t>(k)]));
    }
    const Setting s = all_settings()[static_cast<std::size_t>(k)];
    data.projectors[k] = projector(s.signal, s.idler);
  }
  // The {ee, el, le, ll} quartet partitions unity, so its summed rate fixes
  // the intensity scale for every other setting.
  for (int k : {0, 1, 4, 5}) data.intensity_rate += data.counts[k] / data.dwells[k];
  if (!(data.intensity_rate > 0)) {
    throw DegenerateDataError("tomography: zero counts in the computational basis");
  }
  return data;
}

Eigen::Matrix4cd rho_from_t_params(const Eigen::VectorXd& p) {
  Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) t(i, i) = p[i];
  static constexpr int kPairs[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
  for (int q = 0; q < 6; ++q) {
    t(kPairs[q][0], kPairs[q][1]) = Complex(p[4 + 2 * q], p[5 + 2 * q]);
  }
  Eigen::Matrix4cd m = t.adjoint() * t;
  const double tr = m.trace().real();
  if (!(tr > 1e-300)) return Eigen::Matrix4cd::Identity() / 4.0;
  return m / tr;
}

/// Lower-triangular T with T^dagger T = rho, for PSD rho. Obtained from the
/// Cholesky factor of the index-reversed matrix.
Eigen::VectorXd t_params_from_rho(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd rev = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) rev(i, 3 - i) = 1.0;
  Eigen::LLT<Eigen::Matrix4cd> llt(rev * rho * rev);
  Eigen::Matrix4cd t;
  if (llt.info() == Eigen::Success) {
    t = (rev * Eigen::Matrix4cd(llt.matrixL()) * rev).adjoint();
  } else {
    t = Eigen::Matrix4cd::Identity() / 2.0;
  }
  Eigen::VectorXd p(16);
  for (int i = 0; i < 4; ++i) p[i] = t(i, i).real();
  static constexpr int kPairs[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
  for (int q = 0; q < 6; ++q) {
    p[4 + 2 * q] = t(kPairs[q][0], kPairs[q][1]).real();
    p[5 + 2 * q] = t(kPairs[q][0], kPairs[q][1]).imag();
  }
  return p;
}

double log_likelihood(const NormalizedData& data, const Eigen::Matrix4cd& rho) {
  double ll = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double prob = std::max(kProbFloor, (rho * data.projectors[k]).trace().real());
    const double expected = data.intensity_rate * data.dwells[k] * prob;
    ll += data.counts[k] * std::log(expected) - expected;
  }
  return ll;
}

LinearInversionResult linear_inversion_impl(const NormalizedData& data) {
  Eigen::MatrixXd design(16, 16);
  Eigen::VectorXd probs(16);
  for (int k = 0; k < 16; ++k) {
    for (int m = 0; m < 16; ++m) {
      design(k, m) = (hermitian_basis(m) * data.projectors[k]).trace().real();
    }
    probs[k] = (data.counts[k] / data.dwells[k]) / data.intensity_rate;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 16) {
    throw DegenerateDataError("linear_inversion: projector set does not span Hermitian space");
  }
  const Eigen::VectorXd coeffs = qr.solve(probs);

  LinearInversionResult result;
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int m = 0; m < 16; ++m) rho += coeffs[m] * hermitian_basis(m);
  rho = hermitize(rho);
  rho /= rho.trace().real();
  result.rho.m = rho;
  result.min_eigenvalue = result.rho.min_eigenvalue();
  result.physical = result.min_eigenvalue >= -1e-9;
  return result;
}

MleResult mle_impl(const NormalizedData& data, const MleOptions& options) {
  // Initialize from the PSD projection of the linear inversion, with a small
  // eigenvalue floor so the Cholesky-style factorization exists.
  const LinearInversionResult li = linear_inversion_impl(data);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(li.rho.m);
  Eigen::Vector4d eigs = es.eigenvalues().cwiseMax(1e-6);
  Eigen::Matrix4cd init =
      es.eigenvectors() * eigs.asDiagonal() * es.eigenvectors().adjoint() / eigs.sum();
  Eigen::VectorXd params = t_params_from_rho(hermitize(init));

  const auto objective = [&data](const Eigen::VectorXd& p) {
    return -log_likelihood(data, rho_from_t_params(p));
  };
  const auto gradient = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd g(16);
    Eigen::VectorXd probe = p;
    for (int i = 0; i < 16; ++i) {
      const double h = options.gradient_step;
      probe[i] = p[i] + h;
      const double fp = objective(probe);
      probe[i] = p[i] - h;
      const double fm = objective(probe);
      probe[i] = p[i];
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  };

  double f = objective(params);
  Eigen::VectorXd grad = gradient(params);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(16, 16);

  MleResult result;
  result.converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::VectorXd direction = -(h_inv * grad);
    if (direction.dot(grad) >= 0) {
      h_inv.setIdentity();
      direction = -grad;
    }

    // Backtracking Armijo line search.
    const double slope = grad.dot(direction);
    double alpha = 1.0;
    double f_new = f;
    Eigen::VectorXd params_new = params;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      params_new = params + alpha * direction;
      f_new = objective(params_new);
      if (f_new <= f + 1e-4 * alpha * slope) {
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      result.converged = true;  // no descent possible at numeric resolution
      break;
    }

    const Eigen::VectorXd grad_new = gradient(params_new);
    const Eigen::VectorXd s = params_new - params;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const Eigen::VectorXd hy = h_inv * y;
      h_inv += ((sy + y.dot(hy)) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    } else {
      h_inv.setIdentity();
    }

    const double improvement = f - f_new;
    params = params_new;
    grad = grad_new;
    f = f_new;
    if (improvement < options.ll_tol) {
      result.converged = true;
      ++iter;
      break;
    }
  }

  result.rho.m = hermitize(rho_from_t_params(params));
  result.rho.m /= result.rho.m.trace().real();
  result.log_likelihood = -f;
  result.iterations = iter;
  return result;
}

}  // namespace

std::string basis_label(Basis b) {
  switch (b) {
    case Basis::kEarly: return "e";
    case Basis::kLate: return "l";
    case Basis::kPlus: return "+";
    case Basis::kPlusI: return "+i";
  }
  throw DomainError("basis_label: invalid basis");
}

std::string setting_label(const Setting& s) { return basis_label(s.signal) + basis_label(s.idler); }

Setting parse_setting(const std::string& label) {
  std::size_t pos = 0;
  const auto next = [&]() -> Basis {
    if (pos >= label.size()) throw ConfigError("setting", "truncated label: " + label);
    const char c = label[pos];
    if (c == 'e') {
      ++pos;
      return Basis::kEarly;
    }
    if (c == 'l') {
      ++pos;
      return Basis::kLate;
    }
    if (c == '+') {
      if (pos + 1 < label.size() && label[pos + 1] == 'i') {
        pos += 2;
        return Basis::kPlusI;
      }
      ++pos;
      return Basis::kPlus;
    }
    throw ConfigError("setting", "unknown basis symbol in label: " + label);
  };
  Setting s;
  s.signal = next();
  s.idler = next();
  if (pos != label.size()) throw ConfigError("setting", "trailing characters in label: " + label);
  return s;
}

std::array<Setting, 16> all_settings() {
  std::array<Setting, 16> settings;
  for (int s = 0; s < 4; ++s) {
    for (int i = 0; i < 4; ++i) {
      settings[static_cast<std::size_t>(4 * s + i)] = {static_cast<Basis>(s),
                                                       static_cast<Basis>(i)};
    }
  }
  return settings;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(hermitize(m));
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix::is_physical(double tol) const {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(m.trace().real() - 1.0) > tol || std::abs(m.trace().imag()) > tol) return false;
  return min_eigenvalue() >= -tol;
}

Eigen::Vector2cd basis_ket(Basis b) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  switch (b) {
    case Basis::kEarly: return {1.0, 0.0};
    case Basis::kLate: return {0.0, 1.0};
    case Basis::kPlus: return {inv_sqrt2, inv_sqrt2};
    case Basis::kPlusI: return {inv_sqrt2, Complex(0.0, inv_sqrt2)};
  }
  throw DomainError("basis_ket: invalid basis");
}

Eigen::Matrix4cd projector(Basis signal, Basis idler) {
  const Eigen::Vector2cd ks = basis_ket(signal);
  const Eigen::Vector2cd ki = basis_ket(idler);
  Eigen::Vector4cd joint;
  for (int s = 0; s < 2; ++s) {
    for (int i = 0; i < 2; ++i) joint[2 * s + i] = ks[s] * ki[i];
  }
  return joint * joint.adjoint();
}

double predicted_probability(const DensityMatrix& rho, const Setting& setting) {
  if (!rho.is_physical(1e-9)) {
    throw DomainError("predicted_probability: density matrix is not physical");
  }
  const double p = (rho.m * projector(setting.signal, setting.idler)).trace().real();
  return std::clamp(p, 0.0, 1.0);
}

LinearInversionResult linear_inversion(const std::vector<MeasurementRecord>& records) {
  return linear_inversion_impl(normalize_records(records));
}

MleResult mle_reconstruct(const std::vector<MeasurementRecord>& records,
                          const MleOptions& options) {
  return mle_impl(normalize_records(records), options);
}

double fidelity(const DensityMatrix& rho, const Eigen::Vector4cd& target) {
  const double norm = target.norm();
  if (!(norm > 0)) throw DomainError("fidelity: zero target state");
  const Eigen::Vector4cd t = target / norm;
  return std::real(Complex(t.adjoint() * rho.m * t));
}

double purity(const DensityMatrix& rho) { return (rho.m * rho.m).trace().real(); }

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(hermitize(a.m - b.m));
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

MonteCarloResult monte_carlo_uncertainty(const std::vector<MeasurementRecord>& records,
                                         int trials, const Eigen::Vector4cd& target,
                                         std::uint64_t seed, int threads) {
  if (trials < 2) throw DomainError("monte_carlo_uncertainty: need at least 2 trials");
  if (threads < 1) threads = 1;
  normalize_records(records);  // validate once up front

  std::vector<double> values(static_cast<std::size_t>(trials),
                             std::numeric_limits<double>::quiet_NaN());
  const auto run_trial = [&](int trial) {
    // Independent substream per trial: results do not depend on scheduling.
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1)));
    std::vector<MeasurementRecord> resampled = records;
    for (MeasurementRecord& r : resampled) {
      if (r.count > 0) {
        std::poisson_distribution<long long> poisson(r.count);
        r.count = static_cast<double>(poisson(rng));
      }
    }
    const MleResult mle = mle_reconstruct(resampled);
    if (mle.converged) values[static_cast<std::size_t>(trial)] = fidelity(mle.rho, target);
  };

  if (threads == 1) {
    for (int t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w]() {
        for (int t = w; t < trials; t += threads) run_trial(t);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  MonteCarloResult result;
  for (double v : values) {
    if (std::isnan(v)) {
      ++result.dropped;
    } else {
      result.per_trial.push_back(v);
    }
  }
  if (result.dropped * 10 > trials) {
    throw DegenerateDataError("monte_carlo_uncertainty: more than 10% of trials failed");
  }
  const double n = static_cast<double>(result.per_trial.size());
  double sum = 0.0;
  for (double v : result.per_trial) sum += v;
  result.fidelity_mean = sum / n;
  double ss = 0.0;
  for (double v : result.per_trial) ss += (v - result.fidelity_mean) * (v - result.fidelity_mean);
  result.fidelity_std = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return result;
}

std::vector<MeasurementRecord> read_counts_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open counts file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path, "counts file must be a JSON object");

  std::vector<MeasurementRecord> records;
  for (const auto& [key, value] : doc.items()) {
    MeasurementRecord r;
    r.setting = parse_setting(key);
    if (!value.is_object() || !value.contains("count")) {
      throw ConfigError(key, "expected an object with a count field");
    }
    if (!value["count"].is_number()) throw ConfigError(key + ".count", "must be a number");
    r.count = value["count"].get<double>();
    if (value.contains("dwell_s")) {
      if (!value["dwell_s"].is_number()) throw ConfigError(key + ".dwell_s", "must be a number");
      r.dwell_s = value["dwell_s"].get<double>();
    }
    records.push_back(r);
  }
  return records;
}

void write_counts_json(const std::vector<MeasurementRecord>& records, const std::string& path) {
  nlohmann::json doc = nlohmann::json::object();
  for (const MeasurementRecord& r : records) {
    doc[setting_label(r.setting)] = {{"count", r.count}, {"dwell_s", r.dwell_s}};
  }
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot write counts file");
  out << doc.dump(2) << "\n";
}

}  // namespace qtb
