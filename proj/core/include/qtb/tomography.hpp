#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qtb {

/// Single-qubit analysis bases for time-bin tomography:
/// |e>, |l>, |+> = (|e>+|l>)/sqrt2, |+i> = (|e>+i|l>)/sqrt2.
enum class Basis : int { kEarly = 0, kLate = 1, kPlus = 2, kPlusI = 3 };

struct Setting {
  Basis signal = Basis::kEarly;
  Basis idler = Basis::kEarly;
};

std::string basis_label(Basis b);
std::string setting_label(const Setting& s);
Setting parse_setting(const std::string& label);

/// The 16 tomography settings in canonical order (signal slow, idler fast).
std::array<Setting, 16> all_settings();

struct MeasurementRecord {
  Setting setting;
  double count = 0.0;
  double dwell_s = 1.0;
};

/// 4x4 density matrix in the {|ee>,|el>,|le>,|ll>} basis.
struct DensityMatrix {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();

  double min_eigenvalue() const;
  bool is_physical(double tol = 1e-9) const;  // Hermitian, PSD, unit trace
};

/// |psi_s><psi_s| (x) |psi_i><psi_i| for the given basis labels.
Eigen::Matrix4cd projector(Basis signal, Basis idler);
Eigen::Vector2cd basis_ket(Basis b);

/// Born-rule probability Tr(rho Pi), clamped to [0,1] at 1e-12 tolerance.
/// Throws DomainError when rho is not physical.
double predicted_probability(const DensityMatrix& rho, const Setting& setting);

struct LinearInversionResult {
  DensityMatrix rho;  // Hermitian, unit trace; may have negative eigenvalues
  bool physical = false;
  double min_eigenvalue = 0.0;
};

/// Direct solution of Tr(rho Pi_k) = p_k over the 16 real degrees of freedom
/// of a Hermitian matrix. Probabilities are normalized to the intensity of
/// the computational-basis quartet {ee, el, le, ll}, which partitions unity.
/// Requires all 16 settings; throws DegenerateDataError on missing settings
/// or zero totals.
LinearInversionResult linear_inversion(const std::vector<MeasurementRecord>& records);

struct MleResult {
  DensityMatrix rho;  // always Hermitian, PSD, unit trace
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = true;  // false: iteration cap hit, best iterate returned
};

struct MleOptions {
  int max_iterations = 10000;
  double ll_tol = 1e-10;          // stop when LL improves by less than this
  double gradient_step = 1e-6;    // central-difference step
};

/// Maximum-likelihood reconstruction over rho = T^dagger T / Tr(T^dagger T)
/// with T lower triangular (16 real parameters), maximizing the Poisson
/// log-likelihood of the measured counts. Deterministic; initialized from
/// the PSD-projected linear inversion.
MleResult mle_reconstruct(const std::vector<MeasurementRecord>& records,
                          const MleOptions& options = {});

/// F = <target|rho|target> for a normalized pure target.
double fidelity(const DensityMatrix& rho, const Eigen::Vector4cd& target);
double purity(const DensityMatrix& rho);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct MonteCarloResult {
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  std::vector<double> per_trial;
  int dropped = 0;
};

/// Poisson-resamples every count, reruns the MLE, and evaluates fidelity to
/// the target; deterministic given the seed and order-independent across
/// trials (per-trial RNG substreams). Non-convergent trials are dropped;
/// more than 10% dropped throws DegenerateDataError.
MonteCarloResult monte_carlo_uncertainty(const std::vector<MeasurementRecord>& records,
                                         int trials, const Eigen::Vector4cd& target,
                                         std::uint64_t seed = 0, int threads = 1);

/// Counts file: JSON mapping setting labels ("ee", "e+", ..., "+i+i") to
/// {count, dwell_s}.
std::vector<MeasurementRecord> read_counts_json(const std::string& path);
void write_counts_json(const std::vector<MeasurementRecord>& records, const std::string& path);

}  // namespace qtb
