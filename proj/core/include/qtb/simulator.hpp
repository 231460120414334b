#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtb/tagstream.hpp"
#include "qtb/timebin.hpp"

namespace qtb {

/// Double-pulse pump train: two pulses per period, separated by the time-bin
/// spacing, repeating at repetition_rate.
struct PumpConfig {
  double pulse_fwhm_s = 300e-12;
  double bin_separation_s = 1.25e-9;  // delta T between |e> and |l>
  double repetition_rate_hz = 160e6;
  double mean_pairs_per_double_pulse = 0.05;  // mu
};

/// Emission-time model of the cavity: per-photon exponential decay with the
/// given coherence time (so a signal-idler delay histogram fits
/// exp(-|dt|/tau) with tau = coherence_time), plus an optional Gaussian
/// smear of the shared emission time with sigma = pulse_fwhm/2.355.
struct SourceConfig {
  double coherence_time_s = 152e-12;
  bool pulse_smear = true;
};

/// Unbalanced Mach-Zehnder analyzer. The path imbalance must equal the pump
/// bin separation; phase applies to the long arm.
struct UmziConfig {
  double delay_s = 1.25e-9;
  double phase_rad = 0.0;
  double transmittance = 1.0;     // insertion-loss survival factor
  double splitting_ratio = 0.5;   // power coupling of each coupler, 0.5 ideal
};

struct DetectorConfig {
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;
  double jitter_sigma_s = 0.0;
  double dead_time_s = 0.0;
};

enum class Slot : int { kEarly = 0, kMiddle = 1, kLate = 2 };

struct UmziOutcome {
  int port = 1;  // 1 or 2
  Slot slot = Slot::kEarly;
  std::complex<double> amplitude;
};

/// Single-photon transfer of a time-bin amplitude pair through one UMZI:
/// six (port, slot) output amplitudes whose squared norms sum to the input
/// norm for any coupler splitting ratio. The transmittance is a separate
/// survival factor applied at detection, not folded into the amplitudes.
/// Input norm above 1 (tol 1e-9) throws DomainError.
std::array<UmziOutcome, 6> apply_umzi(std::complex<double> amp_early,
                                      std::complex<double> amp_late, const UmziConfig& cfg);

struct JointOutcome {
  int port_signal = 1;
  Slot slot_signal = Slot::kEarly;
  int port_idler = 1;
  Slot slot_idler = Slot::kLate;
  double probability = 0.0;  // excludes transmittance/efficiency losses
};

/// Exact 36-outcome joint (port, slot) distribution of an entangled pair
/// after both analyzers; probabilities sum to 1. Sampling happens only at
/// this final outcome, never before, so interference is exact.
std::array<JointOutcome, 36> joint_outcome_distribution(const TimeBinState& state,
                                                        const UmziConfig& signal,
                                                        const UmziConfig& idler);

struct ExperimentConfig {
  PumpConfig pump;
  SourceConfig source;
  TimeBinState state = bell_phi_plus();
  UmziConfig umzi_signal;
  UmziConfig umzi_idler;
  std::map<std::string, DetectorConfig> detectors;  // keyed by channel name
  double duration_s = 1.0;
  std::uint64_t seed = 0;
};

struct SimulationResult {
  TagStream stream;
  std::uint64_t pairs_emitted = 0;
  std::uint64_t photon_tags = 0;
  std::uint64_t dark_tags = 0;
  std::uint64_t tags_removed_dead_time = 0;
  std::vector<std::string> warnings;
};

/// Full double-pulse experiment: CLOCK tag once per pump period, per-pulse
/// Poisson pair emission in the configured time-bin state, UMZI analyzers,
/// per-channel detection efficiency, Gaussian jitter, Poisson dark counts,
/// and per-channel dead time. Deterministic given the seed.
/// Channels: CLOCK, A1, A2 (signal ports), B1, B2 (idler ports).
SimulationResult simulate_experiment(const ExperimentConfig& cfg);

/// Source-correlation measurement without analyzers: channels SIG and IDL.
/// Signal and idler share the emission time; each adds an independent
/// exponential cavity delay so the delay histogram is exp(-|dt|/tau).
SimulationResult simulate_correlation_run(const ExperimentConfig& cfg);

/// Closed-form probability that one pump period yields a three-fold
/// coincidence: a click on signal port `port_signal` inside gate A and a
/// click on idler port `port_idler` inside gate B (gates relative to the
/// clock tag). Includes multi-pair accidentals and dark counts exactly;
/// assumes zero dead time. This is the analytic expectation the Monte Carlo
/// sampler is validated against.
double expected_triple_probability(const ExperimentConfig& cfg, int port_signal, int port_idler,
                                   double gate_a_offset_s, double gate_a_width_s,
                                   double gate_b_offset_s, double gate_b_width_s);

/// JSON config I/O; schema documented in the README. Validation failures
/// throw ConfigError carrying the offending field path.
ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace qtb
