#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "qtb/coincidence.hpp"
#include "qtb/errors.hpp"
#include "qtb/pairsource.hpp"
#include "qtb/simulator.hpp"

using namespace qtb;
using std::numbers::pi;

namespace {

ExperimentConfig fixture_config() {
  return load_experiment_config(std::string(FIXTURES_DIR) + "/experiment.json");
}

ExperimentConfig correlation_config() {
  return load_experiment_config(std::string(FIXTURES_DIR) + "/correlation.json");
}

}  // namespace

TEST_CASE("UMZI conserves probability for arbitrary states and couplers") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    // Random normalized single-photon time-bin amplitude pair.
    const double theta = uni(rng) * pi / 2;
    const double phi1 = uni(rng) * 2 * pi, phi2 = uni(rng) * 2 * pi;
    const std::complex<double> ae = std::polar(std::cos(theta), phi1);
    const std::complex<double> al = std::polar(std::sin(theta), phi2);

    UmziConfig cfg;
    cfg.phase_rad = uni(rng) * 2 * pi;
    cfg.splitting_ratio = 0.05 + 0.9 * uni(rng);

    const auto outcomes = apply_umzi(ae, al, cfg);
    double total = 0.0;
    for (const UmziOutcome& o : outcomes) total += std::norm(o.amplitude);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("joint outcome distribution is normalized and interferes correctly") {
  UmziConfig sig, idl;
  for (double alpha : {0.0, 0.7, 2.1}) {
    for (double beta : {0.0, 1.1, pi}) {
      sig.phase_rad = alpha;
      idl.phase_rad = beta;
      const auto joint = joint_outcome_distribution(bell_phi_plus(), sig, idl);

      double total = 0.0;
      double mm[2][2] = {{0, 0}, {0, 0}};  // middle-middle per port pair
      for (const JointOutcome& o : joint) {
        total += o.probability;
        if (o.slot_signal == Slot::kMiddle && o.slot_idler == Slot::kMiddle) {
          mm[o.port_signal - 1][o.port_idler - 1] += o.probability;
        }
      }
      CHECK(std::abs(total - 1.0) < 1e-12);

      // Post-selected middle-middle fringe: (1 +/- cos(alpha + beta)) / 16,
      // sign + for equal ports and - for opposite ports.
      const double c = std::cos(alpha + beta);
      CHECK(mm[0][0] == doctest::Approx((1 + c) / 16).epsilon(1e-12));
      CHECK(mm[1][1] == doctest::Approx((1 + c) / 16).epsilon(1e-12));
      CHECK(mm[0][1] == doctest::Approx((1 - c) / 16).epsilon(1e-12));
      CHECK(mm[1][0] == doctest::Approx((1 - c) / 16).epsilon(1e-12));
    }
  }
}

TEST_CASE("over-normalized input amplitudes are rejected") {
  CHECK_THROWS_AS(apply_umzi(1.0, 0.1, UmziConfig{}), DomainError);
}

TEST_CASE("simulation is deterministic in the seed") {
  ExperimentConfig cfg = fixture_config();
  cfg.duration_s = 2e-3;
  const SimulationResult a = simulate_experiment(cfg);
  const SimulationResult b = simulate_experiment(cfg);
  CHECK(a.stream.records == b.stream.records);
  CHECK(a.pairs_emitted == b.pairs_emitted);

  cfg.seed += 1;
  const SimulationResult c = simulate_experiment(cfg);
  CHECK(a.stream.records != c.stream.records);
}

TEST_CASE("zero pair rate leaves only the clock train") {
  ExperimentConfig cfg = fixture_config();
  cfg.duration_s = 1e-3;
  cfg.pump.mean_pairs_per_double_pulse = 0.0;
  for (auto& [name, det] : cfg.detectors) det.dark_rate_hz = 0.0;
  const SimulationResult r = simulate_experiment(cfg);
  CHECK(r.pairs_emitted == 0);
  CHECK(r.photon_tags == 0);
  const auto expected_clocks =
      static_cast<std::uint64_t>(cfg.duration_s * cfg.pump.repetition_rate_hz + 0.5);
  CHECK(r.stream.records.size() == expected_clocks);
}

TEST_CASE("zero duration yields an empty stream") {
  ExperimentConfig cfg = fixture_config();
  cfg.duration_s = 0.0;
  const SimulationResult r = simulate_experiment(cfg);
  CHECK(r.stream.records.empty());
}

TEST_CASE("emitted pair count tracks the Poisson expectation") {
  ExperimentConfig cfg = fixture_config();
  cfg.duration_s = 0.05;
  const SimulationResult r = simulate_experiment(cfg);
  const double periods = cfg.duration_s * cfg.pump.repetition_rate_hz;
  const double mean = periods * cfg.pump.mean_pairs_per_double_pulse;
  CHECK(std::abs(static_cast<double>(r.pairs_emitted) - mean) < 5.0 * std::sqrt(mean));
}

TEST_CASE("dead time removes close tags and is reported") {
  ExperimentConfig cfg = fixture_config();
  cfg.duration_s = 5e-3;
  for (auto& [name, det] : cfg.detectors) det.dead_time_s = 50e-9;
  const SimulationResult r = simulate_experiment(cfg);
  CHECK(r.tags_removed_dead_time > 0);
  // No surviving same-channel pair may violate the dead time.
  for (const char* name : {"A1", "A2", "B1", "B2"}) {
    const auto times = r.stream.channel_times(name);
    for (std::size_t i = 1; i < times.size(); ++i) {
      CHECK(times[i] - times[i - 1] >= 50000);
    }
  }
}

TEST_CASE("correlation run reproduces the configured coherence time") {
  ExperimentConfig cfg = correlation_config();
  cfg.duration_s = 0.1;
  const SimulationResult r = simulate_correlation_run(cfg);
  const auto sig = r.stream.channel_times("SIG");
  const auto idl = r.stream.channel_times("IDL");
  const Histogram h = delay_histogram(sig, idl, 5, 2000);
  const DoubleExponentialFit fit = fit_double_exponential(h);
  CHECK(fit.tau_s == doctest::Approx(cfg.source.coherence_time_s).epsilon(0.10));
  CHECK(fit.bandwidth.ghz() == doctest::Approx(1.047).epsilon(0.12));
}

TEST_CASE("config validation reports the offending field") {
  ExperimentConfig cfg = fixture_config();
  cfg.umzi_signal.delay_s = 1.0e-9;  // mismatched with the bin separation
  CHECK_THROWS_AS(simulate_experiment(cfg), ConfigError);

  ExperimentConfig cfg2 = fixture_config();
  cfg2.detectors.erase("B2");
  try {
    simulate_experiment(cfg2);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field().find("B2") != std::string::npos);
  }
}

TEST_CASE("config files round trip") {
  const ExperimentConfig cfg = fixture_config();
  save_experiment_config(cfg, "config_roundtrip.json");
  const ExperimentConfig loaded = load_experiment_config("config_roundtrip.json");
  CHECK(loaded.pump.bin_separation_s == cfg.pump.bin_separation_s);
  CHECK(loaded.seed == cfg.seed);
  CHECK(loaded.detectors.at("A1").efficiency == cfg.detectors.at("A1").efficiency);
  CHECK((loaded.state.amplitudes - cfg.state.amplitudes).norm() < 1e-15);
  std::remove("config_roundtrip.json");
}

TEST_CASE("malformed config throws with a field path") {
  const std::string path = "bad_config.json";
  {
    std::ofstream out(path);
    out << R"({"pump": {"pulse_fwhm_s": 3e-10}})";
  }
  try {
    load_experiment_config(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "pump.bin_separation_s");
  }
  std::remove(path.c_str());
}

TEST_CASE("analytic triple probability behaves physically") {
  const ExperimentConfig cfg = fixture_config();
  const double p1 = expected_triple_probability(cfg, 1, 1, 1.25e-9, 0.4e-9, 1.25e-9, 0.4e-9);
  const double p2 = expected_triple_probability(cfg, 1, 1, 1.25e-9, 0.8e-9, 1.25e-9, 0.8e-9);
  CHECK(p1 > 0.0);
  CHECK(p2 < 1.0);
  CHECK(p2 > p1);  // monotone in gate width

  // With the idler phase at pi the equal-port coincidence is suppressed.
  ExperimentConfig anti = cfg;
  anti.umzi_idler.phase_rad = pi;
  const double p_min = expected_triple_probability(anti, 1, 1, 1.25e-9, 0.8e-9, 1.25e-9, 0.8e-9);
  CHECK(p_min < 0.05 * p2);
}
