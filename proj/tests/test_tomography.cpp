#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "qtb/errors.hpp"
#include "qtb/timebin.hpp"
#include "qtb/tomography.hpp"

using namespace qtb;
using Complex = std::complex<double>;

namespace {

// The reconstructed experimental matrix, renormalized to unit trace.
DensityMatrix measured_state() {
  Eigen::Matrix4cd m;
  m << Complex(0.5300, 0), Complex(-0.0215, 0.0355), Complex(-0.0089, 0.0296),
      Complex(0.4530, -0.0292),  //
      Complex(-0.0215, -0.0355), Complex(0.0124, 0), Complex(0.0078, 0.0056),
      Complex(-0.0038, -0.0126),  //
      Complex(-0.0089, -0.0296), Complex(0.0078, -0.0056), Complex(0.0092, 0),
      Complex(0.0116, -0.0260),  //
      Complex(0.4530, 0.0292), Complex(-0.0038, 0.0126), Complex(0.0116, 0.0260),
      Complex(0.4470, 0);
  DensityMatrix rho;
  rho.m = m / m.trace().real();
  return rho;
}

std::vector<MeasurementRecord> exact_records(const DensityMatrix& rho, double intensity) {
  std::vector<MeasurementRecord> records;
  for (const Setting& s : all_settings()) {
    const double p = (rho.m * projector(s.signal, s.idler)).trace().real();
    records.push_back({s, intensity * p, 1.0});
  }
  return records;
}

}  // namespace

TEST_CASE("setting labels parse greedily and round trip") {
  const char* labels[] = {"ee", "el", "e+", "e+i", "le", "ll", "l+", "l+i",
                          "+e", "+l", "++", "++i", "+ie", "+il", "+i+", "+i+i"};
  int i = 0;
  for (const Setting& s : all_settings()) {
    CHECK(setting_label(s) == labels[i]);
    const Setting parsed = parse_setting(labels[i]);
    CHECK(parsed.signal == s.signal);
    CHECK(parsed.idler == s.idler);
    ++i;
  }
  CHECK_THROWS_AS(parse_setting("xy"), ConfigError);
  CHECK_THROWS_AS(parse_setting("e"), ConfigError);
  CHECK_THROWS_AS(parse_setting("eee"), ConfigError);
}

TEST_CASE("projectors are rank-one and idempotent") {
  for (const Setting& s : all_settings()) {
    const Eigen::Matrix4cd p = projector(s.signal, s.idler);
    CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(p.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("predicted probability applies the Born rule to physical states") {
  DensityMatrix phi;
  phi.m = bell_phi_plus().amplitudes * bell_phi_plus().amplitudes.adjoint();
  CHECK(predicted_probability(phi, parse_setting("ee")) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(predicted_probability(phi, parse_setting("el")) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(predicted_probability(phi, parse_setting("++")) == doctest::Approx(0.5).epsilon(1e-12));
  // <+i+i|phi+> vanishes: the (-i)(-i) = -1 phase cancels the |ee> term.
  CHECK(predicted_probability(phi, parse_setting("+i+i")) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(predicted_probability(phi, parse_setting("+i+")) ==
        doctest::Approx(0.25).epsilon(1e-12));

  DensityMatrix bogus;
  bogus.m = 2.0 * phi.m;  // trace 2
  CHECK_THROWS_AS(predicted_probability(bogus, parse_setting("ee")), DomainError);
}

TEST_CASE("linear inversion reproduces the generating state exactly") {
  const DensityMatrix truth = measured_state();
  const LinearInversionResult li = linear_inversion(exact_records(truth, 1e6));
  CHECK((li.rho.m - truth.m).cwiseAbs().maxCoeff() < 1e-10);
  // The reference matrix has one slightly negative eigenvalue.
  CHECK(li.min_eigenvalue < 0.0);
  CHECK(li.min_eigenvalue > -1e-3);
  CHECK_FALSE(li.physical);
}

TEST_CASE("linear inversion requires all sixteen settings") {
  auto records = exact_records(measured_state(), 1e6);
  records.pop_back();
  CHECK_THROWS_AS(linear_inversion(records), DegenerateDataError);
}

TEST_CASE("golden fidelity of the measured state") {
  // Direct evaluation against |phi+>: 0.9428, bracketing the reference
  // 94.37 +/- 0.22 %.
  const double f = fidelity(measured_state(), bell_phi_plus().amplitudes);
  CHECK(f == doctest::Approx(0.9428).epsilon(2e-4));
  CHECK(std::abs(f - 0.9415) < 0.002);
}

TEST_CASE("MLE output is always physical and matches exact data") {
  const DensityMatrix truth = measured_state();
  const MleResult mle = mle_reconstruct(exact_records(truth, 1e6));
  CHECK(mle.converged);
  CHECK(mle.rho.is_physical(1e-8));
  // The generating matrix is marginally non-physical, so the MLE cannot
  // match it exactly, but the fidelity to |phi+> must agree closely.
  const double f_mle = fidelity(mle.rho, bell_phi_plus().amplitudes);
  const double f_direct = fidelity(truth, bell_phi_plus().amplitudes);
  CHECK(std::abs(f_mle - f_direct) < 0.002);
}

TEST_CASE("MLE on the fixture counts brackets the reference fidelity") {
  const auto records = read_counts_json(std::string(FIXTURES_DIR) + "/tomography_counts.json");
  REQUIRE(records.size() == 16);
  const MleResult mle = mle_reconstruct(records);
  CHECK(mle.converged);
  CHECK(mle.rho.is_physical(1e-8));
  const double f = fidelity(mle.rho, bell_phi_plus().amplitudes);
  CHECK(f > 0.93);
  CHECK(f < 0.95);
  CHECK(purity(mle.rho) <= 1.0 + 1e-9);
}

TEST_CASE("MLE stays physical on noisy random inputs") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  const DensityMatrix truth = measured_state();
  for (int trial = 0; trial < 10; ++trial) {
    auto records = exact_records(truth, 2000.0);
    for (auto& r : records) r.count = std::floor(r.count * uni(rng));
    const MleResult mle = mle_reconstruct(records);
    CHECK(mle.rho.is_physical(1e-8));
    CHECK(mle.rho.m.trace().real() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("distance measures") {
  DensityMatrix phi;
  phi.m = bell_phi_plus().amplitudes * bell_phi_plus().amplitudes.adjoint();
  CHECK(fidelity(phi, bell_phi_plus().amplitudes) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(phi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_distance(phi, phi) == doctest::Approx(0.0).epsilon(1e-12));

  DensityMatrix mixed;
  mixed.m = Eigen::Matrix4cd::Identity() / 4.0;
  CHECK(purity(mixed) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(fidelity(mixed, bell_phi_plus().amplitudes) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(trace_distance(phi, mixed) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("Monte Carlo uncertainty is deterministic and order independent") {
  const auto records = read_counts_json(std::string(FIXTURES_DIR) + "/tomography_counts.json");
  const Eigen::Vector4cd target = bell_phi_plus().amplitudes;
  const MonteCarloResult a = monte_carlo_uncertainty(records, 20, target, 7, 1);
  const MonteCarloResult b = monte_carlo_uncertainty(records, 20, target, 7, 1);
  CHECK(a.per_trial == b.per_trial);
  CHECK(a.fidelity_std == b.fidelity_std);
  // Different seed, different resamples.
  const MonteCarloResult c = monte_carlo_uncertainty(records, 20, target, 8, 1);
  CHECK(a.per_trial != c.per_trial);
  CHECK(a.fidelity_std > 0.0);
  CHECK(a.fidelity_std < 0.01);
}

TEST_CASE("counts JSON round trip") {
  const auto records = exact_records(measured_state(), 5e5);
  write_counts_json(records, "counts_roundtrip.json");
  const auto loaded = read_counts_json("counts_roundtrip.json");
  REQUIRE(loaded.size() == 16);
  for (const auto& r : loaded) {
    bool found = false;
    for (const auto& o : records) {
      if (setting_label(o.setting) == setting_label(r.setting)) {
        CHECK(r.count == doctest::Approx(o.count).epsilon(1e-12));
        found = true;
      }
    }
    CHECK(found);
  }
  std::remove("counts_roundtrip.json");
}
