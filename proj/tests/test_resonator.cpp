#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "qtb/errors.hpp"
#include "qtb/resonator.hpp"

using namespace qtb;

namespace {

std::vector<TracePoint> synthesize(const Resonance& res, double span_hz, int n) {
  std::vector<TracePoint> trace;
  for (int i = 0; i < n; ++i) {
    const double nu = res.center.hertz - span_hz / 2 + span_hz * i / (n - 1);
    trace.push_back({Frequency::hz(nu), transmission(res, Frequency::hz(nu))});
  }
  return trace;
}

}  // namespace

TEST_CASE("Lorentzian dip shape") {
  const Resonance res{Frequency::thz(192.7), Frequency::ghz(1.0), 0.1};
  CHECK(transmission(res, res.center) == doctest::Approx(0.1).epsilon(1e-12));
  // Half width at half depth: T = (1 + T_min) / 2.
  const Frequency half = Frequency::hz(res.center.hertz + 0.5e9);
  CHECK(transmission(res, half) == doctest::Approx(0.55).epsilon(1e-12));
  // Far detuned: transmission approaches 1.
  CHECK(transmission(res, Frequency::hz(res.center.hertz + 1e12)) ==
        doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("Q factor and free spectral range") {
  const Resonance res{Frequency::thz(192.7), Frequency::ghz(1.0), 0.1};
  CHECK(q_factor(res) == doctest::Approx(1.927e5).epsilon(1e-12));

  // R = 17 um, n_g = 2.81 -> FSR close to 1 THz.
  const Frequency fsr = free_spectral_range({17e-6, 2.81});
  CHECK(fsr.hertz == doctest::Approx(kSpeedOfLight / (2 * 3.14159265358979 * 17e-6 * 2.81))
                         .epsilon(1e-9));
  CHECK(fsr.thz() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("resonance fit recovers exact parameters") {
  const Resonance truth{Frequency::thz(193.7), Frequency::ghz(1.19), 0.08};
  const ResonanceFit fit = fit_resonance(synthesize(truth, 16e9, 401));
  CHECK(fit.resonance.center.hertz == doctest::Approx(truth.center.hertz).epsilon(1e-9));
  CHECK(fit.resonance.linewidth_fwhm.hertz ==
        doctest::Approx(truth.linewidth_fwhm.hertz).epsilon(1e-6));
  CHECK(fit.resonance.t_min == doctest::Approx(truth.t_min).epsilon(1e-6));
}

TEST_CASE("resonance fit tolerates noise within quoted errors") {
  const Resonance truth{Frequency::thz(191.7), Frequency::ghz(1.73), 0.1};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.003);
  auto trace = synthesize(truth, 16e9, 401);
  for (TracePoint& p : trace) p.transmission += noise(rng);
  const ResonanceFit fit = fit_resonance(trace);
  CHECK(std::abs(fit.resonance.linewidth_fwhm.hertz - truth.linewidth_fwhm.hertz) <
        5.0 * fit.std_errors[1]);
  CHECK(fit.resonance.linewidth_fwhm.hertz ==
        doctest::Approx(truth.linewidth_fwhm.hertz).epsilon(0.02));
}

TEST_CASE("degenerate traces are rejected") {
  std::vector<TracePoint> flat;
  for (int i = 0; i < 50; ++i) flat.push_back({Frequency::ghz(100.0 + i), 1.0});
  CHECK_THROWS_AS(fit_resonance(flat), DegenerateDataError);

  std::vector<TracePoint> tiny = {{Frequency::ghz(1), 0.5}, {Frequency::ghz(2), 0.6}};
  CHECK_THROWS_AS(fit_resonance(tiny), DegenerateDataError);
}

TEST_CASE("fixture traces reproduce the measured Q factors") {
  struct Case {
    const char* file;
    double q_expected;
    double linewidth_ghz;
  };
  // Linewidths 1.19 / 1.00 / 1.73 GHz at C37 / C27 / C17.
  const Case cases[] = {{"/resonance_c37.csv", 1.63e5, 1.19},
                        {"/resonance_c27.csv", 1.93e5, 1.00},
                        {"/resonance_c17.csv", 1.11e5, 1.73}};
  for (const Case& c : cases) {
    const auto trace = read_transmission_csv(std::string(FIXTURES_DIR) + c.file);
    const ResonanceFit fit = fit_resonance(trace);
    CHECK(q_factor(fit.resonance) == doctest::Approx(c.q_expected).epsilon(0.02));
    CHECK(fit.resonance.linewidth_fwhm.ghz() == doctest::Approx(c.linewidth_ghz).epsilon(0.02));
  }
}

TEST_CASE("wavelength-axis CSV traces are converted to frequency") {
  const std::string path = "test_wavelength_trace.csv";
  {
    std::ofstream out(path);
    out.precision(12);
    out << "wavelength_nm,transmission\n";
    const Resonance res{wavelength_to_frequency(Wavelength::nm(1550.0)), Frequency::ghz(2.0),
                        0.2};
    for (int i = 0; i < 200; ++i) {
      const double nm = 1549.8 + 0.4 * i / 199.0;
      out << nm << "," << transmission(res, wavelength_to_frequency(Wavelength::nm(nm))) << "\n";
    }
  }
  const auto trace = read_transmission_csv(path);
  const ResonanceFit fit = fit_resonance(trace);
  CHECK(frequency_to_wavelength(fit.resonance.center).nm() ==
        doctest::Approx(1550.0).epsilon(1e-6));
  CHECK(fit.resonance.linewidth_fwhm.ghz() == doctest::Approx(2.0).epsilon(1e-3));
  std::remove(path.c_str());
}
