#include <doctest.h>

#include "qtb/errors.hpp"
#include "qtb/quantities.hpp"

using namespace qtb;

TEST_CASE("wavelength-frequency conversion") {
  const Frequency nu = wavelength_to_frequency(Wavelength::nm(1550.0));
  CHECK(nu.hertz == doctest::Approx(299792458.0 / 1550e-9).epsilon(1e-12));
  const Wavelength back = frequency_to_wavelength(nu);
  CHECK(back.nm() == doctest::Approx(1550.0).epsilon(1e-12));

  CHECK_THROWS_AS(wavelength_to_frequency(Wavelength::m(0.0)), DomainError);
  CHECK_THROWS_AS(frequency_to_wavelength(Frequency::hz(-1.0)), DomainError);
}

TEST_CASE("ITU C-band channel grid") {
  CHECK(itu_c_channel_center(27).thz() == doctest::Approx(192.7).epsilon(1e-12));
  CHECK(itu_c_channel_center(37).thz() == doctest::Approx(193.7).epsilon(1e-12));
  CHECK(itu_c_channel_center(17).thz() == doctest::Approx(191.7).epsilon(1e-12));
  CHECK_THROWS_AS(itu_c_channel_center(0), DomainError);
  CHECK_THROWS_AS(itu_c_channel_center(73), DomainError);

  // The pump channel C27 sits at 1555.75 nm on the 100-GHz grid.
  CHECK(frequency_to_wavelength(itu_c_channel_center(27)).nm() ==
        doctest::Approx(1555.75).epsilon(2e-5));
}

TEST_CASE("power units") {
  CHECK(Power::mw(1.0).watts == doctest::Approx(1e-3));
  CHECK(Power::mw(1.0).to_dbm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(Power::dbm(10.0).milliwatts() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(Power::dbm(-3.0).milliwatts() == doctest::Approx(0.501187).epsilon(1e-5));
}

TEST_CASE("picosecond timestamps round to nearest") {
  CHECK(ps_from_seconds(1e-9) == 1000);
  CHECK(ps_from_seconds(1.49999e-12) == 1);
  CHECK(ps_from_seconds(1.5001e-12) == 2);
  CHECK(ps_from_seconds(-1.5001e-12) == -2);
  CHECK(seconds_from_ps(1250) == doctest::Approx(1.25e-9).epsilon(1e-15));
}

TEST_CASE("telecom band predicate") {
  CHECK(Wavelength::nm(1550).in_telecom_band());
  CHECK_FALSE(Wavelength::nm(780).in_telecom_band());
}
