#include "qtb/quantities.hpp"

#include <cmath>

#include "qtb/errors.hpp"

namespace qtb {

Power Power::dbm(double v) { return {1e-3 * std::pow(10.0, v / 10.0)}; }

double Power::to_dbm() const {
  if (watts <= 0) throw DomainError("dBm undefined for non-positive power");
  return 10.0 * std::log10(watts / 1e-3);
}

Frequency wavelength_to_frequency(Wavelength lambda) {
  if (!(lambda.meters > 0)) throw DomainError("wavelength must be positive");
  return {kSpeedOfLight / lambda.meters};
}

Wavelength frequency_to_wavelength(Frequency nu) {
  if (!(nu.hertz > 0)) throw DomainError("frequency must be positive");
  return {kSpeedOfLight / nu.hertz};
}

Frequency itu_c_channel_center(int n) {
  if (n < 1 || n > 72) throw DomainError("ITU C-band channel index out of range [1,72]");
  return Frequency::hz(190.0e12 + n * 100.0e9);
}

}  // namespace qtb
