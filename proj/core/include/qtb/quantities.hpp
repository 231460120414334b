#pragma once

#include <cstdint>

namespace qtb {

/// Speed of light, exact SI value. No refractive corrections at this layer.
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

/// Optical frequency, stored in hertz.
struct Frequency {
  double hertz{};

  static constexpr Frequency hz(double v) { return {v}; }
  static constexpr Frequency ghz(double v) { return {v * 1e9}; }
  static constexpr Frequency thz(double v) { return {v * 1e12}; }
  constexpr double ghz() const { return hertz / 1e9; }
  constexpr double thz() const { return hertz / 1e12; }
};

/// Optical wavelength, stored in meters.
struct Wavelength {
  double meters{};

  static constexpr Wavelength m(double v) { return {v}; }
  static constexpr Wavelength nm(double v) { return {v * 1e-9}; }
  constexpr double nm() const { return meters * 1e9; }
  /// Validation helper for the telecom window used in this experiment.
  constexpr bool in_telecom_band() const {
    return meters > 1.0e-6 && meters < 2.0e-6;
  }
};

/// Optical power, stored in watts.
struct Power {
  double watts{};

  static constexpr Power w(double v) { return {v}; }
  static constexpr Power mw(double v) { return {v * 1e-3}; }
  static Power dbm(double v);
  constexpr double milliwatts() const { return watts * 1e3; }
  double to_dbm() const;
};

/// Detection timestamp: integer picoseconds since the stream epoch.
/// Integer resolution makes coincidence windows and histogram bins exact.
using TimeStamp = std::int64_t;

inline constexpr double kPicosecond = 1e-12;

constexpr TimeStamp ps_from_seconds(double s) {
  return static_cast<TimeStamp>(s / kPicosecond + (s >= 0 ? 0.5 : -0.5));
}
constexpr double seconds_from_ps(TimeStamp t) { return static_cast<double>(t) * kPicosecond; }

/// c / lambda. Throws DomainError on non-positive wavelength.
Frequency wavelength_to_frequency(Wavelength lambda);

/// c / nu. Throws DomainError on non-positive frequency.
Wavelength frequency_to_wavelength(Frequency nu);

/// Center frequency of ITU 100-GHz C-band channel n: 190.0 THz + n x 100 GHz.
/// Valid for 1 <= n <= 72; out of range throws DomainError.
Frequency itu_c_channel_center(int n);

}  // namespace qtb
