#include "qtb/timebin.hpp"

#include <cmath>

#include "qtb/errors.hpp"

namespace qtb {

void TimeBinState::validate() const {
  if (std::abs(amplitudes.squaredNorm() - 1.0) > 1e-9) {
    throw DomainError("TimeBinState: amplitudes must be normalized to 1 (tol 1e-9)");
  }
}

TimeBinState bell_phi_plus() { return bell_phi(0.0); }

TimeBinState bell_phi(double theta) {
  TimeBinState s;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  s.amplitudes[kEE] = inv_sqrt2;
  s.amplitudes[kLL] = std::polar(inv_sqrt2, theta);
  return s;
}

}  // namespace qtb
