#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qtb {

/// Two-photon time-bin basis order used everywhere: {|ee>, |el>, |le>, |ll>}.
/// First label is the signal photon, second the idler.
enum TimeBinBasis : int { kEE = 0, kEL = 1, kLE = 2, kLL = 3 };

/// Pure two-qubit time-bin state as a normalized complex 4-vector.
struct TimeBinState {
  Eigen::Vector4cd amplitudes = Eigen::Vector4cd::Zero();

  /// Throws DomainError when the norm deviates from 1 by more than 1e-9.
  void validate() const;
};

/// |phi+> = (|ee> + |ll>)/sqrt(2).
TimeBinState bell_phi_plus();

/// Same state with a relative phase: (|ee> + e^{i theta}|ll>)/sqrt(2).
TimeBinState bell_phi(double theta);

}  // namespace qtb
