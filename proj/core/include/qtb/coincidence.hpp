#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qtb/histogram.hpp"
#include "qtb/quantities.hpp"

namespace qtb {

struct CoincidenceResult {
  std::uint64_t count = 0;
  double rate_hz = 0.0;  // count / duration analyzed
  double window_s = 0.0;
  double offset_s = 0.0;
  double duration_s = 0.0;
};

/// Acceptance window relative to a reference tag: [offset, offset + width].
struct Gate {
  TimeStamp offset_ps = 0;
  TimeStamp width_ps = 0;
};

struct Peak {
  double center_s = 0.0;
  double area = 0.0;  // raw counts integrated within +-separation/2
};

/// All-pairs delay histogram of (t_a - t_b) for |t_a - t_b| within range.
/// Bins are centered on multiples of bin_width around zero delay
/// (2*floor(range/bin)+1 bins); inputs must be sorted ascending.
/// Single sort-merge sweep, O(n + matches).
Histogram delay_histogram(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                          TimeStamp bin_width_ps, TimeStamp range_ps);

/// One-to-one windowed coincidences: pairs with t_b - t_a - offset in
/// [-window/2, +window/2], greedy earliest match, each tag used at most
/// once. Window is closed on both ends. Ties in equal timestamps follow
/// channel order of the inputs.
CoincidenceResult count_coincidences(std::span<const std::int64_t> a,
                                     std::span<const std::int64_t> b, TimeStamp window_ps,
                                     TimeStamp offset_ps, double duration_s);

/// Shifted-window accidental estimator: same count with the offset moved by
/// an integer number of pump periods (default +1).
CoincidenceResult accidental_coincidences(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b, TimeStamp window_ps,
                                          TimeStamp offset_ps, TimeStamp period_ps,
                                          double duration_s, int periods = 1);

/// Clock-gated three-fold coincidences: counts clock tags with at least one
/// tag of `a` in gate_a and at least one tag of `b` in gate_b (both gates
/// relative to the clock tag). Gates must fit within one pump period.
CoincidenceResult triple_coincidences(std::span<const std::int64_t> clock,
                                      std::span<const std::int64_t> a,
                                      std::span<const std::int64_t> b, Gate gate_a, Gate gate_b,
                                      TimeStamp period_ps, double duration_s);

/// Local maxima of the histogram after 3-bin moving-average smoothing,
/// filtered by prominence, at least min_separation apart.
std::vector<Peak> find_peaks(const Histogram& h, double min_separation_s, double min_prominence);

}  // namespace qtb
