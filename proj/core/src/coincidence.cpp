#include "qtb/coincidence.hpp"

#include <algorithm>
#include <cmath>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

bool sorted_ascending(std::span<const std::int64_t> v) {
  return std::is_sorted(v.begin(), v.end());
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Histogram delay_histogram(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                          TimeStamp bin_width_ps, TimeStamp range_ps) {
  if (bin_width_ps <= 0) throw DomainError("delay_histogram: bin width must be positive");
  if (range_ps < bin_width_ps) throw DomainError("delay_histogram: range must cover at least one bin");
  if (!sorted_ascending(a) || !sorted_ascending(b)) {
    throw DomainError("delay_histogram: input streams must be sorted");
  }

  const std::int64_t half_bins = range_ps / bin_width_ps;
  const std::int64_t nbins = 2 * half_bins + 1;
  // Bin m (relative to the center bin) covers delays in
  // [m*w - w/2, m*w + w/2); exactly symmetric under delay negation for odd
  // bin widths (integer timestamps put edges between samples).
  const std::int64_t limit = half_bins * bin_width_ps + bin_width_ps / 2;

  Histogram h;
  h.bin_width_s = seconds_from_ps(bin_width_ps);
  h.origin_s = (-half_bins * static_cast<double>(bin_width_ps) - bin_width_ps / 2.0) * kPicosecond;
  h.counts.assign(static_cast<std::size_t>(nbins), 0);

  std::size_t lo = 0;
  for (const std::int64_t ta : a) {
    while (lo < b.size() && b[lo] < ta - limit) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j] <= ta + limit; ++j) {
      const std::int64_t delta = ta - b[j];
      const std::int64_t idx = floor_div(delta + bin_width_ps / 2, bin_width_ps) + half_bins;
      if (idx >= 0 && idx < nbins) ++h.counts[static_cast<std::size_t>(idx)];
    }
  }
  return h;
}

CoincidenceResult count_coincidences(std::span<const std::int64_t> a,
                                     std::span<const std::int64_t> b, TimeStamp window_ps,
                                     TimeStamp offset_ps, double duration_s) {
  if (window_ps <= 0) throw DomainError("count_coincidences: window must be positive");
  if (!sorted_ascending(a) || !sorted_ascending(b)) {
    throw DomainError("count_coincidences: input streams must be sorted");
  }
  const std::int64_t half = window_ps / 2;

  std::uint64_t count = 0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const std::int64_t target = a[ia] + offset_ps;
    if (b[ib] < target - half) {
      ++ib;
    } else if (b[ib] <= target + half) {
      ++count;  // greedy earliest match; both tags consumed
      ++ia;
      ++ib;
    } else {
      ++ia;
    }
  }

  CoincidenceResult result;
  result.count = count;
  result.window_s = seconds_from_ps(window_ps);
  result.offset_s = seconds_from_ps(offset_ps);
  result.duration_s = duration_s;
  result.rate_hz = duration_s > 0 ? count / duration_s : 0.0;
  return result;
}

CoincidenceResult accidental_coincidences(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b, TimeStamp window_ps,
                                          TimeStamp offset_ps, TimeStamp period_ps,
                                          double duration_s, int periods) {
  if (period_ps <= 0) throw DomainError("accidental_coincidences: period must be positive");
  return count_coincidences(a, b, window_ps, offset_ps + periods * period_ps, duration_s);
}

CoincidenceResult triple_coincidences(std::span<const std::int64_t> clock,
                                      std::span<const std::int64_t> a,
                                      std::span<const std::int64_t> b, Gate gate_a, Gate gate_b,
                                      TimeStamp period_ps, double duration_s) {
  for (const Gate& g : {gate_a, gate_b}) {
    if (g.width_ps <= 0) throw DomainError("triple_coincidences: gate width must be positive");
    if (g.width_ps > period_ps) {
      throw ConfigError("gate", "gate wider than the pump period overlaps adjacent clocks");
    }
  }
  if (!sorted_ascending(clock) || !sorted_ascending(a) || !sorted_ascending(b)) {
    throw DomainError("triple_coincidences: input streams must be sorted");
  }

  std::uint64_t count = 0;
  std::size_t ia = 0, ib = 0;
  for (const std::int64_t tc : clock) {
    const std::int64_t a_lo = tc + gate_a.offset_ps;
    while (ia < a.size() && a[ia] < a_lo) ++ia;
    const bool hit_a = ia < a.size() && a[ia] <= a_lo + gate_a.width_ps;
    if (!hit_a) continue;
    const std::int64_t b_lo = tc + gate_b.offset_ps;
    while (ib < b.size() && b[ib] < b_lo) ++ib;
    if (ib < b.size() && b[ib] <= b_lo + gate_b.width_ps) ++count;
  }

  CoincidenceResult result;
  result.count = count;
  result.window_s = seconds_from_ps(gate_a.width_ps);
  result.offset_s = seconds_from_ps(gate_a.offset_ps);
  result.duration_s = duration_s;
  result.rate_hz = duration_s > 0 ? count / duration_s : 0.0;
  return result;
}

std::vector<Peak> find_peaks(const Histogram& h, double min_separation_s, double min_prominence) {
  const std::size_t n = h.counts.size();
  if (n < 3) return {};

  // 3-bin moving average.
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = static_cast<double>(h.counts[i]);
    int cnt = 1;
    if (i > 0) sum += static_cast<double>(h.counts[i - 1]), ++cnt;
    if (i + 1 < n) sum += static_cast<double>(h.counts[i + 1]), ++cnt;
    s[i] = sum / cnt;
  }

  struct Candidate {
    std::size_t idx;
    double height;
    double prominence;
    double base;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(s[i] > s[i - 1] && s[i] >= s[i + 1])) continue;
    // Prominence: drop to the lowest point before the nearest higher bin,
    // on each side, relative to the peak.
    double left_min = s[i], right_min = s[i];
    for (std::size_t j = i; j-- > 0;) {
      if (s[j] > s[i]) break;
      left_min = std::min(left_min, s[j]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (s[j] > s[i]) break;
      right_min = std::min(right_min, s[j]);
    }
    const double base = std::max(left_min, right_min);
    const double prominence = s[i] - base;
    if (prominence >= min_prominence) candidates.push_back({i, s[i], prominence, base});
  }

  // Enforce minimum separation, keeping the taller peak.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) { return x.height > y.height; });
  std::vector<Candidate> kept;
  for (const Candidate& c : candidates) {
    const double center = h.bin_center(c.idx);
    bool ok = true;
    for (const Candidate& k : kept) {
      if (std::abs(center - h.bin_center(k.idx)) < min_separation_s) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const Candidate& x, const Candidate& y) { return x.idx < y.idx; });

  std::vector<Peak> peaks;
  const double half_sep = min_separation_s / 2.0;
  for (const Candidate& c : kept) {
    Peak p;
    // Baseline-subtracted centroid over the bins where the smoothed curve
    // stays above half prominence: far less jittery than the raw argmax for
    // low, broad peaks riding on the tail of a taller neighbor.
    const double half_level = c.base + c.prominence / 2.0;
    std::size_t lo = c.idx, hi = c.idx;
    while (lo > 0 && s[lo - 1] >= half_level) --lo;
    while (hi + 1 < n && s[hi + 1] >= half_level) ++hi;
    double weight = 0.0, moment = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double w = std::max(static_cast<double>(h.counts[i]) - c.base, 0.0);
      weight += w;
      moment += w * h.bin_center(i);
    }
    p.center_s = weight > 0.0 ? moment / weight : h.bin_center(c.idx);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(h.bin_center(i) - p.center_s) <= half_sep) {
        p.area += static_cast<double>(h.counts[i]);
      }
    }
    peaks.push_back(p);
  }
  return peaks;
}

}  // namespace qtb
