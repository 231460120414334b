#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qtb {

/// Uniform-bin counts over a time axis (absolute or delay; the origin may be
/// negative for delay axes). Bin i covers [origin + i*w, origin + (i+1)*w).
struct Histogram {
  double bin_width_s = 0.0;
  double origin_s = 0.0;
  std::vector<std::uint64_t> counts;

  double bin_center(std::size_t i) const { return origin_s + (i + 0.5) * bin_width_s; }
  std::uint64_t total() const;
};

void write_histogram_csv(const Histogram& h, const std::string& path);
Histogram read_histogram_csv(const std::string& path);

}  // namespace qtb
