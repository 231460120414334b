#include "qtb/histogram.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "qtb/errors.hpp"

namespace qtb {

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot open histogram output");
  out << "bin_center_s,count\n";
  out.precision(15);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << h.bin_center(i) << ',' << h.counts[i] << '\n';
  }
}

Histogram read_histogram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open histogram input");
  std::string line;
  std::vector<double> centers;
  Histogram h;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("bin_center_s", 0) != 0) throw ConfigError(path, "expected bin_center_s,count header");
      header = true;
      continue;
    }
    std::istringstream ss(line);
    double c;
    char comma;
    std::uint64_t n;
    if (!(ss >> c >> comma >> n)) throw ConfigError(path, "malformed histogram row: " + line);
    centers.push_back(c);
    h.counts.push_back(n);
  }
  if (centers.size() < 2) throw ConfigError(path, "histogram needs at least 2 bins");
  h.bin_width_s = centers[1] - centers[0];
  h.origin_s = centers[0] - h.bin_width_s / 2.0;
  return h;
}

}  // namespace qtb
