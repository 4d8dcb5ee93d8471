#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cablesoup {

// A real-valued function sampled on the dyadic grid {k * span / 2^levels}.
// Carries enough metadata (kind, seed, stream) for a dump to be reproducible.
struct DyadicPath {
  double span = 1.0;
  int levels = 0;
  std::vector<double> values;  // 2^levels + 1 entries

  std::string kind;
  std::uint64_t seed = 0;
  std::string stream;

  std::size_t size() const { return values.size(); }
  double dx() const { return span / static_cast<double>(size() - 1); }
  double position(std::size_t i) const { return span * static_cast<double>(i) / static_cast<double>(size() - 1); }

  static DyadicPath with_levels(double span, int levels);
};

void write_csv(const DyadicPath& path, std::ostream& out);
void write_csv(const DyadicPath& path, const std::string& filename);
DyadicPath read_path_csv(std::istream& in);
DyadicPath read_path_csv(const std::string& filename);

}  // namespace cablesoup
