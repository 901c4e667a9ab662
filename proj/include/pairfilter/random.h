#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace pairfilter {

// Seeded draws built only on mt19937_64, whose output sequence is fixed by the
// standard. The std distributions are implementation-defined, so they are
// avoided wherever a seed must reproduce byte-identical results.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  std::size_t Index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  int Between(int lo, int hi) {
    return lo + static_cast<int>(Index(static_cast<std::size_t>(hi - lo + 1)));
  }
  // Uniform in [0, 1).
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Standard normal via Box-Muller.
  double Normal() {
    const double u1 = 1.0 - Unit();
    const double u2 = Unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pairfilter
