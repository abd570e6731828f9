#include "rediffuse/rng.hpp"

#include <cmath>

namespace rediffuse {

uint64_t fnv1a64(const void* bytes, size_t len) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Rng::normal_pair(double& z0, double& z1) {
  // u1 in (0,1] keeps the log finite.
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

float Rng::next_normal() {
  double z0, z1;
  normal_pair(z0, z1);
  return float(z0);
}

void Rng::fill_normal(float* dst, size_t n) {
  size_t i = 0;
  while (i + 1 < n) {
    double z0, z1;
    normal_pair(z0, z1);
    dst[i] = float(z0);
    dst[i + 1] = float(z1);
    i += 2;
  }
  if (i < n) {
    double z0, z1;
    normal_pair(z0, z1);
    dst[i] = float(z0);
  }
}

}  // namespace rediffuse
