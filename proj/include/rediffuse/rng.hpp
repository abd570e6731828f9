#pragma once

#include <cstddef>
#include <cstdint>

namespace rediffuse {

// splitmix64 finalizer. Integer-only, so identical on every host.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless avalanche mixing of (experiment, sample, repeat). Every parallel
// work item draws its own seed from this, which is what makes thread count
// irrelevant to results.
inline uint64_t derive_seed(uint64_t experiment_seed, uint64_t sample_id,
                            uint32_t repeat_index) {
  uint64_t h = mix64(experiment_seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (sample_id + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (uint64_t(repeat_index) + 0x9e3779b97f4a7c15ULL));
  return h;
}

// FNV-1a, used for content-addressed seeds and config hashes.
uint64_t fnv1a64(const void* bytes, size_t len);

// Deterministic generator (splitmix64 stream + Box-Muller normals).
// Not std::mt19937 + std::normal_distribution: the distribution's algorithm
// is implementation-defined, and the score tables must replay exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0,1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
  float next_float() { return float(next_u64() >> 40) * 0x1.0p-24f; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Standard normals. Each scalar call consumes one fresh Box-Muller pair so
  // the stream position is a pure function of the call count.
  float next_normal();
  void fill_normal(float* dst, size_t n);

  // Normal pair computed in double; float paths truncate.
  void normal_pair(double& z0, double& z1);

 private:
  uint64_t state_;
};

}  // namespace rediffuse
