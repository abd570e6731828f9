#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rediffuse/tensor.hpp"

namespace rediffuse {

// Everything needed to re-render a procedural image. Re-rendering from the
// descriptor must reproduce the stored pixels bit-for-bit.
struct ShapeDescriptor {
  std::string kind;     // rect | disc | cross
  int cx = 0, cy = 0;   // center, pixels
  int a = 0;            // half-width (rect), radius (disc), arm length (cross)
  int b = 0;            // half-height (rect), unused (disc), arm thickness (cross)
  float fill = 0.0f;    // primary intensity
  std::string texture = "solid";  // solid | stripes | checker
  int stripe_width = 2;
  float fill2 = 0.0f;   // secondary intensity for textured fills
};

class Dataset {
 public:
  std::vector<ImageTensor> samples;
  std::vector<ShapeDescriptor> descriptors;  // empty for point clouds
  uint64_t seed = 0;
  std::string kind;  // gmm | shapes | style_shift

  size_t size() const { return samples.size(); }

  // Counted access path. Training goes through this so tests can prove that
  // nonmember rows were never read.
  const ImageTensor& sample(size_t i) const;
  uint64_t accesses(size_t i) const { return access_count_[i]; }
  void reset_access_counts() const;

  // Direct access for evaluation code that is allowed to see everything.
  const ImageTensor& peek(size_t i) const { return samples[i]; }

  void init_counters() const;

 private:
  mutable std::vector<uint64_t> access_count_;
};

struct MembershipSplit {
  std::vector<size_t> members;
  std::vector<size_t> nonmembers;
};

// Points from a K-component Gaussian mixture, means on a seeded lattice,
// values clamped into [0,1]^d.
Dataset gen_gmm_dataset(size_t n, size_t d, size_t K, uint64_t seed,
                        double sigma = 0.05);

// Grayscale side x side images, one shape each (rectangle, disc, or cross)
// with seeded position, size, and fill; descriptor recorded.
Dataset gen_shape_dataset(size_t n, uint32_t side, uint64_t seed);

// Same geometry, different style: fills become striped or checkered with a
// remapped palette. Stand-in for nonmembers that match members in content.
Dataset style_shift(const Dataset& ds, uint64_t seed);

ImageTensor render_shape(const ShapeDescriptor& desc, uint32_t side);

// Seeded uniform 50/50 partition (members get floor(n/2)).
MembershipSplit split_members(const Dataset& ds, uint64_t seed);

// Directory layout: sample_<i>.tnsr files plus manifest.json carrying the
// seed, kind, descriptors, and split.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const MembershipSplit& split);
std::pair<Dataset, MembershipSplit> load_dataset(
    const std::filesystem::path& dir);

}  // namespace rediffuse
