#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rediffuse {

// Dense row-major f32 tensor. Shape (C,H,W) for images, (d) for point data.
struct ImageTensor {
  std::vector<uint32_t> shape;
  std::vector<float> data;

  ImageTensor() = default;
  explicit ImageTensor(std::vector<uint32_t> s) : shape(std::move(s)) {
    data.assign(checked_numel(shape), 0.0f);
  }
  ImageTensor(std::vector<uint32_t> s, std::vector<float> d);

  static size_t checked_numel(const std::vector<uint32_t>& shape);

  size_t numel() const { return data.size(); }
  bool same_shape(const ImageTensor& o) const { return shape == o.shape; }

  float operator[](size_t i) const { return data[i]; }
  float& operator[](size_t i) { return data[i]; }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const ImageTensor& o) const = default;
};

// Elementwise helpers shared by the samplers and the harnesses.
double l2_norm(const ImageTensor& a);
double l2_dist(const ImageTensor& a, const ImageTensor& b);
double linf_dist(const ImageTensor& a, const ImageTensor& b);

// Throws std::invalid_argument naming `where` on shape mismatch.
void require_same_shape(const ImageTensor& a, const ImageTensor& b,
                        const char* where);
// Throws PhaseError if the tensor holds NaN/Inf.
void require_finite(const ImageTensor& t, const char* where);

}  // namespace rediffuse
