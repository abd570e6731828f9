#include "rediffuse/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rediffuse/errors.hpp"

namespace rediffuse {

size_t ImageTensor::checked_numel(const std::vector<uint32_t>& shape) {
  size_t n = 1;
  for (uint32_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor: zero-sized dimension");
    if (n > std::numeric_limits<size_t>::max() / d)
      throw std::invalid_argument("tensor: dimension overflow");
    n *= d;
  }
  return n;
}

ImageTensor::ImageTensor(std::vector<uint32_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != checked_numel(shape))
    throw std::invalid_argument("tensor: data length " +
                                std::to_string(data.size()) +
                                " does not match shape product");
}

double l2_norm(const ImageTensor& a) {
  double s = 0.0;
  for (float v : a.data) s += double(v) * double(v);
  return std::sqrt(s);
}

double l2_dist(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "l2_dist");
  double s = 0.0;
  for (size_t i = 0; i < a.numel(); ++i) {
    double d = double(a.data[i]) - double(b.data[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double linf_dist(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "linf_dist");
  double m = 0.0;
  for (size_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(double(a.data[i]) - double(b.data[i])));
  return m;
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b,
                        const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch");
}

void require_finite(const ImageTensor& t, const char* where) {
  if (!t.all_finite())
    throw PhaseError(where, "tensor holds non-finite values");
}

}  // namespace rediffuse
