#include "rediffuse/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rediffuse {

IdentityCodec::IdentityCodec(std::vector<uint32_t> image_shape)
    : image_shape_(std::move(image_shape)) {
  dim_ = ImageTensor::checked_numel(image_shape_);
}

ImageTensor IdentityCodec::encode(const ImageTensor& x) const {
  if (x.data.size() != dim_)
    throw std::invalid_argument("identity codec: size mismatch");
  return ImageTensor({uint32_t(dim_)}, x.data);
}

ImageTensor IdentityCodec::decode(const ImageTensor& z) const {
  if (z.data.size() != dim_)
    throw std::invalid_argument("identity codec: size mismatch");
  return ImageTensor(image_shape_, z.data);
}

void symmetric_eigen(std::vector<double> a, size_t n,
                     std::vector<double>& values, std::vector<double>& vecs) {
  if (a.size() != n * n) throw std::invalid_argument("eigen: bad matrix size");
  vecs.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;

  double fro = 0.0;
  for (double v : a) fro += v * v;
  double tol = 1e-14 * std::sqrt(fro) + 1e-300;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (std::sqrt(2.0 * off) <= tol) break;

    for (size_t p = 0; p + 1 < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::abs(apq) <= tol / double(n)) continue;
        double app = a[p * n + p], aqq = a[q * n + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = vecs[k * n + p], vkq = vecs[k * n + q];
          vecs[k * n + p] = c * vkp - s * vkq;
          vecs[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  values.resize(n);
  for (size_t i = 0; i < n; ++i) values[i] = a[i * n + i];

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return values[i] > values[j]; });
  std::vector<double> sorted_vals(n), sorted_vecs(n * n);
  for (size_t j = 0; j < n; ++j) {
    sorted_vals[j] = values[order[j]];
    for (size_t i = 0; i < n; ++i)
      sorted_vecs[i * n + j] = vecs[i * n + order[j]];
  }
  values = std::move(sorted_vals);
  vecs = std::move(sorted_vecs);
}

PcaCodec::PcaCodec(const std::vector<ImageTensor>& fit_set, size_t m) : m_(m) {
  if (fit_set.empty()) throw std::invalid_argument("pca codec: empty fit set");
  image_shape_ = fit_set[0].shape;
  d_ = fit_set[0].data.size();
  if (m_ == 0 || m_ > d_)
    throw std::invalid_argument("pca codec: need 1 <= m <= input dim");
  for (const auto& x : fit_set)
    require_same_shape(fit_set[0], x, "pca codec");

  size_t N = fit_set.size();
  mean_.assign(d_, 0.0);
  for (const auto& x : fit_set)
    for (size_t j = 0; j < d_; ++j) mean_[j] += double(x.data[j]);
  for (double& v : mean_) v /= double(N);

  std::vector<double> cov(d_ * d_, 0.0);
  std::vector<double> c(d_);
  for (const auto& x : fit_set) {
    for (size_t j = 0; j < d_; ++j) c[j] = double(x.data[j]) - mean_[j];
    for (size_t i = 0; i < d_; ++i) {
      double ci = c[i];
      for (size_t j = i; j < d_; ++j) cov[i * d_ + j] += ci * c[j];
    }
  }
  for (size_t i = 0; i < d_; ++i)
    for (size_t j = i; j < d_; ++j) {
      cov[i * d_ + j] /= double(N);
      cov[j * d_ + i] = cov[i * d_ + j];
    }

  std::vector<double> vals, vecs;
  symmetric_eigen(std::move(cov), d_, vals, vecs);
  eigenvalues_.assign(vals.begin(), vals.begin() + ptrdiff_t(m_));
  basis_.resize(d_ * m_);
  for (size_t i = 0; i < d_; ++i)
    for (size_t j = 0; j < m_; ++j) basis_[i * m_ + j] = vecs[i * d_ + j];

  double err = 0.0;
  for (const auto& x : fit_set) err += l2_dist(decode(encode(x)), x);
  round_trip_error_ = err / double(N);
}

ImageTensor PcaCodec::encode(const ImageTensor& x) const {
  if (x.data.size() != d_)
    throw std::invalid_argument("pca codec: size mismatch");
  ImageTensor z({uint32_t(m_)});
  for (size_t j = 0; j < m_; ++j) {
    double acc = 0.0;
    for (size_t i = 0; i < d_; ++i)
      acc += basis_[i * m_ + j] * (double(x.data[i]) - mean_[i]);
    z.data[j] = float(acc);
  }
  return z;
}

ImageTensor PcaCodec::decode(const ImageTensor& z) const {
  if (z.data.size() != m_)
    throw std::invalid_argument("pca codec: size mismatch");
  ImageTensor x(image_shape_);
  for (size_t i = 0; i < d_; ++i) {
    double acc = mean_[i];
    for (size_t j = 0; j < m_; ++j)
      acc += basis_[i * m_ + j] * double(z.data[j]);
    x.data[i] = float(acc);
  }
  return x;
}

}  // namespace rediffuse
