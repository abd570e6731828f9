#pragma once

#include <memory>
#include <vector>

#include "rediffuse/tensor.hpp"

namespace rediffuse {

// Encoder/decoder pair bridging image space and the latent space a latent
// diffusion model operates in.
class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  virtual ImageTensor encode(const ImageTensor& x) const = 0;
  virtual ImageTensor decode(const ImageTensor& z) const = 0;
  virtual size_t latent_dim() const = 0;
  // Mean reconstruction L2 error over the fitting set, frozen at build time.
  virtual double round_trip_error() const = 0;
};

// Flatten/reshape only; decode(encode(x)) is x bit-for-bit.
class IdentityCodec final : public LatentCodec {
 public:
  explicit IdentityCodec(std::vector<uint32_t> image_shape);
  ImageTensor encode(const ImageTensor& x) const override;
  ImageTensor decode(const ImageTensor& z) const override;
  size_t latent_dim() const override { return dim_; }
  double round_trip_error() const override { return 0.0; }

 private:
  std::vector<uint32_t> image_shape_;
  size_t dim_ = 0;
};

// Least-squares linear autoencoder: principal subspace of the fitting set.
// encode: z = W^T (x - mean); decode: x = W z + mean. The basis comes from a
// cyclic Jacobi eigensolver on the sample covariance, run in double.
class PcaCodec final : public LatentCodec {
 public:
  PcaCodec(const std::vector<ImageTensor>& fit_set, size_t m);
  ImageTensor encode(const ImageTensor& x) const override;
  ImageTensor decode(const ImageTensor& z) const override;
  size_t latent_dim() const override { return m_; }
  double round_trip_error() const override { return round_trip_error_; }

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

 private:
  std::vector<uint32_t> image_shape_;
  size_t d_ = 0, m_ = 0;
  std::vector<double> mean_;
  std::vector<double> basis_;  // d x m, column j = eigenvector j
  std::vector<double> eigenvalues_;
  double round_trip_error_ = 0.0;
};

// Eigenpairs of a symmetric matrix (row-major, n x n), eigenvalues sorted
// descending with matching columns in vecs.
void symmetric_eigen(std::vector<double> a, size_t n,
                     std::vector<double>& values, std::vector<double>& vecs);

}  // namespace rediffuse
