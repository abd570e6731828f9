#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "rediffuse/schedule.hpp"
#include "rediffuse/tensor.hpp"

namespace rediffuse {

// Noise predictor interface. predict must be a pure function of (x_t, t) and
// frozen parameters: identical inputs give bit-identical outputs, which the
// determinism tests rely on.
class DenoiserModel {
 public:
  virtual ~DenoiserModel() = default;
  virtual ImageTensor predict(const ImageTensor& x_t, int t) const = 0;
  virtual size_t parameter_count() const = 0;
};

// Closed-form stand-ins for a perfectly trained model.
//
// Memorized on a single point x*: predict = (x_t - sqrt(abar_t) x*) /
// sqrt(1 - abar_t), the exact inversion of forward noising. With several
// points the predictions are blended with posterior weights
// w_i ∝ exp(-|x_t - sqrt(abar_t) x_i|^2 / (2 (1 - abar_t))).
std::unique_ptr<DenoiserModel> memorized_denoiser(
    std::vector<ImageTensor> points, NoiseSchedule sched);

// Gaussian data law N(mu, sigma2 I):
// predict = sqrt(1 - abar_t) (x_t - sqrt(abar_t) mu) / (abar_t sigma2 + 1 - abar_t).
std::unique_ptr<DenoiserModel> gaussian_denoiser(ImageTensor mu, double sigma2,
                                                 NoiseSchedule sched);

// Always predicts the stored tensor. Handy for algebraic tests where the
// true eps is known.
class FixedPredictionModel final : public DenoiserModel {
 public:
  explicit FixedPredictionModel(ImageTensor eps) : eps_(std::move(eps)) {}
  ImageTensor predict(const ImageTensor& x_t, int) const override;
  size_t parameter_count() const override { return eps_.data.size(); }

 private:
  ImageTensor eps_;
};

class ZeroModel final : public DenoiserModel {
 public:
  ImageTensor predict(const ImageTensor& x_t, int) const override {
    return ImageTensor(x_t.shape);
  }
  size_t parameter_count() const override { return 0; }
};

// Wraps a model and adds a constant bias to every predicted component.
class BiasedModel final : public DenoiserModel {
 public:
  BiasedModel(const DenoiserModel& inner, float bias)
      : inner_(inner), bias_(bias) {}
  ImageTensor predict(const ImageTensor& x_t, int t) const override;
  size_t parameter_count() const override { return inner_.parameter_count(); }

 private:
  const DenoiserModel& inner_;
  float bias_;
};

}  // namespace rediffuse
