#include "rediffuse/denoiser.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace rediffuse {

namespace {

class MemorizedDenoiser final : public DenoiserModel {
 public:
  MemorizedDenoiser(std::vector<ImageTensor> points, NoiseSchedule sched)
      : points_(std::move(points)), sched_(std::move(sched)) {
    if (points_.empty())
      throw std::invalid_argument("memorized denoiser: empty point set");
    for (const auto& p : points_) require_same_shape(points_[0], p, "memorized denoiser");
  }

  ImageTensor predict(const ImageTensor& x_t, int t) const override {
    require_same_shape(points_[0], x_t, "memorized denoiser");
    double ab = sched_.alpha_bar(t);
    double sa = std::sqrt(ab);
    double rv = 1.0 - ab;
    size_t n = x_t.data.size();

    // Posterior mean over the point set; the mixture of single-point
    // predictions collapses to the single-point formula at that mean.
    std::vector<double> mean(n, 0.0);
    if (points_.size() == 1) {
      for (size_t j = 0; j < n; ++j) mean[j] = double(points_[0].data[j]);
    } else {
      std::vector<double> logw(points_.size());
      double logw_max = -1e300;
      for (size_t i = 0; i < points_.size(); ++i) {
        double d2 = 0.0;
        for (size_t j = 0; j < n; ++j) {
          double d = double(x_t.data[j]) - sa * double(points_[i].data[j]);
          d2 += d * d;
        }
        logw[i] = -d2 / (2.0 * rv);
        if (logw[i] > logw_max) logw_max = logw[i];
      }
      double wsum = 0.0;
      for (size_t i = 0; i < points_.size(); ++i) {
        double w = std::exp(logw[i] - logw_max);
        wsum += w;
        for (size_t j = 0; j < n; ++j)
          mean[j] += w * double(points_[i].data[j]);
      }
      for (size_t j = 0; j < n; ++j) mean[j] /= wsum;
    }

    ImageTensor out(x_t.shape);
    double inv = 1.0 / std::sqrt(rv);
    for (size_t j = 0; j < n; ++j)
      out.data[j] = float((double(x_t.data[j]) - sa * mean[j]) * inv);
    return out;
  }

  size_t parameter_count() const override {
    return points_.size() * points_[0].data.size();
  }

 private:
  std::vector<ImageTensor> points_;
  NoiseSchedule sched_;
};

class GaussianDenoiser final : public DenoiserModel {
 public:
  GaussianDenoiser(ImageTensor mu, double sigma2, NoiseSchedule sched)
      : mu_(std::move(mu)), sigma2_(sigma2), sched_(std::move(sched)) {
    if (!(sigma2_ > 0.0))
      throw std::invalid_argument("gaussian denoiser: sigma2 must be > 0");
  }

  ImageTensor predict(const ImageTensor& x_t, int t) const override {
    require_same_shape(mu_, x_t, "gaussian denoiser");
    double ab = sched_.alpha_bar(t);
    double sa = std::sqrt(ab);
    double rv = 1.0 - ab;
    double scale = std::sqrt(rv) / (ab * sigma2_ + rv);
    ImageTensor out(x_t.shape);
    for (size_t j = 0; j < x_t.data.size(); ++j)
      out.data[j] =
          float(scale * (double(x_t.data[j]) - sa * double(mu_.data[j])));
    return out;
  }

  size_t parameter_count() const override { return mu_.data.size() + 1; }

 private:
  ImageTensor mu_;
  double sigma2_;
  NoiseSchedule sched_;
};

}  // namespace

std::unique_ptr<DenoiserModel> memorized_denoiser(
    std::vector<ImageTensor> points, NoiseSchedule sched) {
  return std::make_unique<MemorizedDenoiser>(std::move(points),
                                             std::move(sched));
}

std::unique_ptr<DenoiserModel> gaussian_denoiser(ImageTensor mu, double sigma2,
                                                 NoiseSchedule sched) {
  return std::make_unique<GaussianDenoiser>(std::move(mu), sigma2,
                                            std::move(sched));
}

ImageTensor FixedPredictionModel::predict(const ImageTensor& x_t, int) const {
  require_same_shape(eps_, x_t, "fixed prediction");
  return eps_;
}

ImageTensor BiasedModel::predict(const ImageTensor& x_t, int t) const {
  ImageTensor out = inner_.predict(x_t, t);
  for (float& v : out.data) v += bias_;
  return out;
}

}  // namespace rediffuse
