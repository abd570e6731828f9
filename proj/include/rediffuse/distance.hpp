#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rediffuse/mlp.hpp"
#include "rediffuse/tensor.hpp"

namespace rediffuse {

// D(x, x-hat): how far a reconstruction sits from its source. Lp and SSIM
// forms are symmetric and zero on identical inputs; the learned classifier
// form is a signed score (minus a probability) and promises neither.
class DistanceFn {
 public:
  virtual ~DistanceFn() = default;
  virtual double dist(const ImageTensor& a, const ImageTensor& b) const = 0;
  virtual std::string name() const = 0;
};

// Mean over elements of |a_i - b_i|^p.
double dist_lp(const ImageTensor& a, const ImageTensor& b, int p);

// 1 - mean local SSIM. Gaussian 11x11 sigma 1.5 windows (valid mode); images
// with side < 11 fall back to one global uniform window. Inputs must be 2-D
// with values in [0,1] (1e-6 slack).
double dist_ssim(const ImageTensor& a, const ImageTensor& b);
double mean_ssim(const ImageTensor& a, const ImageTensor& b);

class LpDistance final : public DistanceFn {
 public:
  explicit LpDistance(int p);
  double dist(const ImageTensor& a, const ImageTensor& b) const override {
    return dist_lp(a, b, p_);
  }
  std::string name() const override { return "l" + std::to_string(p_); }

 private:
  int p_;
};

class SsimDistance final : public DistanceFn {
 public:
  double dist(const ImageTensor& a, const ImageTensor& b) const override {
    return dist_ssim(a, b);
  }
  std::string name() const override { return "ssim"; }
};

// Binary classifier over the flattened absolute difference |x - x-hat|.
class DiffClassifier {
 public:
  DiffClassifier() = default;
  DiffClassifier(size_t input_dim, int width, uint64_t seed);

  // f_R(|x - xhat|): probability the pair came from a member.
  float prob_member(const ImageTensor& x, const ImageTensor& xhat) const;
  size_t input_dim() const { return net_.widths.empty() ? 0 : net_.widths[0]; }

  DenseNet<float>& net() { return net_; }
  const DenseNet<float>& net() const { return net_; }

  // Indices of `pairs` used for fitting vs held out, set by the trainer.
  std::vector<size_t> train_index;
  std::vector<size_t> eval_index;

 private:
  DenseNet<float> net_;
};

struct LabeledPair {
  ImageTensor x;
  ImageTensor xhat;
  bool is_member = false;
};

// Fits the classifier on a seeded shuffle's first `fraction` of pairs and
// records the train/eval index split on the returned object. Throws
// TrainingError when the training slice is single-class.
DiffClassifier train_distance_classifier(const std::vector<LabeledPair>& pairs,
                                         double fraction, uint64_t seed = 0,
                                         int epochs = 300, double lr = 1e-2);

// D(x, xhat) = -f_R(|x - xhat|), so that the negated-distance score used
// everywhere becomes the member probability itself.
class ClassifierDistance final : public DistanceFn {
 public:
  explicit ClassifierDistance(const DiffClassifier& clf) : clf_(clf) {}
  double dist(const ImageTensor& a, const ImageTensor& b) const override {
    return -double(clf_.prob_member(a, b));
  }
  std::string name() const override { return "classifier"; }

 private:
  const DiffClassifier& clf_;
};

}  // namespace rediffuse
