#include "rediffuse/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rediffuse/errors.hpp"
#include "rediffuse/rng.hpp"

namespace rediffuse {

double dist_lp(const ImageTensor& a, const ImageTensor& b, int p) {
  require_same_shape(a, b, "dist_lp");
  if (p < 1 || p > 8) throw std::invalid_argument("dist_lp: need 1 <= p <= 8");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = std::abs(double(a.data[i]) - double(b.data[i]));
    double term = d;
    for (int k = 1; k < p; ++k) term *= d;
    acc += term;
  }
  return acc / double(a.data.size());
}

namespace {

constexpr double kC1 = 1e-4;   // (0.01)^2
constexpr double kC2 = 9e-4;   // (0.03)^2

void check_ssim_input(const ImageTensor& t, const char* which) {
  if (t.shape.size() != 2)
    throw std::invalid_argument(std::string("ssim: ") + which +
                                " is not a 2-D image");
  for (float v : t.data)
    if (v < -1e-6f || v > 1.0f + 1e-6f)
      throw std::invalid_argument(std::string("ssim: ") + which +
                                  " has values outside [0,1]");
}

double ssim_from_moments(double mu_a, double mu_b, double va, double vb,
                         double vab) {
  double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * vab + kC2);
  double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (va + vb + kC2);
  return num / den;
}

}  // namespace

double mean_ssim(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "ssim");
  check_ssim_input(a, "first image");
  check_ssim_input(b, "second image");
  size_t H = a.shape[0], W = a.shape[1];

  if (H < 11 || W < 11) {
    // one global uniform window
    double n = double(H * W);
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
      double x = a.data[i], y = b.data[i];
      sa += x;
      sb += y;
      saa += x * x;
      sbb += y * y;
      sab += x * y;
    }
    double mu_a = sa / n, mu_b = sb / n;
    return ssim_from_moments(mu_a, mu_b, saa / n - mu_a * mu_a,
                             sbb / n - mu_b * mu_b, sab / n - mu_a * mu_b);
  }

  // 11x11 Gaussian window, sigma 1.5, normalized to sum 1
  double w[11][11];
  double wsum = 0.0;
  for (int dy = -5; dy <= 5; ++dy)
    for (int dx = -5; dx <= 5; ++dx) {
      double g = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5));
      w[dy + 5][dx + 5] = g;
      wsum += g;
    }
  for (auto& row : w)
    for (double& v : row) v /= wsum;

  double total = 0.0;
  size_t count = 0;
  for (size_t cy = 5; cy + 5 < H; ++cy) {
    for (size_t cx = 5; cx + 5 < W; ++cx) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = -5; dy <= 5; ++dy)
        for (int dx = -5; dx <= 5; ++dx) {
          double wt = w[dy + 5][dx + 5];
          size_t idx = (cy + size_t(dy + 5) - 5) * W + (cx + size_t(dx + 5) - 5);
          double x = a.data[idx], y = b.data[idx];
          sa += wt * x;
          sb += wt * y;
          saa += wt * x * x;
          sbb += wt * y * y;
          sab += wt * x * y;
        }
      total += ssim_from_moments(sa, sb, saa - sa * sa, sbb - sb * sb,
                                 sab - sa * sb);
      ++count;
    }
  }
  return total / double(count);
}

double dist_ssim(const ImageTensor& a, const ImageTensor& b) {
  return 1.0 - mean_ssim(a, b);
}

LpDistance::LpDistance(int p) : p_(p) {
  if (p < 1 || p > 8)
    throw std::invalid_argument("LpDistance: need 1 <= p <= 8");
}

DiffClassifier::DiffClassifier(size_t input_dim, int width, uint64_t seed) {
  net_.init({input_dim, size_t(width), 1}, OutputAct::sigmoid, seed);
}

float DiffClassifier::prob_member(const ImageTensor& x,
                                  const ImageTensor& xhat) const {
  require_same_shape(x, xhat, "classifier distance");
  if (x.data.size() != input_dim())
    throw std::invalid_argument("classifier: input size mismatch");
  std::vector<float> diff(x.data.size());
  for (size_t i = 0; i < diff.size(); ++i)
    diff[i] = std::abs(x.data[i] - xhat.data[i]);
  DenseNet<float>::Workspace ws;
  net_.forward(diff.data(), ws);
  return ws.a.back()[0];
}

DiffClassifier train_distance_classifier(const std::vector<LabeledPair>& pairs,
                                         double fraction, uint64_t seed,
                                         int epochs, double lr) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("classifier: fraction must be in (0,1)");
  if (pairs.size() < 2)
    throw std::invalid_argument("classifier: need at least 2 pairs");
  if (epochs < 1 || !(lr > 0.0))
    throw std::invalid_argument("classifier: bad epochs or lr");

  size_t N = pairs.size();
  std::vector<size_t> idx(N);
  for (size_t i = 0; i < N; ++i) idx[i] = i;
  Rng shuffle_rng(derive_seed(seed, N, 1));
  for (size_t i = N - 1; i > 0; --i) {
    size_t j = size_t(shuffle_rng.next_below(i + 1));
    std::swap(idx[i], idx[j]);
  }
  size_t n_train = std::max<size_t>(1, size_t(fraction * double(N)));

  size_t members = 0;
  for (size_t i = 0; i < n_train; ++i) members += pairs[idx[i]].is_member;
  if (members == 0 || members == n_train)
    throw TrainingError("classifier training slice is single-class");

  size_t d = pairs[0].x.data.size();
  DiffClassifier clf(d, 32, derive_seed(seed, 0, 2));
  clf.train_index.assign(idx.begin(), idx.begin() + ptrdiff_t(n_train));
  clf.eval_index.assign(idx.begin() + ptrdiff_t(n_train), idx.end());

  std::vector<std::vector<float>> feats(n_train, std::vector<float>(d));
  std::vector<float> labels(n_train);
  for (size_t i = 0; i < n_train; ++i) {
    const LabeledPair& p = pairs[idx[i]];
    require_same_shape(p.x, p.xhat, "classifier training");
    if (p.x.data.size() != d)
      throw std::invalid_argument("classifier: inconsistent pair sizes");
    for (size_t j = 0; j < d; ++j)
      feats[i][j] = std::abs(p.x.data[j] - p.xhat.data[j]);
    labels[i] = p.is_member ? 1.0f : 0.0f;
  }

  DenseNet<float>& net = clf.net();
  Adam<float> opt;
  opt.lr = lr;
  std::vector<float> grad(net.params.size());
  DenseNet<float>::Workspace ws;
  std::vector<float> dLdout(1);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0f);
    double loss = 0.0;
    for (size_t i = 0; i < n_train; ++i) {
      net.forward(feats[i].data(), ws);
      // clamp keeps the cross-entropy finite on saturated outputs
      double p = std::clamp(double(ws.a.back()[0]), 1e-7, 1.0 - 1e-7);
      double y = labels[i];
      loss += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
      dLdout[0] = float((-(y / p) + (1.0 - y) / (1.0 - p)) / double(n_train));
      net.backward(dLdout.data(), ws, grad);
    }
    if (!std::isfinite(loss))
      throw TrainingError("classifier loss diverged at epoch " +
                          std::to_string(epoch));
    opt.step(net.params, grad);
  }
  return clf;
}

}  // namespace rediffuse
