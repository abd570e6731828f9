#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rediffuse/dataset.hpp"
#include "rediffuse/denoiser.hpp"
#include "rediffuse/rng.hpp"
#include "rediffuse/schedule.hpp"

namespace rediffuse {

enum class OutputAct { linear, sigmoid };

// Eight fixed accumulator lanes combined in a fixed tree. GCC will not
// vectorize a plain float reduction without fast-math, and fast-math would
// cost bit-reproducibility; this form gets SIMD while keeping the summation
// order a constant of the program.
template <typename S>
inline S dot_lanes(const S* w, const S* x, size_t n) {
  S acc[8] = {S(0), S(0), S(0), S(0), S(0), S(0), S(0), S(0)};
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (size_t l = 0; l < 8; ++l) acc[l] += w[i + l] * x[i + l];
  for (size_t l = 0; i < n; ++i, ++l) acc[l] += w[i] * x[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// Sinusoidal features of the step index, geometric frequency ladder from 1
// down to 1/10000.
template <typename S>
inline void time_embedding(double t, size_t dim, S* out) {
  size_t half = dim / 2;
  for (size_t i = 0; i < half; ++i) {
    double f = std::exp(-std::log(10000.0) * double(i) / double(half));
    out[2 * i] = S(std::sin(t * f));
    out[2 * i + 1] = S(std::cos(t * f));
  }
}

// Fully-connected net with SiLU hidden units. Templated on the scalar so the
// gradient-check tests can run the identical code in double against finite
// differences.
template <typename S>
struct DenseNet {
  std::vector<size_t> widths;  // including input and output
  OutputAct out_act = OutputAct::linear;
  std::vector<S> params;       // per layer: weights row-major, then biases

  struct Workspace {
    std::vector<std::vector<S>> a;      // activations, a[0] is the input
    std::vector<std::vector<S>> z;      // pre-activations, z[l] feeds a[l+1]
    std::vector<std::vector<S>> delta;  // backprop scratch
  };

  size_t layers() const { return widths.size() - 1; }

  size_t layer_offset(size_t l) const {
    size_t off = 0;
    for (size_t k = 0; k < l; ++k)
      off += widths[k] * widths[k + 1] + widths[k + 1];
    return off;
  }

  size_t param_count() const { return layer_offset(layers()); }

  void init(std::vector<size_t> w, OutputAct act, uint64_t seed) {
    widths = std::move(w);
    out_act = act;
    params.assign(param_count(), S(0));
    Rng rng(seed);
    for (size_t l = 0; l < layers(); ++l) {
      size_t fan_in = widths[l], fan_out = widths[l + 1];
      double scale = std::sqrt(6.0 / double(fan_in + fan_out));
      S* w_ptr = params.data() + layer_offset(l);
      for (size_t i = 0; i < fan_in * fan_out; ++i)
        w_ptr[i] = S(scale * (2.0 * rng.next_double() - 1.0));
      // biases stay zero
    }
  }

  static S silu(S z) { return z / (S(1) + std::exp(-z)); }
  static S silu_grad(S z) {
    S s = S(1) / (S(1) + std::exp(-z));
    return s * (S(1) + z * (S(1) - s));
  }
  static S sigmoid(S z) { return S(1) / (S(1) + std::exp(-z)); }

  void ensure(Workspace& ws) const {
    if (ws.a.size() == widths.size()) return;
    ws.a.resize(widths.size());
    ws.z.resize(layers());
    ws.delta.resize(layers());
    for (size_t i = 0; i < widths.size(); ++i) ws.a[i].resize(widths[i]);
    for (size_t l = 0; l < layers(); ++l) {
      ws.z[l].resize(widths[l + 1]);
      ws.delta[l].resize(widths[l + 1]);
    }
  }

  // Fills ws.a / ws.z; the output lives in ws.a.back().
  void forward(const S* input, Workspace& ws) const {
    ensure(ws);
    std::copy(input, input + widths[0], ws.a[0].begin());
    for (size_t l = 0; l < layers(); ++l) {
      const S* w = params.data() + layer_offset(l);
      const S* b = w + widths[l] * widths[l + 1];
      const S* in = ws.a[l].data();
      for (size_t i = 0; i < widths[l + 1]; ++i)
        ws.z[l][i] = dot_lanes(w + i * widths[l], in, widths[l]) + b[i];
      bool last = l + 1 == layers();
      for (size_t i = 0; i < widths[l + 1]; ++i) {
        S z = ws.z[l][i];
        ws.a[l + 1][i] =
            last ? (out_act == OutputAct::sigmoid ? sigmoid(z) : z) : silu(z);
      }
    }
  }

  // dL/d(output) in dLdout; accumulates parameter gradients into grad.
  void backward(const S* dLdout, Workspace& ws, std::vector<S>& grad) const {
    size_t L = layers();
    for (size_t i = 0; i < widths[L]; ++i) {
      S z = ws.z[L - 1][i];
      S g = out_act == OutputAct::sigmoid
                ? sigmoid(z) * (S(1) - sigmoid(z))
                : S(1);
      ws.delta[L - 1][i] = dLdout[i] * g;
    }
    for (size_t l = L; l-- > 0;) {
      S* gw = grad.data() + layer_offset(l);
      S* gb = gw + widths[l] * widths[l + 1];
      const S* a_prev = ws.a[l].data();
      const S* d = ws.delta[l].data();
      for (size_t i = 0; i < widths[l + 1]; ++i) {
        S di = d[i];
        S* row = gw + i * widths[l];
        for (size_t j = 0; j < widths[l]; ++j) row[j] += di * a_prev[j];
        gb[i] += di;
      }
      if (l == 0) break;
      const S* w = params.data() + layer_offset(l);
      std::vector<S>& dprev = ws.delta[l - 1];
      std::fill(dprev.begin(), dprev.end(), S(0));
      for (size_t i = 0; i < widths[l + 1]; ++i) {
        S di = d[i];
        const S* row = w + i * widths[l];
        for (size_t j = 0; j < widths[l]; ++j) dprev[j] += di * row[j];
      }
      for (size_t j = 0; j < widths[l]; ++j)
        dprev[j] *= silu_grad(ws.z[l - 1][j]);
    }
  }
};

// Adaptive-moment optimizer; the per-element update runs in double so float
// and double nets share one code path.
template <typename S>
struct Adam {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<S> m, v;
  long steps = 0;

  void step(std::vector<S>& p, const std::vector<S>& g) {
    if (m.empty()) {
      m.assign(p.size(), S(0));
      v.assign(p.size(), S(0));
    }
    ++steps;
    double c1 = 1.0 - std::pow(beta1, double(steps));
    double c2 = 1.0 - std::pow(beta2, double(steps));
    for (size_t i = 0; i < p.size(); ++i) {
      double gi = double(g[i]);
      double mi = beta1 * double(m[i]) + (1.0 - beta1) * gi;
      double vi = beta2 * double(v[i]) + (1.0 - beta2) * gi * gi;
      m[i] = S(mi);
      v[i] = S(vi);
      p[i] = S(double(p[i]) - lr * (mi / c1) / (std::sqrt(vi / c2) + eps));
    }
  }
};

struct TrainConfig {
  int steps = 12000;
  int batch_size = 32;
  int width = 128;
  int depth = 3;  // hidden layers
  int time_dim = 16;
  double lr = 1e-3;
  uint64_t seed = 0;
  int log_every = 500;  // loss-history window
};

class MlpDenoiser final : public DenoiserModel {
 public:
  MlpDenoiser() = default;
  MlpDenoiser(std::vector<uint32_t> data_shape, int width, int depth,
              int time_dim, uint64_t init_seed);

  ImageTensor predict(const ImageTensor& x_t, int t) const override;
  size_t parameter_count() const override { return net_.params.size(); }

  void save(const std::filesystem::path& dir) const;
  static MlpDenoiser load(const std::filesystem::path& dir);

  const std::vector<double>& loss_history() const { return loss_history_; }
  const std::vector<uint32_t>& data_shape() const { return data_shape_; }
  int time_dim() const { return time_dim_; }

  DenseNet<float>& net() { return net_; }
  const DenseNet<float>& net() const { return net_; }
  void set_loss_history(std::vector<double> h) { loss_history_ = std::move(h); }

 private:
  std::vector<uint32_t> data_shape_;
  int time_dim_ = 16;
  DenseNet<float> net_;
  std::vector<double> loss_history_;
};

// Denoising-score-matching training over split.members only, via the counted
// Dataset::sample path. Deterministic for a fixed config.
MlpDenoiser train_denoiser(const Dataset& ds, const MembershipSplit& split,
                           const NoiseSchedule& sched, const TrainConfig& cfg);

}  // namespace rediffuse
