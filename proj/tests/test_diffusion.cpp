#include <cmath>

#include "doctest.h"
#include "rediffuse/diffusion.hpp"
#include "rediffuse/rng.hpp"

using namespace rediffuse;

namespace {

ImageTensor random_image(Rng& rng, std::vector<uint32_t> shape) {
  ImageTensor t(std::move(shape));
  for (float& v : t.data) v = rng.next_float();
  return t;
}

ImageTensor random_noise(Rng& rng, std::vector<uint32_t> shape) {
  ImageTensor t(std::move(shape));
  rng.fill_normal(t.data.data(), t.data.size());
  return t;
}

class CountingModel final : public DenoiserModel {
 public:
  explicit CountingModel(const DenoiserModel& inner) : inner_(inner) {}
  ImageTensor predict(const ImageTensor& x_t, int t) const override {
    ++calls;
    return inner_.predict(x_t, t);
  }
  size_t parameter_count() const override { return 0; }
  mutable int calls = 0;

 private:
  const DenoiserModel& inner_;
};

}  // namespace

TEST_CASE("forward_noise algebra") {
  NoiseSchedule s = build_schedule(10, 0.1, 0.3);
  Rng rng(1);
  ImageTensor x({4}, {0.0f, 0.0f, 0.0f, 0.0f});
  ImageTensor eps = random_noise(rng, {4});

  int t = 5;
  ImageTensor out = forward_noise(x, t, eps, s);
  double cb = std::sqrt(1.0 - s.alpha_bar(t));
  for (size_t i = 0; i < 4; ++i)
    CHECK(out[i] == doctest::Approx(cb * eps[i]).epsilon(1e-6));

  // near-zero beta: alpha_bar ~ 1 and the sample stays at x
  NoiseSchedule limit = build_schedule(1, 1e-12, 1e-12);
  ImageTensor y({2}, {0.25f, 0.75f});
  ImageTensor eps2 = random_noise(rng, {2});
  ImageTensor out2 = forward_noise(y, 1, eps2, limit);
  ImageTensor ref = y;
  CHECK(std::abs(out2[0] - ref[0]) < 1e-5);
  CHECK(std::abs(out2[1] - ref[1]) < 1e-5);

  ImageTensor wrong({3});
  CHECK_THROWS_AS(forward_noise(x, t, wrong, s), std::invalid_argument);
  CHECK_THROWS_AS(forward_noise(x, 0, eps, s), std::out_of_range);
  CHECK_THROWS_AS(forward_noise(x, 11, eps, s), std::out_of_range);
}

TEST_CASE("forward_noise per-pixel variance tracks 1 - alpha_bar") {
  NoiseSchedule s = build_schedule(100, 1e-3, 0.05);
  int t = 60;
  ImageTensor x({4}, {0.2f, 0.4f, 0.6f, 0.8f});
  const int N = 10000;
  std::vector<double> sum(4, 0.0), sumsq(4, 0.0);
  for (int it = 0; it < N; ++it) {
    Rng rng(derive_seed(99, uint64_t(it), 0));
    ImageTensor eps = random_noise(rng, {4});
    ImageTensor out = forward_noise(x, t, eps, s);
    for (size_t j = 0; j < 4; ++j) {
      sum[j] += out[j];
      sumsq[j] += double(out[j]) * double(out[j]);
    }
  }
  double want = 1.0 - s.alpha_bar(t);
  for (size_t j = 0; j < 4; ++j) {
    double mean = sum[j] / N;
    double var = sumsq[j] / N - mean * mean;
    CHECK(var == doctest::Approx(want).epsilon(0.05));
  }
}

TEST_CASE("ddim_step inverts forward noising when the predictor is exact") {
  NoiseSchedule s = build_schedule(50, 1e-3, 0.04);
  Rng rng(3);
  for (int t : {1, 7, 25, 50}) {
    ImageTensor x = random_image(rng, {3, 3});
    ImageTensor eps = random_noise(rng, {3, 3});
    ImageTensor x_t = forward_noise(x, t, eps, s);
    FixedPredictionModel model(eps);
    ImageTensor back = ddim_step(x_t, t, 0, model, s);
    for (size_t i = 0; i < x.numel(); ++i)
      CHECK(std::abs(back[i] - x[i]) < 1e-5);
  }
}

TEST_CASE("ddim_step with zero predictor rescales") {
  NoiseSchedule s = build_schedule(20, 0.01, 0.2);
  Rng rng(4);
  ImageTensor x_t = random_image(rng, {5});
  ZeroModel zero;
  int t = 12, t_prev = 4;
  ImageTensor out = ddim_step(x_t, t, t_prev, zero, s);
  double c = std::sqrt(s.alpha_bar(t_prev) / s.alpha_bar(t));
  for (size_t i = 0; i < 5; ++i)
    CHECK(out[i] == doctest::Approx(c * x_t[i]).epsilon(1e-6));

  CHECK_THROWS_AS(ddim_step(x_t, 5, 5, zero, s), std::out_of_range);
  CHECK_THROWS_AS(ddim_step(x_t, 5, 9, zero, s), std::out_of_range);
  CHECK_THROWS_AS(ddim_step(x_t, 0, 0, zero, s), std::out_of_range);
}

TEST_CASE("biased predictor shifts the reconstruction by c_t times the bias") {
  NoiseSchedule s = build_schedule(40, 1e-3, 0.05);
  Rng rng(5);
  int t = 30;
  float bias = 0.125f;
  ImageTensor x = random_image(rng, {6});
  ImageTensor eps = random_noise(rng, {6});
  ImageTensor x_t = forward_noise(x, t, eps, s);
  FixedPredictionModel exact(eps);
  BiasedModel biased(exact, bias);
  ImageTensor out = ddim_step(x_t, t, 0, biased, s);
  double ab = s.alpha_bar(t);
  double c_t = std::sqrt(1.0 - ab) / std::sqrt(ab);
  for (size_t i = 0; i < 6; ++i)
    CHECK(out[i] - x[i] ==
          doctest::Approx(-c_t * double(bias)).epsilon(1e-4));
}

TEST_CASE("ddim_sample composes steps") {
  NoiseSchedule s = build_schedule(60, 1e-3, 0.05);
  Rng rng(6);
  ImageTensor x_t = random_image(rng, {4});
  ZeroModel zero;

  int t = 24;
  ImageTensor one = ddim_step(x_t, t, 0, zero, s);
  ImageTensor viaSample = ddim_sample(x_t, t, t, zero, s);
  CHECK(viaSample == one);

  CountingModel counting(zero);
  (void)ddim_sample(x_t, 24, 7, counting, s);
  CHECK(counting.calls == 4);  // ceil(24/7)
  counting.calls = 0;
  (void)ddim_sample(x_t, 24, 24, counting, s);
  CHECK(counting.calls == 1);

  // k = 1 is exactly the fold of single steps
  ImageTensor folded = x_t;
  for (int step = t; step > 0; --step)
    folded = ddim_step(folded, step, step - 1, zero, s);
  CHECK(ddim_sample(x_t, t, 1, zero, s) == folded);

  CHECK_THROWS_AS(ddim_sample(x_t, 10, 0, zero, s), std::out_of_range);
  CHECK_THROWS_AS(ddim_sample(x_t, 10, 11, zero, s), std::out_of_range);
}

TEST_CASE("memorized oracle inverts the full sampler on its point") {
  NoiseSchedule s = build_schedule(1000, 1e-4, 0.02);
  Rng rng(7);
  ImageTensor x = random_image(rng, {8, 8});
  auto oracle = memorized_denoiser({x}, s);
  int t = 200;  // T/5
  ImageTensor eps = random_noise(rng, {8, 8});
  ImageTensor x_t = forward_noise(x, t, eps, s);
  ImageTensor xhat = ddim_sample(x_t, t, 50, *oracle, s);
  CHECK(l2_dist(xhat, x) <= 1e-4 * l2_norm(x));
}

TEST_CASE("ddpm_step mean and terminal convention") {
  NoiseSchedule s = build_schedule(30, 1e-3, 0.08);
  Rng rng(8);
  ZeroModel zero;
  ImageTensor x_t = random_image(rng, {4});
  ImageTensor zeros({4});

  int t = 17;
  ImageTensor out = ddpm_step(x_t, t, zero, s, zeros);
  double c = 1.0 / std::sqrt(s.alpha(t));
  for (size_t i = 0; i < 4; ++i)
    CHECK(out[i] == doctest::Approx(c * x_t[i]).epsilon(1e-6));

  ImageTensor n1 = random_noise(rng, {4});
  ImageTensor n2 = random_noise(rng, {4});
  CHECK(ddpm_step(x_t, 1, zero, s, n1) == ddpm_step(x_t, 1, zero, s, n2));

  ImageTensor wrong({3});
  CHECK_THROWS_AS(ddpm_step(x_t, t, zero, s, wrong), std::invalid_argument);
  CHECK_THROWS_AS(ddpm_step(x_t, 0, zero, s, zeros), std::out_of_range);
}

TEST_CASE("ddpm_step injects variance beta_t") {
  NoiseSchedule s = build_schedule(30, 1e-3, 0.08);
  int t = 9;
  ImageTensor x_t({4}, {0.1f, 0.5f, 0.9f, 0.3f});
  ZeroModel zero;
  const int N = 10000;
  std::vector<double> sum(4, 0.0), sumsq(4, 0.0);
  for (int it = 0; it < N; ++it) {
    Rng rng(derive_seed(123, uint64_t(it), 0));
    ImageTensor noise({4});
    rng.fill_normal(noise.data.data(), 4);
    ImageTensor out = ddpm_step(x_t, t, zero, s, noise);
    for (size_t j = 0; j < 4; ++j) {
      sum[j] += out[j];
      sumsq[j] += double(out[j]) * double(out[j]);
    }
  }
  for (size_t j = 0; j < 4; ++j) {
    double mean = sum[j] / N;
    double var = sumsq[j] / N - mean * mean;
    CHECK(var == doctest::Approx(s.beta(t)).epsilon(0.05));
  }
}

TEST_CASE("oracle denoisers") {
  NoiseSchedule s = build_schedule(100, 1e-3, 0.05);
  Rng rng(9);
  ImageTensor xstar = random_image(rng, {6});
  auto mem = memorized_denoiser({xstar}, s);

  int t = 40;
  ImageTensor eps = random_noise(rng, {6});
  ImageTensor x_t = forward_noise(xstar, t, eps, s);
  ImageTensor pred = mem->predict(x_t, t);
  for (size_t i = 0; i < 6; ++i)
    CHECK(std::abs(pred[i] - eps[i]) < 1e-4);

  // vanishing variance collapses the gaussian oracle onto the memorized one
  auto gauss = gaussian_denoiser(xstar, 1e-12, s);
  ImageTensor gp = gauss->predict(x_t, t);
  for (size_t i = 0; i < 6; ++i) CHECK(std::abs(gp[i] - pred[i]) < 1e-4);

  // analytic gaussian formula at a chosen point
  double sigma2 = 0.3;
  auto gauss2 = gaussian_denoiser(xstar, sigma2, s);
  ImageTensor gp2 = gauss2->predict(x_t, t);
  double ab = s.alpha_bar(t);
  for (size_t i = 0; i < 6; ++i) {
    double want = std::sqrt(1.0 - ab) *
                  (double(x_t[i]) - std::sqrt(ab) * double(xstar[i])) /
                  (ab * sigma2 + 1.0 - ab);
    CHECK(gp2[i] == doctest::Approx(want).epsilon(1e-5));
  }

  CHECK_THROWS_AS(memorized_denoiser({}, s), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_denoiser(xstar, 0.0, s), std::invalid_argument);
}

TEST_CASE("multi-point oracle follows the posterior") {
  NoiseSchedule s = build_schedule(100, 1e-3, 0.05);
  ImageTensor a({2}, {0.1f, 0.1f});
  ImageTensor b({2}, {0.9f, 0.9f});
  auto both = memorized_denoiser({a, b}, s);
  auto onlyA = memorized_denoiser({a}, s);

  int t = 10;  // low noise, so proximity dominates
  Rng rng(10);
  ImageTensor eps = random_noise(rng, {2});
  ImageTensor x_t = forward_noise(a, t, eps, s);
  ImageTensor pb = both->predict(x_t, t);
  ImageTensor pa = onlyA->predict(x_t, t);
  for (size_t i = 0; i < 2; ++i) CHECK(std::abs(pb[i] - pa[i]) < 1e-3);
}
