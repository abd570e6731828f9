#include <cmath>

#include "doctest.h"
#include "rediffuse/diffusion.hpp"
#include "rediffuse/mlp.hpp"
#include "rediffuse/parallel.hpp"
#include "rediffuse/rng.hpp"
#include "rediffuse/theory.hpp"

using namespace rediffuse;

namespace {

ImageTensor random_image(uint64_t seed, size_t d) {
  Rng rng(seed);
  ImageTensor x({uint32_t(d)});
  for (float& v : x.data) v = rng.next_float();
  return x;
}

double fit_slope(const std::vector<int>& ns, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < ns.size(); ++i) {
    double lx = std::log(double(ns[i])), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double m = double(ns.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("reconstruction identity holds for every predictor class") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(4, 16);
  int t = 200;

  auto oracle = memorized_denoiser({x}, sched);
  CHECK(identity_check(*oracle, sched, x, t, 20) <= 1e-6);

  BiasedModel biased(*oracle, 0.125f);
  CHECK(identity_check(biased, sched, x, t, 20) <= 1e-6);

  MlpDenoiser raw({16}, 32, 2, 8, 99);  // untrained random weights
  CHECK(identity_check(raw, sched, x, t, 20) <= 1e-5);

  CHECK_THROWS_AS(identity_check(*oracle, sched, x, 0, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(identity_check(*oracle, sched, x, t, 0),
                  std::invalid_argument);
}

TEST_CASE("oracle predictor makes both sides vanish") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(8, 12);
  int t = 200;
  auto oracle = memorized_denoiser({x}, sched);

  Rng rng(5);
  ImageTensor eps(x.shape);
  rng.fill_normal(eps.data.data(), eps.data.size());
  ImageTensor x_t = forward_noise(x, t, eps, sched);
  ImageTensor xhat = ddim_sample(x_t, t, t, *oracle, sched);
  for (size_t i = 0; i < x.numel(); ++i)
    CHECK(std::abs(double(xhat[i]) - double(x[i])) <= 1e-6);
}

TEST_CASE("constant prediction bias lands where the algebra says") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(14, 10);
  int t = 300;
  double coeff = error_scale_coeff(sched, t);
  float b = 0.25f;

  auto oracle = memorized_denoiser({x}, sched);
  BiasedModel biased(*oracle, b);

  Rng rng(6);
  ImageTensor eps(x.shape);
  rng.fill_normal(eps.data.data(), eps.data.size());
  ImageTensor x_t = forward_noise(x, t, eps, sched);
  ImageTensor xhat = ddim_sample(x_t, t, t, biased, sched);
  for (size_t i = 0; i < x.numel(); ++i)
    CHECK(std::abs(double(xhat[i]) - double(x[i]) + coeff * double(b)) <=
          1e-5);
}

TEST_CASE("error scale coefficient sanity") {
  NoiseSchedule sched = build_schedule(100, 1e-3, 0.02);
  double ab = sched.alpha_bar(40);
  CHECK(error_scale_coeff(sched, 40) ==
        doctest::Approx(std::sqrt((1.0 - ab) / ab)).epsilon(1e-12));
  CHECK_THROWS_AS(error_scale_coeff(sched, 0), std::invalid_argument);
  CHECK_THROWS_AS(error_scale_coeff(sched, 101), std::invalid_argument);
}

TEST_CASE("error law endpoints realize their law") {
  NoiseSchedule sched = build_schedule(100, 1e-3, 0.02);
  ImageTensor x = random_image(3, 6);
  int t = 50;
  double coeff = error_scale_coeff(sched, t);

  auto clean = make_error_law_endpoint(ErrorLaw::gaussian(0.0), sched);
  ImageTensor same = clean->vary(x, t, 123);
  for (size_t i = 0; i < x.numel(); ++i) CHECK(same[i] == x[i]);

  auto biased = make_error_law_endpoint(ErrorLaw::constant_bias(0.5), sched);
  ImageTensor shifted = biased->vary(x, t, 123);
  for (size_t i = 0; i < x.numel(); ++i)
    CHECK(std::abs(double(shifted[i]) - double(x[i]) - coeff * 0.5) <= 1e-6);

  auto box = make_error_law_endpoint(ErrorLaw::uniform(0.3), sched);
  for (uint64_t s = 0; s < 50; ++s) {
    ImageTensor v = box->vary(x, t, s);
    for (size_t i = 0; i < x.numel(); ++i)
      CHECK(std::abs(double(v[i]) - double(x[i])) <= coeff * 0.3 + 1e-6);
  }

  CHECK_THROWS_AS(ErrorLaw::gaussian(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(ErrorLaw::uniform(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(clean->vary(x, 0, 1), std::invalid_argument);
}

TEST_CASE("mean error falls at the square-root rate") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(10, 16);
  auto ep = make_error_law_endpoint(ErrorLaw::gaussian(0.5), sched);
  std::vector<int> ns = {1, 4, 16, 64};
  ConcentrationReport rep = concentration_curve(*ep, x, 200, ns, 1.0, 500, 9);
  for (size_t i = 1; i < rep.mean_err.size(); ++i)
    CHECK(rep.mean_err[i] <= rep.mean_err[i - 1]);
  CHECK(std::abs(fit_slope(ns, rep.mean_err) + 0.5) <= 0.15);
}

TEST_CASE("bounded uniform errors also average away") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(16, 12);
  auto ep = make_error_law_endpoint(ErrorLaw::uniform(0.8), sched);
  std::vector<int> ns = {1, 4, 16, 64};
  ConcentrationReport rep = concentration_curve(*ep, x, 150, ns, 1.0, 500, 3);
  for (size_t i = 1; i < rep.mean_err.size(); ++i)
    CHECK(rep.mean_err[i] <= rep.mean_err[i - 1]);
  CHECK(std::abs(fit_slope(ns, rep.mean_err) + 0.5) <= 0.15);
}

TEST_CASE("exceedance probability decays geometrically past the median") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x({1}, {0.25f});
  auto ep = make_error_law_endpoint(ErrorLaw::gaussian(1.0), sched);
  std::vector<int> ns = {1, 2, 4, 8};
  ConcentrationReport rep = concentration_curve(*ep, x, 200, ns, 0.0, 4000, 17);

  CHECK(rep.p_hat[0] == 0.5);  // beta is the n = 1 median by construction
  for (size_t i = 0; i < rep.p_hat.size(); ++i) {
    CHECK(rep.p_hat[i] >= 0.0);
    CHECK(rep.p_hat[i] <= 1.0);
  }
  for (size_t i = 1; i < rep.p_hat.size(); ++i) {
    CHECK(rep.p_hat[i] < rep.p_hat[i - 1]);
    CHECK(rep.p_hat[i] <= 0.85 * rep.p_hat[i - 1]);
  }
}

TEST_CASE("averaging cannot remove a systematic bias") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(20, 8);
  int t = 250;
  double coeff = error_scale_coeff(sched, t);
  double bias_norm = coeff * 0.4 * std::sqrt(8.0);

  auto ep = make_error_law_endpoint(ErrorLaw::constant_bias(0.4), sched);
  ConcentrationReport rep =
      concentration_curve(*ep, x, t, {1, 4, 16}, 0.5 * bias_norm, 200, 5);
  for (double p : rep.p_hat) CHECK(p == 1.0);
  for (double e : rep.mean_err)
    CHECK(e == doctest::Approx(bias_norm).epsilon(1e-5));
}

TEST_CASE("noisy bias converges to the bias norm") {
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  ImageTensor x = random_image(21, 8);
  int t = 250;
  double coeff = error_scale_coeff(sched, t);
  double bias_norm = coeff * 0.2 * std::sqrt(8.0);

  auto ep = make_error_law_endpoint(ErrorLaw::gaussian(0.4, 0.2), sched);
  ConcentrationReport rep =
      concentration_curve(*ep, x, t, {1, 16, 64}, 1.0, 500, 11);
  CHECK(rep.mean_err.back() == doctest::Approx(bias_norm).epsilon(0.1));
  CHECK(rep.mean_err.back() < rep.mean_err.front());
}

TEST_CASE("concentration curve rejects bad arguments") {
  NoiseSchedule sched = build_schedule(100, 1e-3, 0.02);
  ImageTensor x = random_image(1, 4);
  auto ep = make_error_law_endpoint(ErrorLaw::gaussian(0.1), sched);
  CHECK_THROWS_AS(concentration_curve(*ep, x, 10, {1, 2}, 1.0, 99, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(concentration_curve(*ep, x, 10, {}, 1.0, 200, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(concentration_curve(*ep, x, 10, {0, 2}, 1.0, 200, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(concentration_curve(*ep, x, 10, {2, 4}, 0.0, 200, 0),
                  std::invalid_argument);
}

TEST_CASE("concentration curve is reproducible across thread counts") {
  NoiseSchedule sched = build_schedule(100, 1e-3, 0.02);
  ImageTensor x = random_image(30, 6);
  auto ep = make_error_law_endpoint(ErrorLaw::gaussian(0.3), sched);

  par::set_threads(1);
  ConcentrationReport a = concentration_curve(*ep, x, 40, {1, 4}, 0.0, 200, 8);
  par::set_threads(4);
  ConcentrationReport b = concentration_curve(*ep, x, 40, {1, 4}, 0.0, 200, 8);
  par::set_threads(0);

  CHECK(a.beta == b.beta);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.mean_err == b.mean_err);
}

TEST_CASE("report serialization") {
  ConcentrationReport rep;
  rep.n_values = {1, 4};
  rep.beta = 0.5;
  rep.p_hat = {0.5, 0.125};
  rep.mean_err = {0.7, 0.35};
  rep.trials = 200;

  std::string j = concentration_to_json(rep);
  CHECK(j.find("\"beta\": 0.5") != std::string::npos);
  CHECK(j.find("\"trials\": 200") != std::string::npos);

  std::string csv = concentration_csv(rep);
  CHECK(csv == "n,p_hat\n1,0.5\n4,0.125\n");
}
