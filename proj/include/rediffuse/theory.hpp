#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rediffuse/denoiser.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/variation.hpp"

namespace rediffuse {

// sqrt(1 - abar_t) / sqrt(abar_t): the factor mapping prediction error to
// reconstruction error when the sampler jumps straight from t to 0.
double error_scale_coeff(const NoiseSchedule& sched, int t);

// Checks the single-jump reconstruction identity
//   xhat - x = coeff(t) * (eps - eps_hat)
// over seeded noise draws; returns the worst elementwise gap between the two
// sides. Holds for any predictor, good or bad.
double identity_check(const DenoiserModel& model, const NoiseSchedule& sched,
                      const ImageTensor& x, int t, int trials,
                      uint64_t seed = 0);

// Prediction-error distribution injected behind a variation endpoint. The
// endpoint returns x + coeff(t) * e with e drawn elementwise from the law,
// which is exactly where a k = t sampler puts its prediction error.
struct ErrorLaw {
  enum class Kind { gaussian, uniform };
  Kind kind = Kind::gaussian;
  double scale = 1.0;  // stddev, or half-width of the uniform support
  double bias = 0.0;   // added to every coordinate

  static ErrorLaw gaussian(double sigma, double bias = 0.0);
  static ErrorLaw uniform(double half_width, double bias = 0.0);
  static ErrorLaw constant_bias(double bias);
};

std::unique_ptr<VariationEndpoint> make_error_law_endpoint(
    const ErrorLaw& law, const NoiseSchedule& sched);

struct ConcentrationReport {
  std::vector<int> n_values;
  double beta = 0.0;
  std::vector<double> p_hat;     // P(|xhat_n - x| >= beta), one per n
  std::vector<double> mean_err;  // mean l2 error, one per n
  int trials = 0;
};

// Monte-Carlo exceedance curve for the n-fold averaged reconstruction.
// beta <= 0 picks the empirical median of the n = 1 errors (n_values must
// then contain 1). Trials run in parallel with per-trial seeds; aggregation
// walks trial order, so results do not depend on the thread count.
ConcentrationReport concentration_curve(const VariationEndpoint& endpoint,
                                        const ImageTensor& x, int t,
                                        const std::vector<int>& n_values,
                                        double beta, int trials,
                                        uint64_t seed = 0);

std::string concentration_to_json(const ConcentrationReport& r);
std::string concentration_csv(const ConcentrationReport& r);

}  // namespace rediffuse
