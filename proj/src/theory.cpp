#include "rediffuse/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "rediffuse/diffusion.hpp"
#include "rediffuse/io.hpp"
#include "rediffuse/parallel.hpp"
#include "rediffuse/rng.hpp"

namespace rediffuse {

double error_scale_coeff(const NoiseSchedule& sched, int t) {
  if (t < 1 || t > sched.T())
    throw std::invalid_argument("error_scale_coeff: step out of range");
  double ab = sched.alpha_bar(t);
  return std::sqrt(1.0 - ab) / std::sqrt(ab);
}

double identity_check(const DenoiserModel& model, const NoiseSchedule& sched,
                      const ImageTensor& x, int t, int trials, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("identity_check: trials < 1");
  double coeff = error_scale_coeff(sched, t);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, uint64_t(trial), 0));
    ImageTensor eps(x.shape);
    rng.fill_normal(eps.data.data(), eps.data.size());
    ImageTensor x_t = forward_noise(x, t, eps, sched);
    ImageTensor xhat = ddim_sample(x_t, t, t, model, sched);
    ImageTensor eps_hat = model.predict(x_t, t);
    for (size_t i = 0; i < x.numel(); ++i) {
      double lhs = double(xhat[i]) - double(x[i]);
      double rhs = coeff * (double(eps[i]) - double(eps_hat[i]));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

ErrorLaw ErrorLaw::gaussian(double sigma, double bias) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma) || !std::isfinite(bias))
    throw std::invalid_argument("error law: bad gaussian parameters");
  return {Kind::gaussian, sigma, bias};
}

ErrorLaw ErrorLaw::uniform(double half_width, double bias) {
  if (!(half_width >= 0.0) || !std::isfinite(half_width) ||
      !std::isfinite(bias))
    throw std::invalid_argument("error law: bad uniform parameters");
  return {Kind::uniform, half_width, bias};
}

ErrorLaw ErrorLaw::constant_bias(double bias) { return gaussian(0.0, bias); }

namespace {

class ErrorLawEndpoint final : public VariationEndpoint {
 public:
  ErrorLawEndpoint(ErrorLaw law, const NoiseSchedule& sched)
      : law_(law), sched_(sched) {}

  ImageTensor vary(const ImageTensor& x, int t, uint64_t seed) const override {
    double coeff = error_scale_coeff(sched_, t);
    Rng rng(seed);
    ImageTensor out(x.shape);
    for (size_t i = 0; i < x.numel(); ++i) {
      double e = law_.kind == ErrorLaw::Kind::gaussian
                     ? law_.scale * rng.next_normal()
                     : law_.scale * (2.0 * rng.next_double() - 1.0);
      out.data[i] = float(double(x[i]) + coeff * (e + law_.bias));
    }
    return out;
  }

  int max_step() const override { return sched_.T(); }

 private:
  ErrorLaw law_;
  const NoiseSchedule& sched_;
};

}  // namespace

std::unique_ptr<VariationEndpoint> make_error_law_endpoint(
    const ErrorLaw& law, const NoiseSchedule& sched) {
  if (!(law.scale >= 0.0) || !std::isfinite(law.scale) ||
      !std::isfinite(law.bias))
    throw std::invalid_argument("error law: bad parameters");
  return std::make_unique<ErrorLawEndpoint>(law, sched);
}

ConcentrationReport concentration_curve(const VariationEndpoint& endpoint,
                                        const ImageTensor& x, int t,
                                        const std::vector<int>& n_values,
                                        double beta, int trials,
                                        uint64_t seed) {
  if (trials < 100)
    throw std::invalid_argument("concentration_curve: trials < 100");
  if (n_values.empty())
    throw std::invalid_argument("concentration_curve: empty n list");
  for (int n : n_values)
    if (n < 1) throw std::invalid_argument("concentration_curve: n < 1");

  // errs[i][trial] = l2 error of the n_values[i]-fold average
  std::vector<std::vector<double>> errs(n_values.size());
  for (size_t ni = 0; ni < n_values.size(); ++ni) {
    int n = n_values[ni];
    uint64_t lane = derive_seed(seed, uint64_t(ni), 0);
    errs[ni].assign(size_t(trials), 0.0);
    double* out = errs[ni].data();
    par::for_each_index(trials, [&, n, lane, out](long long trial) {
      std::vector<double> acc(x.numel(), 0.0);
      for (int r = 0; r < n; ++r) {
        ImageTensor v =
            endpoint.vary(x, t, derive_seed(lane, uint64_t(trial), r));
        for (size_t i = 0; i < x.numel(); ++i) acc[i] += double(v[i]);
      }
      double sq = 0.0;
      for (size_t i = 0; i < x.numel(); ++i) {
        double d = acc[i] / double(n) - double(x[i]);
        sq += d * d;
      }
      out[trial] = std::sqrt(sq);
    });
  }

  ConcentrationReport rep;
  rep.n_values = n_values;
  rep.trials = trials;
  if (beta > 0.0) {
    rep.beta = beta;
  } else {
    auto it = std::find(n_values.begin(), n_values.end(), 1);
    if (it == n_values.end())
      throw std::invalid_argument(
          "concentration_curve: automatic beta needs n = 1 in the list");
    std::vector<double> one = errs[size_t(it - n_values.begin())];
    std::sort(one.begin(), one.end());
    size_t mid = one.size() / 2;
    rep.beta = one.size() % 2 ? one[mid] : 0.5 * (one[mid - 1] + one[mid]);
  }

  for (const std::vector<double>& e : errs) {
    size_t over = 0;
    double sum = 0.0;
    for (double v : e) {
      over += v >= rep.beta;
      sum += v;
    }
    rep.p_hat.push_back(double(over) / double(trials));
    rep.mean_err.push_back(sum / double(trials));
  }
  return rep;
}

std::string concentration_to_json(const ConcentrationReport& r) {
  nlohmann::json j;
  j["n_values"] = r.n_values;
  j["beta"] = r.beta;
  j["p_hat"] = r.p_hat;
  j["mean_err"] = r.mean_err;
  j["trials"] = r.trials;
  return j.dump(2) + "\n";
}

std::string concentration_csv(const ConcentrationReport& r) {
  std::string out = "n,p_hat\n";
  for (size_t i = 0; i < r.n_values.size(); ++i)
    out += std::to_string(r.n_values[i]) + "," + format_double(r.p_hat[i]) +
           "\n";
  return out;
}

}  // namespace rediffuse
