#include "rediffuse/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rediffuse {

namespace {

void check_step(int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T())
    throw std::out_of_range("diffusion: step " + std::to_string(t) +
                            " outside [1," + std::to_string(sched.T()) + "]");
}

}  // namespace

ImageTensor forward_noise(const ImageTensor& x, int t, const ImageTensor& eps,
                          const NoiseSchedule& sched) {
  check_step(t, sched);
  require_same_shape(x, eps, "forward_noise");
  double ab = sched.alpha_bar(t);
  double ca = std::sqrt(ab);
  double cb = std::sqrt(1.0 - ab);
  ImageTensor out(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i)
    out.data[i] = float(ca * double(x.data[i]) + cb * double(eps.data[i]));
  require_finite(out, "forward_noise");
  return out;
}

ImageTensor ddim_step(const ImageTensor& x_t, int t, int t_prev,
                      const DenoiserModel& model, const NoiseSchedule& sched) {
  check_step(t, sched);
  if (t_prev < 0 || t_prev >= t)
    throw std::out_of_range("ddim_step: need 0 <= t_prev < t, got t_prev=" +
                            std::to_string(t_prev) + " t=" +
                            std::to_string(t));
  ImageTensor eps = model.predict(x_t, t);
  require_same_shape(x_t, eps, "ddim_step");
  double ab_t = sched.alpha_bar(t);
  double ab_p = sched.alpha_bar(t_prev);
  double c_clean = std::sqrt(ab_p) / std::sqrt(ab_t);
  double c_noise = std::sqrt(ab_p) * std::sqrt(1.0 - ab_t) / std::sqrt(ab_t);
  double c_dir = std::sqrt(1.0 - ab_p);
  ImageTensor out(x_t.shape);
  for (size_t i = 0; i < x_t.data.size(); ++i) {
    double e = double(eps.data[i]);
    out.data[i] =
        float(c_clean * double(x_t.data[i]) - c_noise * e + c_dir * e);
  }
  require_finite(out, "ddim_step");
  return out;
}

ImageTensor ddim_sample(const ImageTensor& x_t, int t, int k,
                        const DenoiserModel& model,
                        const NoiseSchedule& sched) {
  check_step(t, sched);
  if (k < 1 || k > t)
    throw std::out_of_range("ddim_sample: need 1 <= k <= t, got k=" +
                            std::to_string(k));
  ImageTensor x = x_t;
  int cur = t;
  while (cur > 0) {
    int prev = cur > k ? cur - k : 0;
    x = ddim_step(x, cur, prev, model, sched);
    cur = prev;
  }
  return x;
}

ImageTensor ddpm_step(const ImageTensor& x_t, int t,
                      const DenoiserModel& model, const NoiseSchedule& sched,
                      const ImageTensor& noise) {
  check_step(t, sched);
  require_same_shape(x_t, noise, "ddpm_step");
  ImageTensor eps = model.predict(x_t, t);
  require_same_shape(x_t, eps, "ddpm_step");
  double a = sched.alpha(t);
  double b = sched.beta(t);
  double ab = sched.alpha_bar(t);
  double c_mean = 1.0 / std::sqrt(a);
  double c_eps = b / std::sqrt(1.0 - ab);
  double c_noise = t == 1 ? 0.0 : std::sqrt(b);
  ImageTensor out(x_t.shape);
  for (size_t i = 0; i < x_t.data.size(); ++i) {
    double mean =
        c_mean * (double(x_t.data[i]) - c_eps * double(eps.data[i]));
    out.data[i] = float(mean + c_noise * double(noise.data[i]));
  }
  require_finite(out, "ddpm_step");
  return out;
}

}  // namespace rediffuse
