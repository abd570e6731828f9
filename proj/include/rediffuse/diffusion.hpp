#pragma once

#include "rediffuse/denoiser.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/tensor.hpp"

namespace rediffuse {

// x_t = sqrt(abar_t) x + sqrt(1 - abar_t) eps, elementwise.
ImageTensor forward_noise(const ImageTensor& x, int t, const ImageTensor& eps,
                          const NoiseSchedule& sched);

// Deterministic jump t -> t_prev (0 <= t_prev < t):
//   sqrt(abar_prev) (x_t - sqrt(1-abar_t) eps_hat) / sqrt(abar_t)
//     + sqrt(1-abar_prev) eps_hat
// with eps_hat = model.predict(x_t, t).
ImageTensor ddim_step(const ImageTensor& x_t, int t, int t_prev,
                      const DenoiserModel& model, const NoiseSchedule& sched);

// Folds ddim_step along t, t-k, t-2k, ... clamped to end at 0; the number of
// steps is ceil(t/k).
ImageTensor ddim_sample(const ImageTensor& x_t, int t, int k,
                        const DenoiserModel& model, const NoiseSchedule& sched);

// Stochastic ancestral step t -> t-1 with fixed variance beta_t. The caller
// supplies the injected noise so runs replay; it is ignored at t = 1.
ImageTensor ddpm_step(const ImageTensor& x_t, int t, const DenoiserModel& model,
                      const NoiseSchedule& sched, const ImageTensor& noise);

}  // namespace rediffuse
