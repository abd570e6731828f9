#include "rediffuse/variation.hpp"

#include <stdexcept>

#include "rediffuse/rng.hpp"

namespace rediffuse {

ImageTensor variation_local(const DenoiserModel& model,
                            const NoiseSchedule& sched, const ImageTensor& x,
                            int t, int k, uint64_t seed) {
  Rng rng(seed);
  ImageTensor eps(x.shape);
  rng.fill_normal(eps.data.data(), eps.data.size());
  ImageTensor x_t = forward_noise(x, t, eps, sched);
  return ddim_sample(x_t, t, k, model, sched);
}

ImageTensor variation_latent(const DenoiserModel& model,
                             const NoiseSchedule& sched,
                             const LatentCodec& codec, const ImageTensor& x,
                             int t, int k, uint64_t seed) {
  ImageTensor z = codec.encode(x);
  Rng rng(seed);
  ImageTensor eps(z.shape);
  rng.fill_normal(eps.data.data(), eps.data.size());
  ImageTensor z_t = forward_noise(z, t, eps, sched);
  ImageTensor z_hat = ddim_sample(z_t, t, k, model, sched);
  return codec.decode(z_hat);
}

ImageTensor LocalEndpoint::vary(const ImageTensor& x, int t,
                                uint64_t seed) const {
  return variation_local(model_, sched_, x, t, policy_.k_for(t), seed);
}

ImageTensor LatentEndpoint::vary(const ImageTensor& x, int t,
                                 uint64_t seed) const {
  return variation_latent(model_, sched_, codec_, x, t, policy_.k_for(t),
                          seed);
}

}  // namespace rediffuse
