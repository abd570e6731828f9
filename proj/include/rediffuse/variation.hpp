#pragma once

#include <cstdint>
#include <memory>

#include "rediffuse/codec.hpp"
#include "rediffuse/denoiser.hpp"
#include "rediffuse/diffusion.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/tensor.hpp"

namespace rediffuse {

// The black-box boundary. Attack code sees this interface and nothing else:
// noise in, reconstruction out.
class VariationEndpoint {
 public:
  virtual ~VariationEndpoint() = default;
  // Adds t steps of seeded Gaussian noise and denoises back to step 0.
  // Output shape equals input shape; identical (x, t, seed) gives
  // bit-identical output.
  virtual ImageTensor vary(const ImageTensor& x, int t, uint64_t seed) const = 0;
  virtual int max_step() const = 0;  // the T advertised by the service
};

// How a server picks its sampling interval. Callers of the variation API do
// not get to choose it; services run with their own defaults.
struct KPolicy {
  enum class Mode { half_t, fixed };
  Mode mode = Mode::half_t;
  int fixed_k = 1;

  int k_for(int t) const {
    if (mode == Mode::fixed) return fixed_k > t ? t : fixed_k;
    return t > 1 ? t / 2 : 1;
  }
  static KPolicy half_t() { return {}; }
  static KPolicy fixed(int k) { return {Mode::fixed, k}; }
};

// Seeded noise, then the DDIM walk back to 0 with interval k.
ImageTensor variation_local(const DenoiserModel& model,
                            const NoiseSchedule& sched, const ImageTensor& x,
                            int t, int k, uint64_t seed);

// Same walk in latent space: encode, noise, denoise, decode.
ImageTensor variation_latent(const DenoiserModel& model,
                             const NoiseSchedule& sched,
                             const LatentCodec& codec, const ImageTensor& x,
                             int t, int k, uint64_t seed);

// In-process endpoint over a pixel-space model.
class LocalEndpoint final : public VariationEndpoint {
 public:
  LocalEndpoint(const DenoiserModel& model, NoiseSchedule sched,
                KPolicy policy = KPolicy::half_t())
      : model_(model), sched_(std::move(sched)), policy_(policy) {}
  ImageTensor vary(const ImageTensor& x, int t, uint64_t seed) const override;
  int max_step() const override { return sched_.T(); }

 private:
  const DenoiserModel& model_;
  NoiseSchedule sched_;
  KPolicy policy_;
};

// In-process endpoint over a latent-space model plus codec.
class LatentEndpoint final : public VariationEndpoint {
 public:
  LatentEndpoint(const DenoiserModel& model, NoiseSchedule sched,
                 const LatentCodec& codec, KPolicy policy = KPolicy::half_t())
      : model_(model), sched_(std::move(sched)), codec_(codec),
        policy_(policy) {}
  ImageTensor vary(const ImageTensor& x, int t, uint64_t seed) const override;
  int max_step() const override { return sched_.T(); }

 private:
  const DenoiserModel& model_;
  NoiseSchedule sched_;
  const LatentCodec& codec_;
  KPolicy policy_;
};

}  // namespace rediffuse
