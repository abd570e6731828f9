#pragma once

#include <cstdint>
#include <semaphore>
#include <string>

#include "rediffuse/tensor.hpp"
#include "rediffuse/variation.hpp"

namespace rediffuse {

// One-shot POST /v1/variation against `endpoint_url`. Throws RemoteError
// with a distinct phase for connect failures, timeouts, HTTP rejections, and
// malformed payloads.
ImageTensor variation_remote(const std::string& endpoint_url,
                             const ImageTensor& x, int t, uint64_t seed,
                             int timeout_ms = 30000, bool latent = false);

// VariationEndpoint adapter over a remote service. T is fetched from
// /v1/health at construction; vary() calls are capped to `max_in_flight`
// concurrent requests.
class RemoteEndpoint final : public VariationEndpoint {
 public:
  explicit RemoteEndpoint(std::string url, int timeout_ms = 30000,
                          int max_in_flight = 8, bool latent = false);

  ImageTensor vary(const ImageTensor& x, int t, uint64_t seed) const override;
  int max_step() const override { return T_; }

 private:
  std::string url_;
  int timeout_ms_;
  bool latent_;
  int T_ = 0;
  mutable std::counting_semaphore<4096> in_flight_;
};

}  // namespace rediffuse
