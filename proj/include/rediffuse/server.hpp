#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "rediffuse/codec.hpp"
#include "rediffuse/denoiser.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/variation.hpp"

namespace rediffuse {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;        // 0 picks a free port
  int default_t = 0;   // applied when a request omits t; 0 means T/5
  KPolicy policy;      // server-side sampling interval choice
  uint64_t seed = 1;   // stream for requests that omit a seed
  bool log_requests = false;  // one stderr line per request
};

// HTTP face of the variation API:
//   GET  /v1/health    -> {"status":"ok","T":...}
//   POST /v1/variation -> {"image": base64 TNSR} | 400 {"error": ...}
// Request body: {image: base64 TNSR, t?: int, seed?: u64, latent?: bool}.
// The codec may be null, in which case latent requests are rejected.
class VariationServer {
 public:
  VariationServer(const DenoiserModel& model, NoiseSchedule sched,
                  const LatentCodec* codec, ServerOptions opts);
  ~VariationServer();

  VariationServer(const VariationServer&) = delete;
  VariationServer& operator=(const VariationServer&) = delete;

  // Binds and serves on a background thread; returns once listening.
  void start();
  void stop();
  // Binds and serves on the calling thread (CLI mode) until stopped.
  void run();

  int port() const { return port_; }
  std::string url() const;
  int effective_default_t() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace rediffuse
