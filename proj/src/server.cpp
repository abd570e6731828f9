#include "rediffuse/server.hpp"

#include <chrono>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/io.hpp"
#include "rediffuse/rng.hpp"

namespace rediffuse {

using nlohmann::json;

struct VariationServer::Impl {
  const DenoiserModel& model;
  NoiseSchedule sched;
  const LatentCodec* codec;
  ServerOptions opts;
  httplib::Server srv;
  std::thread worker;
  Rng seed_rng;
  std::mutex seed_mutex;

  Impl(const DenoiserModel& m, NoiseSchedule s, const LatentCodec* c,
       ServerOptions o)
      : model(m), sched(std::move(s)), codec(c), opts(std::move(o)),
        seed_rng(opts.seed) {
    srv.Get("/v1/health",
            [this](const httplib::Request&, httplib::Response& res) {
              json j{{"status", "ok"}, {"T", sched.T()}};
              res.set_content(j.dump(), "application/json");
            });
    srv.Post("/v1/variation",
             [this](const httplib::Request& req, httplib::Response& res) {
               handle_variation(req, res);
             });
    if (opts.log_requests)
      srv.set_logger([](const httplib::Request& req,
                        const httplib::Response& res) {
        std::fprintf(stderr, "%s %s %d\n", req.method.c_str(),
                     req.path.c_str(), res.status);
      });
  }

  int default_t() const {
    if (opts.default_t > 0) return opts.default_t;
    return sched.T() >= 5 ? sched.T() / 5 : 1;
  }

  static void reject(httplib::Response& res, const std::string& why) {
    res.status = 400;
    res.set_content(json{{"error", why}}.dump(), "application/json");
  }

  void handle_variation(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      return reject(res, "body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("image") ||
        !body["image"].is_string())
      return reject(res, "missing required string field 'image'");

    ImageTensor x;
    try {
      x = tensor_from_base64(body["image"].get<std::string>());
    } catch (const std::exception& e) {
      return reject(res, std::string("bad image payload: ") + e.what());
    }

    int t = default_t();
    if (body.contains("t")) {
      if (!body["t"].is_number_integer())
        return reject(res, "field 't' must be an integer");
      t = body["t"].get<int>();
    }
    if (t < 1 || t > sched.T())
      return reject(res, "t must be in [1, " + std::to_string(sched.T()) +
                             "], got " + std::to_string(t));

    uint64_t seed;
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned() &&
          !body["seed"].is_number_integer())
        return reject(res, "field 'seed' must be a non-negative integer");
      seed = body["seed"].get<uint64_t>();
    } else {
      std::lock_guard<std::mutex> lock(seed_mutex);
      seed = seed_rng.next_u64();
    }

    bool latent = false;
    if (body.contains("latent")) {
      if (!body["latent"].is_boolean())
        return reject(res, "field 'latent' must be a boolean");
      latent = body["latent"].get<bool>();
    }
    if (latent && codec == nullptr)
      return reject(res, "latent variation is not enabled on this server");

    int k = opts.policy.k_for(t);
    ImageTensor out;
    try {
      out = latent ? variation_latent(model, sched, *codec, x, t, k, seed)
                   : variation_local(model, sched, x, t, k, seed);
    } catch (const std::exception& e) {
      return reject(res, std::string("variation failed: ") + e.what());
    }
    res.set_content(json{{"image", tensor_to_base64(out)}}.dump(),
                    "application/json");
  }
};

VariationServer::VariationServer(const DenoiserModel& model,
                                 NoiseSchedule sched, const LatentCodec* codec,
                                 ServerOptions opts)
    : impl_(std::make_unique<Impl>(model, std::move(sched), codec,
                                   std::move(opts))) {}

VariationServer::~VariationServer() { stop(); }

void VariationServer::start() {
  if (impl_->opts.port == 0) {
    port_ = impl_->srv.bind_to_any_port(impl_->opts.host);
    if (port_ < 0) throw PhaseError("serve", "could not bind a port");
  } else {
    if (!impl_->srv.bind_to_port(impl_->opts.host, impl_->opts.port))
      throw PhaseError("serve", "could not bind port " +
                                    std::to_string(impl_->opts.port));
    port_ = impl_->opts.port;
  }
  impl_->worker = std::thread([this] { impl_->srv.listen_after_bind(); });
  while (!impl_->srv.is_running())
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
}

void VariationServer::stop() {
  if (!impl_) return;
  impl_->srv.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

void VariationServer::run() {
  if (impl_->opts.port == 0)
    throw PhaseError("serve", "blocking mode needs an explicit port");
  port_ = impl_->opts.port;
  if (!impl_->srv.listen(impl_->opts.host, impl_->opts.port))
    throw PhaseError("serve", "could not listen on " + impl_->opts.host + ":" +
                                  std::to_string(impl_->opts.port));
}

std::string VariationServer::url() const {
  return "http://" + impl_->opts.host + ":" + std::to_string(port_);
}

int VariationServer::effective_default_t() const { return impl_->default_t(); }

}  // namespace rediffuse
