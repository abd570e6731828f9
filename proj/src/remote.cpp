#include "rediffuse/remote.hpp"

#include <stdexcept>

#include "httplib.h"
#include "json.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/io.hpp"

namespace rediffuse {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& url, int timeout_ms) {
  httplib::Client cli(url);
  cli.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  cli.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  return cli;
}

[[noreturn]] void throw_transport(httplib::Error err) {
  using E = httplib::Error;
  switch (err) {
    case E::ConnectionTimeout:
    case E::Read:
    case E::Write:
      throw RemoteError(RemoteError::Phase::timeout,
                        httplib::to_string(err));
    default:
      throw RemoteError(RemoteError::Phase::connect, httplib::to_string(err));
  }
}

[[noreturn]] void throw_status(const httplib::Response& res) {
  std::string detail = "HTTP " + std::to_string(res.status);
  try {
    json body = json::parse(res.body);
    if (body.contains("error") && body["error"].is_string())
      detail += ": " + body["error"].get<std::string>();
  } catch (const json::exception&) {
  }
  throw RemoteError(RemoteError::Phase::http_status, detail);
}

ImageTensor parse_image_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw RemoteError(RemoteError::Phase::payload,
                      std::string("response is not JSON: ") + e.what());
  }
  if (!j.contains("image") || !j["image"].is_string())
    throw RemoteError(RemoteError::Phase::payload,
                      "response lacks string field 'image'");
  try {
    return tensor_from_base64(j["image"].get<std::string>());
  } catch (const std::exception& e) {
    throw RemoteError(RemoteError::Phase::payload,
                      std::string("undecodable image payload: ") + e.what());
  }
}

}  // namespace

ImageTensor variation_remote(const std::string& endpoint_url,
                             const ImageTensor& x, int t, uint64_t seed,
                             int timeout_ms, bool latent) {
  httplib::Client cli = make_client(endpoint_url, timeout_ms);
  json body{{"image", tensor_to_base64(x)},
            {"t", t},
            {"seed", seed},
            {"latent", latent}};
  httplib::Result res =
      cli.Post("/v1/variation", body.dump(), "application/json");
  if (!res) throw_transport(res.error());
  if (res->status != 200) throw_status(*res);
  ImageTensor out = parse_image_response(res->body);
  if (!out.same_shape(x))
    throw RemoteError(RemoteError::Phase::payload,
                      "response shape differs from request shape");
  return out;
}

RemoteEndpoint::RemoteEndpoint(std::string url, int timeout_ms,
                               int max_in_flight, bool latent)
    : url_(std::move(url)), timeout_ms_(timeout_ms), latent_(latent),
      in_flight_(max_in_flight) {
  if (max_in_flight < 1 || max_in_flight > 4096)
    throw std::invalid_argument("remote endpoint: bad in-flight limit");
  httplib::Client cli = make_client(url_, timeout_ms_);
  httplib::Result res = cli.Get("/v1/health");
  if (!res) throw_transport(res.error());
  if (res->status != 200) throw_status(*res);
  try {
    json j = json::parse(res->body);
    T_ = j.at("T").get<int>();
  } catch (const json::exception& e) {
    throw RemoteError(RemoteError::Phase::payload,
                      std::string("bad health response: ") + e.what());
  }
  if (T_ < 1)
    throw RemoteError(RemoteError::Phase::payload,
                      "health reports nonpositive T");
}

ImageTensor RemoteEndpoint::vary(const ImageTensor& x, int t,
                                 uint64_t seed) const {
  in_flight_.acquire();
  try {
    ImageTensor out =
        variation_remote(url_, x, t, seed, timeout_ms_, latent_);
    in_flight_.release();
    return out;
  } catch (...) {
    in_flight_.release();
    throw;
  }
}

}  // namespace rediffuse
