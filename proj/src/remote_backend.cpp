#include "semobs/remote_backend.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>

#include "semobs/errors.hpp"

namespace semobs::backend {

namespace {

using ordered_json = nlohmann::ordered_json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path, possibly empty
};

SplitUrl split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must include a scheme, e.g. http://host:port");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string path = endpoint.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {endpoint.substr(0, path_start), path};
}

}  // namespace

RemoteBackend::RemoteBackend(std::string endpoint, double timeout_s)
    : endpoint_(std::move(endpoint)), timeout_s_(timeout_s) {}

BackendResponse RemoteBackend::infer(const BackendRequest& req) {
  return remote_infer(req, endpoint_, timeout_s_);
}

BackendResponse remote_infer(const BackendRequest& req, const std::string& endpoint,
                             double timeout_s) {
  const SplitUrl url = split_endpoint(endpoint);

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(static_cast<long>(std::ceil(timeout_s * 1000.0)));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  ordered_json body;
  auto& frames = body["frames"];
  frames = ordered_json::array();
  for (const auto& frame : req.window.frames) frames.push_back(frame.uri.value_or(""));
  body["prompt"] = req.prompt.text;
  body["max_new_tokens"] = req.prompt.max_new_tokens;

  auto result = client.Post(url.path + "/infer", body.dump(), "application/json");
  if (!result) {
    throw BackendUnavailable(endpoint + ": " + httplib::to_string(result.error()));
  }
  if (result->status >= 500) {
    throw BackendUnavailable(endpoint + ": HTTP " + std::to_string(result->status));
  }
  if (result->status < 200 || result->status >= 300) {
    throw TransportError(endpoint + ": HTTP " + std::to_string(result->status));
  }

  ordered_json j = ordered_json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw MalformedResponse("body is not a JSON object");
  if (!j.contains("text") || !j.at("text").is_string()) {
    throw MalformedResponse("missing string field 'text'");
  }
  if (!j.contains("tokens_generated") || !j.at("tokens_generated").is_number()) {
    throw MalformedResponse("missing numeric field 'tokens_generated'");
  }
  if (!j.contains("infer_ms") || !j.at("infer_ms").is_number()) {
    throw MalformedResponse("missing numeric field 'infer_ms'");
  }

  BackendResponse resp;
  resp.raw_text = j.at("text").get<std::string>();
  resp.tokens_generated = j.at("tokens_generated").get<std::int64_t>();
  resp.infer_s = j.at("infer_ms").get<double>() / 1000.0;
  if (resp.infer_s < 0) throw MalformedResponse("negative infer_ms");
  resp.backend_id = "remote:" + endpoint;
  return resp;
}

void check_endpoint_reachable(const std::string& endpoint, double timeout_s) {
  const SplitUrl url = split_endpoint(endpoint);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(static_cast<long>(std::ceil(timeout_s * 1000.0)));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  auto result = client.Get(url.path.empty() ? "/healthz" : url.path + "/healthz");
  if (!result && result.error() != httplib::Error::Read) {
    throw BackendUnavailable(endpoint + ": " + httplib::to_string(result.error()));
  }
}

}  // namespace semobs::backend
