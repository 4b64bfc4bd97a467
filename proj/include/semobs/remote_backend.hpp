#pragma once

#include <string>

#include "semobs/backend.hpp"

namespace semobs::backend {

/**
 * HTTP client to a live inference server.
 *
 * Wire protocol: POST {endpoint}/infer with
 *   {"frames": [uri strings], "prompt": str, "max_new_tokens": int}
 * expecting
 *   {"text": str, "tokens_generated": int, "infer_ms": number}.
 *
 * Connection failures, timeouts and 5xx map to BackendUnavailable; other
 * non-2xx statuses to TransportError (both retryable); 2xx bodies that
 * violate the schema to MalformedResponse (not retryable).
 */
class RemoteBackend : public Backend {
 public:
  RemoteBackend(std::string endpoint, double timeout_s);

  BackendResponse infer(const BackendRequest& req) override;
  std::string id() const override { return "remote:" + endpoint_; }

 private:
  std::string endpoint_;
  double timeout_s_;
};

BackendResponse remote_infer(const BackendRequest& req, const std::string& endpoint,
                             double timeout_s);

// Transport-level preflight: throws BackendUnavailable when the endpoint
// cannot be reached at all. Any HTTP response (even 404) counts as alive,
// so servers without a health route still pass.
void check_endpoint_reachable(const std::string& endpoint, double timeout_s);

}  // namespace semobs::backend
