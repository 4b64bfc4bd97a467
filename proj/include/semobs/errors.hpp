#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace semobs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- manifest ingestion -----------------------------------------------

struct MalformedRecord : Error {
  MalformedRecord(std::size_t line, const std::string& detail)
      : Error("malformed record at line " + std::to_string(line) + ": " + detail),
        line_no(line) {}
  std::size_t line_no;
};

struct DuplicateFrame : Error {
  DuplicateFrame(const std::string& clip_id, std::int64_t frame_index)
      : Error("duplicate frame (" + clip_id + ", " + std::to_string(frame_index) + ")") {}
};

struct NonMonotonicTimestamp : Error {
  NonMonotonicTimestamp(const std::string& clip_id, std::int64_t frame_index)
      : Error("non-monotonic timestamp in clip " + clip_id + " at frame index " +
              std::to_string(frame_index)) {}
};

// ---- prompting ---------------------------------------------------------

struct UnknownTier : Error {
  explicit UnknownTier(const std::string& tier) : Error("unknown prompt tier: " + tier) {}
};

struct MissingContextKey : Error {
  explicit MissingContextKey(const std::string& key)
      : Error("template references missing context key: " + key), key(key) {}
  std::string key;
};

// ---- backend -----------------------------------------------------------

// Base for backend call failures; retryable errors may be re-attempted by
// the orchestrator, non-retryable ones abort the run.
struct BackendError : Error {
  BackendError(const std::string& msg, bool retryable) : Error(msg), retryable(retryable) {}
  bool retryable;
};

struct BackendUnavailable : BackendError {
  explicit BackendUnavailable(const std::string& detail)
      : BackendError("backend unavailable: " + detail, /*retryable=*/true) {}
};

struct TransportError : BackendError {
  explicit TransportError(const std::string& detail)
      : BackendError("transport error: " + detail, /*retryable=*/true) {}
};

struct MalformedResponse : BackendError {
  explicit MalformedResponse(const std::string& detail)
      : BackendError("malformed backend response: " + detail, /*retryable=*/false) {}
};

struct MissingRecord : Error {
  MissingRecord(const std::string& clip_id, std::int64_t window_index)
      : Error("no replay record for (" + clip_id + ", " + std::to_string(window_index) + ")") {}
};

struct MissingLabel : Error {
  MissingLabel(const std::string& clip_id, std::int64_t window_index)
      : Error("stochastic backend needs a ground-truth label for (" + clip_id + ", " +
              std::to_string(window_index) + ")") {}
};

struct UnknownProfile : Error {
  explicit UnknownProfile(const std::string& key) : Error("unknown quantization profile: " + key) {}
};

// ---- orchestrator ------------------------------------------------------

struct NegativeComponent : Error {
  explicit NegativeComponent(const std::string& which)
      : Error("negative latency component: " + which) {}
};

// ---- metrics -----------------------------------------------------------

struct MissingGroundTruth : Error {
  MissingGroundTruth(const std::string& clip_id, std::int64_t window_index)
      : Error("record (" + clip_id + ", " + std::to_string(window_index) +
              ") has no ground-truth label") {}
};

struct EmptyLog : Error {
  EmptyLog() : Error("prediction log contains no decision records") {}
};

// ---- safety gate -------------------------------------------------------

struct FingerprintMismatch : Error {
  explicit FingerprintMismatch(const std::string& detail)
      : Error("report fingerprint does not match config: " + detail) {}
};

// ---- configuration / IO -------------------------------------------------

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace semobs
