#pragma once

#include <stdexcept>
#include <string>

namespace podsearch {

enum class Errc {
  unknown_target,
  duplicate_url,
  invalid_corpus,
  indexing_not_authorized,
  stale_index,
  stale_profile,
  stale_metadata,
  invalid_params,
  scope_violation,
  unauthenticated,
  empty_query,
  unknown_strategy,
  mixed_server_log,
  server_not_registered,
  invalid_config,
  incomplete_audit,
  io_error,
};

const char* to_string(Errc code);

// Single exception type for the whole library. `code` is the stable,
// machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace podsearch
