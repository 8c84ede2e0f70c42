#include "podsearch/errors.hpp"

namespace podsearch {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::unknown_target: return "unknown-target";
    case Errc::duplicate_url: return "duplicate-url";
    case Errc::invalid_corpus: return "invalid-corpus";
    case Errc::indexing_not_authorized: return "indexing-not-authorized";
    case Errc::stale_index: return "stale-index";
    case Errc::stale_profile: return "stale-profile";
    case Errc::stale_metadata: return "stale-metadata";
    case Errc::invalid_params: return "invalid-params";
    case Errc::scope_violation: return "scope-violation";
    case Errc::unauthenticated: return "unauthenticated";
    case Errc::empty_query: return "empty-query";
    case Errc::unknown_strategy: return "unknown-strategy";
    case Errc::mixed_server_log: return "mixed-server-log";
    case Errc::server_not_registered: return "server-not-registered";
    case Errc::invalid_config: return "invalid-config";
    case Errc::incomplete_audit: return "incomplete-audit";
    case Errc::io_error: return "io-error";
  }
  return "unknown-error";
}

}  // namespace podsearch
