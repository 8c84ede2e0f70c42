#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "podsearch/overlay.hpp"

namespace podsearch {

enum class Strategy { direct, propagate };

const char* to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& text);  // throws unknown-strategy

struct Query {
  WebId webid;
  std::vector<Term> terms;  // deduplicated; results are order-insensitive
  Strategy strategy = Strategy::direct;
  MetadataMode mode = MetadataMode::exact;
};

struct RankedResult {
  Url resource_url;
  std::uint64_t score = 0;
  ServerId server_id;
  Url pod_url;

  friend bool operator==(const RankedResult&, const RankedResult&) = default;
};

// Caller handle -> authenticated WebId. Stands in for the platform's session
// layer; queries always run under the bound identity.
using SessionLedger = std::map<std::string, WebId>;

// Throws unauthenticated when the handle has no binding.
WebId authorize(const std::string& handle, const SessionLedger& ledger);

// Tokenizes raw inputs, drops duplicates, sorts. Multi-word input is split.
std::vector<Term> normalize_terms(const std::vector<std::string>& raw);

// Pods on one server whose entries match every term for this WebId.
std::set<Url> select_pods(const ServerMetadata& metadata, const WebId& webid,
                          const std::vector<Term>& terms, QueryTrace* trace = nullptr);

// Score = summed term frequency across query terms; descending, ties by
// ascending resource url. The scoring function is deliberately the only
// place relevance is computed.
std::vector<RankedResult> rank(std::vector<Hit> hits);

// Conjunctive match over one server: tiered selection (server metadata or
// sketches -> pods), then per-pod index lookups confirm every term. Only
// registered, indexing-enabled pods are consulted, so results never leave the
// WebId's visibility scope.
std::vector<Hit> search_server(const Corpus& corpus, const Snapshot& snapshot, const WebId& webid,
                               const std::vector<Term>& terms, MetadataMode mode,
                               const ServerId& server_id, QueryTrace* trace = nullptr);

// Full pipeline: source selection at the system tier, per-server matching,
// ranking. Both strategies and both metadata modes return the same set.
std::vector<RankedResult> search(const Corpus& corpus, const Snapshot& snapshot,
                                 const OverlayNetwork& network, const Query& query,
                                 QueryTrace* trace = nullptr);

// Binds the caller to the ledger identity first; any WebId claimed inside
// `query` is ignored.
std::vector<RankedResult> search_as(const Corpus& corpus, const Snapshot& snapshot,
                                    const OverlayNetwork& network, const std::string& handle,
                                    const SessionLedger& ledger, Query query,
                                    QueryTrace* trace = nullptr);

// JSON array of {url, score, server, pod}, in rank order.
nlohmann::json results_to_json(const std::vector<RankedResult>& results);

}  // namespace podsearch
