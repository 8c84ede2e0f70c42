#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "podsearch/metadata.hpp"

namespace podsearch {

// One resource matched by a per-server search, before ranking.
struct Hit {
  Url resource_url;
  std::uint64_t tf_sum = 0;
  ServerId server_id;
  Url pod_url;

  friend bool operator==(const Hit&, const Hit&) = default;
};

// Overlay nodes catalogue where each server keeps its aggregated metadata.
// Logical tables hold locations only — never terms, resource urls or counts.
struct OverlayNode {
  std::string node_id;
  std::map<ServerId, std::string> locations;
  std::set<std::string> peers;
};

struct OverlayNetwork {
  std::map<std::string, OverlayNode> nodes;
};

OverlayNetwork make_overlay(std::size_t node_count);

// Conventional location of a server's metadata store.
std::string metadata_location(const ServerId& server_id);

// Full replication: the location lands on every node. Registering the same
// server twice is an idempotent no-op; the return value reports whether the
// entry was new so callers can flag duplicates.
bool register_server(OverlayNetwork& network, const ServerId& server_id,
                     const std::string& location);

bool server_registered(const OverlayNetwork& network, const ServerId& server_id);
std::map<ServerId, std::string> registered_servers(const OverlayNetwork& network);

// Servers matching every term for this WebId, ranked by descending summed
// term frequency (from the server tier), ties by ascending server id. Exact
// mode never over-selects; bloom mode may, and ranks lexicographically since
// sketches expose no counts.
std::vector<ServerId> select_servers(const OverlayNetwork& network, const Snapshot& snapshot,
                                     const WebId& webid, const std::vector<Term>& terms,
                                     MetadataMode mode, QueryTrace* trace = nullptr);

// Second routing strategy: fan the query out to every node, let each node run
// the per-server search over the servers it catalogues, then merge. With full
// replication every node sees every server; duplicates are collapsed so the
// aggregate equals the direct strategy on the same snapshot.
using ServerSearchFn = std::function<std::vector<Hit>(const ServerId&)>;
std::vector<Hit> propagate_query(const OverlayNetwork& network, const WebId& webid,
                                 const std::vector<Term>& terms, const ServerSearchFn& search_server);

// {node_id, table:{webid:[{server_id, location}]}}
nlohmann::json logical_table_json(const OverlayNode& node, const std::set<WebId>& webids);
nlohmann::json to_json(const OverlayNetwork& network, const std::set<WebId>& webids);
OverlayNetwork overlay_from_json(const nlohmann::json& doc);

}  // namespace podsearch
