#include "podsearch/overlay.hpp"

#include <algorithm>

namespace podsearch {

OverlayNetwork make_overlay(std::size_t node_count) {
  OverlayNetwork network;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < node_count; ++i) {
    ids.push_back("node" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1));
  }
  for (const std::string& id : ids) {
    OverlayNode node;
    node.node_id = id;
    for (const std::string& peer : ids) {
      if (peer != id) node.peers.insert(peer);
    }
    network.nodes.emplace(id, std::move(node));
  }
  return network;
}

std::string metadata_location(const ServerId& server_id) {
  return server_id + "/search-meta/";
}

bool register_server(OverlayNetwork& network, const ServerId& server_id,
                     const std::string& location) {
  bool fresh = false;
  for (auto& [id, node] : network.nodes) {
    fresh = node.locations.emplace(server_id, location).second || fresh;
  }
  return fresh;
}

bool server_registered(const OverlayNetwork& network, const ServerId& server_id) {
  for (const auto& [id, node] : network.nodes) {
    if (node.locations.count(server_id) > 0) return true;
  }
  return false;
}

std::map<ServerId, std::string> registered_servers(const OverlayNetwork& network) {
  std::map<ServerId, std::string> out;
  for (const auto& [id, node] : network.nodes) {
    out.insert(node.locations.begin(), node.locations.end());
  }
  return out;
}

namespace {

// Descending score, ties by ascending id.
std::vector<ServerId> rank_servers(const std::map<ServerId, std::uint64_t>& scores) {
  std::vector<ServerId> out;
  for (const auto& [id, score] : scores) out.push_back(id);
  std::stable_sort(out.begin(), out.end(), [&](const ServerId& a, const ServerId& b) {
    const std::uint64_t sa = scores.at(a);
    const std::uint64_t sb = scores.at(b);
    return sa != sb ? sa > sb : a < b;
  });
  return out;
}

}  // namespace

std::vector<ServerId> select_servers(const OverlayNetwork& network, const Snapshot& snapshot,
                                     const WebId& webid, const std::vector<Term>& terms,
                                     MetadataMode mode, QueryTrace* trace) {
  const auto registered = registered_servers(network);
  std::set<ServerId> candidates;
  for (const auto& [server_id, location] : registered) candidates.insert(server_id);

  if (mode == MetadataMode::exact) {
    for (const Term& term : terms) {
      const MetadataEntry entry = effective_entry(snapshot.system, webid, term, trace);
      std::set<ServerId> narrowed;
      std::set_intersection(candidates.begin(), candidates.end(), entry.sources.begin(),
                            entry.sources.end(), std::inserter(narrowed, narrowed.begin()));
      candidates = std::move(narrowed);
      if (candidates.empty()) break;
    }
  } else {
    std::set<std::string> remaining(candidates.begin(), candidates.end());
    for (const Term& term : terms) {
      remaining = bloom_select(snapshot.sketches, webid, std::nullopt, term, remaining, trace);
      if (remaining.empty()) break;
    }
    candidates.clear();
    candidates.insert(remaining.begin(), remaining.end());
  }

  std::map<ServerId, std::uint64_t> scores;
  for (const ServerId& server_id : candidates) {
    std::uint64_t score = 0;
    if (mode == MetadataMode::exact) {
      if (auto it = snapshot.servers.find(server_id); it != snapshot.servers.end()) {
        for (const Term& term : terms) {
          score += effective_entry(it->second, webid, term, trace).stats.tf_total;
        }
      }
    }
    scores[server_id] = score;
  }
  std::vector<ServerId> ranked = rank_servers(scores);
  if (trace != nullptr) trace->servers_selected = ranked;
  return ranked;
}

std::vector<Hit> propagate_query(const OverlayNetwork& network, const WebId& webid,
                                 const std::vector<Term>& terms,
                                 const ServerSearchFn& search_server) {
  (void)webid;
  (void)terms;
  std::map<Url, Hit> merged;  // deduplicate across nodes by resource url
  for (const auto& [node_id, node] : network.nodes) {
    for (const auto& [server_id, location] : node.locations) {
      for (Hit& hit : search_server(server_id)) {
        merged.emplace(hit.resource_url, std::move(hit));
      }
    }
  }
  std::vector<Hit> out;
  out.reserve(merged.size());
  for (auto& [url, hit] : merged) out.push_back(std::move(hit));
  return out;
}

nlohmann::json logical_table_json(const OverlayNode& node, const std::set<WebId>& webids) {
  nlohmann::json table = nlohmann::json::object();
  for (const WebId& webid : webids) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& [server_id, location] : node.locations) {
      row.push_back({{"server_id", server_id}, {"location", location}});
    }
    table[webid] = std::move(row);
  }
  return nlohmann::json{{"node_id", node.node_id}, {"table", std::move(table)}};
}

nlohmann::json to_json(const OverlayNetwork& network, const std::set<WebId>& webids) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [id, node] : network.nodes) {
    nodes.push_back(logical_table_json(node, webids));
  }
  return nlohmann::json{{"nodes", std::move(nodes)}};
}

OverlayNetwork overlay_from_json(const nlohmann::json& doc) {
  OverlayNetwork network;
  for (const auto& nj : doc.at("nodes")) {
    OverlayNode node;
    node.node_id = nj.at("node_id").get<std::string>();
    for (const auto& [webid, row] : nj.at("table").items()) {
      for (const auto& entry : row) {
        node.locations[entry.at("server_id").get<ServerId>()] =
            entry.at("location").get<std::string>();
      }
    }
    network.nodes.emplace(node.node_id, std::move(node));
  }
  for (auto& [id, node] : network.nodes) {
    for (const auto& [other, _] : network.nodes) {
      if (other != id) node.peers.insert(other);
    }
  }
  return network;
}

}  // namespace podsearch
