#include "podsearch/search.hpp"

#include <algorithm>

namespace podsearch {

const char* to_string(Strategy strategy) {
  return strategy == Strategy::direct ? "direct" : "propagate";
}

Strategy strategy_from_string(const std::string& text) {
  if (text == "direct") return Strategy::direct;
  if (text == "propagate") return Strategy::propagate;
  fail(Errc::unknown_strategy, "unknown search strategy '" + text + "'");
}

WebId authorize(const std::string& handle, const SessionLedger& ledger) {
  auto it = ledger.find(handle);
  if (it == ledger.end()) fail(Errc::unauthenticated, "no session bound to handle '" + handle + "'");
  return it->second;
}

std::vector<Term> normalize_terms(const std::vector<std::string>& raw) {
  std::set<Term> unique;
  for (const std::string& input : raw) {
    for (Term& term : tokenize(input)) unique.insert(std::move(term));
  }
  return {unique.begin(), unique.end()};
}

std::set<Url> select_pods(const ServerMetadata& metadata, const WebId& webid,
                          const std::vector<Term>& terms, QueryTrace* trace) {
  std::set<Url> pods;
  bool first = true;
  for (const Term& term : terms) {
    const MetadataEntry entry = effective_entry(metadata, webid, term, trace);
    if (first) {
      pods = entry.sources;
      first = false;
    } else {
      std::set<Url> narrowed;
      std::set_intersection(pods.begin(), pods.end(), entry.sources.begin(), entry.sources.end(),
                            std::inserter(narrowed, narrowed.begin()));
      pods = std::move(narrowed);
    }
    if (pods.empty()) break;
  }
  return pods;
}

std::vector<RankedResult> rank(std::vector<Hit> hits) {
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.tf_sum != b.tf_sum ? a.tf_sum > b.tf_sum : a.resource_url < b.resource_url;
  });
  std::vector<RankedResult> out;
  out.reserve(hits.size());
  for (Hit& hit : hits) {
    out.push_back({std::move(hit.resource_url), hit.tf_sum, std::move(hit.server_id),
                   std::move(hit.pod_url)});
  }
  return out;
}

namespace {

std::set<Url> bloom_candidate_pods(const Corpus& corpus, const Snapshot& snapshot,
                                   const ServerId& server_id) {
  std::set<Url> candidates;
  const Server* server = find_server(corpus, server_id);
  if (server == nullptr) return candidates;
  for (const auto& [pod_url, pod] : server->pods) {
    if (pod.registered_for_search && pod.indexing_enabled && snapshot.indexes.count(pod_url) > 0) {
      candidates.insert(pod_url);
    }
  }
  return candidates;
}

}  // namespace

std::vector<Hit> search_server(const Corpus& corpus, const Snapshot& snapshot, const WebId& webid,
                               const std::vector<Term>& terms, MetadataMode mode,
                               const ServerId& server_id, QueryTrace* trace) {
  std::vector<Hit> hits;
  auto mit = snapshot.servers.find(server_id);
  if (mit == snapshot.servers.end()) return hits;
  if (trace != nullptr) trace->servers_contacted.insert(server_id);

  std::set<Url> pods;
  if (mode == MetadataMode::exact) {
    pods = select_pods(mit->second, webid, terms, trace);
  } else {
    pods = bloom_candidate_pods(corpus, snapshot, server_id);
    for (const Term& term : terms) {
      pods = bloom_select(snapshot.sketches, webid, server_id, term, pods, trace);
      if (pods.empty()) break;
    }
  }

  for (const Url& pod_url : pods) {
    auto iit = snapshot.indexes.find(pod_url);
    if (iit == snapshot.indexes.end()) continue;
    if (trace != nullptr) {
      trace->pods_selected.insert(pod_url);
      ++trace->pod_index_reads;
    }
    // Conjunctive match: a resource counts only when every term has a posting.
    std::map<Url, std::pair<std::size_t, std::uint64_t>> per_resource;  // url -> (terms hit, tf)
    for (const Term& term : terms) {
      for (const Posting& posting : lookup_postings(iit->second, webid, term)) {
        auto& [terms_hit, tf_sum] = per_resource[posting.resource_url];
        ++terms_hit;
        tf_sum += posting.tf;
      }
    }
    for (const auto& [url, counts] : per_resource) {
      if (counts.first == terms.size()) {
        hits.push_back({url, counts.second, server_id, pod_url});
      }
    }
  }
  return hits;
}

std::vector<RankedResult> search(const Corpus& corpus, const Snapshot& snapshot,
                                 const OverlayNetwork& network, const Query& query,
                                 QueryTrace* trace) {
  const std::vector<Term> terms = normalize_terms(query.terms);
  if (terms.empty()) fail(Errc::empty_query, "query has no terms");
  if (snapshot.as_of > corpus.event_counter) {
    fail(Errc::stale_metadata, "metadata snapshot is newer than the corpus snapshot");
  }

  std::vector<Hit> hits;
  if (query.strategy == Strategy::direct) {
    for (const ServerId& server_id :
         select_servers(network, snapshot, query.webid, terms, query.mode, trace)) {
      std::vector<Hit> server_hits =
          search_server(corpus, snapshot, query.webid, terms, query.mode, server_id, trace);
      hits.insert(hits.end(), std::make_move_iterator(server_hits.begin()),
                  std::make_move_iterator(server_hits.end()));
    }
  } else {
    hits = propagate_query(network, query.webid, terms, [&](const ServerId& server_id) {
      return search_server(corpus, snapshot, query.webid, terms, query.mode, server_id, trace);
    });
  }
  return rank(std::move(hits));
}

std::vector<RankedResult> search_as(const Corpus& corpus, const Snapshot& snapshot,
                                    const OverlayNetwork& network, const std::string& handle,
                                    const SessionLedger& ledger, Query query, QueryTrace* trace) {
  query.webid = authorize(handle, ledger);
  return search(corpus, snapshot, network, query, trace);
}

nlohmann::json results_to_json(const std::vector<RankedResult>& results) {
  nlohmann::json out = nlohmann::json::array();
  for (const RankedResult& r : results) {
    out.push_back({{"url", r.resource_url},
                   {"score", r.score},
                   {"server", r.server_id},
                   {"pod", r.pod_url}});
  }
  return out;
}

}  // namespace podsearch
