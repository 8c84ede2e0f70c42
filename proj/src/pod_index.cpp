#include "podsearch/pod_index.hpp"

#include <algorithm>

namespace podsearch {

namespace {

std::map<Term, std::uint32_t> term_counts(const std::string& text) {
  std::map<Term, std::uint32_t> counts;
  for (const Term& term : tokenize(text)) ++counts[term];
  return counts;
}

void append_resource(InvertedIndex& index, const Url& url,
                     const std::map<Term, std::uint32_t>& counts) {
  // Resources are visited in url order, so posting lists stay sorted.
  for (const auto& [term, tf] : counts) {
    index.entries[term].push_back({url, tf});
  }
}

std::map<Term, TermStats> summarize(const InvertedIndex& index) {
  std::map<Term, TermStats> stats;
  for (const auto& [term, postings] : index.entries) {
    TermStats& s = stats[term];
    for (const Posting& p : postings) {
      s.tf_total += p.tf;
      ++s.matching_resources;
    }
  }
  return stats;
}

}  // namespace

PodIndexSet build_pod_index_set(const Pod& pod) {
  if (!pod.indexing_enabled) {
    fail(Errc::indexing_not_authorized, "indexing disabled for pod " + pod.url);
  }
  PodIndexSet out;
  out.pod_url = pod.url;
  out.built_at = pod.last_mutation;
  for (const auto& [url, resource] : pod.resources) {
    const auto counts = term_counts(resource.text);
    if (counts.empty()) continue;
    if (resource.acl.is_public) {
      append_resource(out.public_index, url, counts);
    } else {
      for (const WebId& reader : resource.acl.readers) {
        append_resource(out.scoped[reader], url, counts);
      }
    }
  }
  return out;
}

std::vector<Posting> lookup_postings(const PodIndexSet& index_set, const WebId& webid,
                                     const Term& term) {
  std::vector<Posting> merged;
  if (auto scoped = index_set.scoped.find(webid); scoped != index_set.scoped.end()) {
    if (auto it = scoped->second.entries.find(term); it != scoped->second.entries.end()) {
      merged = it->second;
    }
  }
  if (auto it = index_set.public_index.entries.find(term);
      it != index_set.public_index.entries.end()) {
    merged.insert(merged.end(), it->second.begin(), it->second.end());
  }
  // Scoped and public postings come from disjoint resource sets; a sort is
  // all that is needed to restore url order.
  std::sort(merged.begin(), merged.end(),
            [](const Posting& a, const Posting& b) { return a.resource_url < b.resource_url; });
  return merged;
}

MetadataProfile build_metadata_profile(const Pod& pod, const PodIndexSet& index_set) {
  if (index_set.built_at != pod.last_mutation || index_set.pod_url != pod.url) {
    fail(Errc::stale_index, "index for " + pod.url + " does not match the pod's current state");
  }
  MetadataProfile profile;
  profile.pod_url = pod.url;
  profile.built_at = index_set.built_at;
  for (const auto& [webid, index] : index_set.scoped) {
    profile.per_webid[webid] = summarize(index);
  }
  profile.public_terms = summarize(index_set.public_index);
  return profile;
}

std::pair<PodIndexSet, MetadataProfile> reindex(Corpus& corpus, const Url& pod_url) {
  Pod* pod = find_pod(corpus, pod_url);
  if (pod == nullptr) fail(Errc::unknown_target, "no pod at " + pod_url);
  PodIndexSet index_set = build_pod_index_set(*pod);
  MetadataProfile profile = build_metadata_profile(*pod, index_set);
  pod->dirty = false;
  return {std::move(index_set), std::move(profile)};
}

bool profile_readable_by_search_app(const Corpus& corpus, const Url& pod_url) {
  const Pod* pod = find_pod(corpus, pod_url);
  if (pod == nullptr) fail(Errc::unknown_target, "no pod at " + pod_url);
  return pod->registered_for_search;
}

namespace {

nlohmann::json index_to_json(const InvertedIndex& index) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [term, postings] : index.entries) {
    nlohmann::json list = nlohmann::json::array();
    for (const Posting& p : postings) {
      list.push_back({{"url", p.resource_url}, {"tf", p.tf}});
    }
    out[term] = std::move(list);
  }
  return out;
}

InvertedIndex index_from_json(const nlohmann::json& doc) {
  InvertedIndex index;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    std::vector<Posting>& postings = index.entries[it.key()];
    for (const auto& pj : it.value()) {
      postings.push_back({pj.at("url").get<Url>(), pj.at("tf").get<std::uint32_t>()});
    }
  }
  return index;
}

nlohmann::json stats_to_json(const std::map<Term, TermStats>& stats) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [term, s] : stats) {
    out[term] = {{"tf_total", s.tf_total}, {"matching_resources", s.matching_resources}};
  }
  return out;
}

std::map<Term, TermStats> stats_from_json(const nlohmann::json& doc) {
  std::map<Term, TermStats> stats;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    stats[it.key()] = {it.value().at("tf_total").get<std::uint64_t>(),
                       it.value().at("matching_resources").get<std::uint32_t>()};
  }
  return stats;
}

}  // namespace

nlohmann::json to_json(const PodIndexSet& index_set) {
  nlohmann::json scoped = nlohmann::json::object();
  for (const auto& [webid, index] : index_set.scoped) {
    scoped[webid] = index_to_json(index);
  }
  return nlohmann::json{{"pod_url", index_set.pod_url},
                        {"built_at", index_set.built_at},
                        {"public", index_to_json(index_set.public_index)},
                        {"scoped", std::move(scoped)}};
}

PodIndexSet pod_index_set_from_json(const nlohmann::json& doc) {
  PodIndexSet out;
  out.pod_url = doc.at("pod_url").get<Url>();
  out.built_at = doc.at("built_at").get<std::uint64_t>();
  out.public_index = index_from_json(doc.at("public"));
  const auto& scoped = doc.at("scoped");
  for (auto it = scoped.begin(); it != scoped.end(); ++it) {
    out.scoped[it.key()] = index_from_json(it.value());
  }
  return out;
}

nlohmann::json to_json(const MetadataProfile& profile) {
  nlohmann::json per_webid = nlohmann::json::object();
  for (const auto& [webid, stats] : profile.per_webid) {
    per_webid[webid] = stats_to_json(stats);
  }
  return nlohmann::json{{"pod_url", profile.pod_url},
                        {"built_at", profile.built_at},
                        {"per_webid", std::move(per_webid)},
                        {"public_terms", stats_to_json(profile.public_terms)}};
}

MetadataProfile metadata_profile_from_json(const nlohmann::json& doc) {
  MetadataProfile profile;
  profile.pod_url = doc.at("pod_url").get<Url>();
  profile.built_at = doc.at("built_at").get<std::uint64_t>();
  const auto& per_webid = doc.at("per_webid");
  for (auto it = per_webid.begin(); it != per_webid.end(); ++it) {
    profile.per_webid[it.key()] = stats_from_json(it.value());
  }
  profile.public_terms = stats_from_json(doc.at("public_terms"));
  return profile;
}

}  // namespace podsearch
