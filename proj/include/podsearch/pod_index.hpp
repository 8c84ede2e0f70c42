#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "podsearch/core.hpp"

namespace podsearch {

struct Posting {
  Url resource_url;
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

// term -> postings sorted by resource url. No empty posting lists.
struct InvertedIndex {
  std::map<Term, std::vector<Posting>> entries;

  bool empty() const { return entries.empty(); }

  friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;
};

// Per-pod index family. Each reader WebId gets its own index over the pod's
// ACL-listed (non-public) resources; public resources live only in
// `public_index` and are merged in at lookup time. A WebId appears in
// `scoped` only if it has at least one posting.
struct PodIndexSet {
  Url pod_url;
  std::map<WebId, InvertedIndex> scoped;
  InvertedIndex public_index;
  std::uint64_t built_at = 0;

  friend bool operator==(const PodIndexSet&, const PodIndexSet&) = default;
};

struct TermStats {
  std::uint64_t tf_total = 0;
  std::uint32_t matching_resources = 0;

  friend bool operator==(const TermStats&, const TermStats&) = default;
};

// Pod-level summary deposited in the hosting server's metadata store. The
// aggregation tiers are computed from these profiles alone; every entry is
// derivable from the pod's index set.
struct MetadataProfile {
  Url pod_url;
  std::map<WebId, std::map<Term, TermStats>> per_webid;
  std::map<Term, TermStats> public_terms;
  std::uint64_t built_at = 0;

  friend bool operator==(const MetadataProfile&, const MetadataProfile&) = default;
};

// Throws indexing-not-authorized when the pod owner has not enabled indexing;
// such pods stay undiscoverable.
PodIndexSet build_pod_index_set(const Pod& pod);

// scoped[webid][term] merged with public_index[term]. Never consults another
// WebId's index. Missing term or unknown WebId yields an empty list.
std::vector<Posting> lookup_postings(const PodIndexSet& index_set, const WebId& webid,
                                     const Term& term);

// Throws stale-index when the index set does not match the pod's current
// mutation stamp.
MetadataProfile build_metadata_profile(const Pod& pod, const PodIndexSet& index_set);

// Rebuild from scratch and clear the pod's dirty marker. Downstream
// aggregated metadata goes stale by construction (its as_of lags).
std::pair<PodIndexSet, MetadataProfile> reindex(Corpus& corpus, const Url& pod_url);

// A pod's deposited profile becomes readable by the search identity only once
// the pod is registered for search.
bool profile_readable_by_search_app(const Corpus& corpus, const Url& pod_url);

// {pod_url, built_at, public:{term:[{url,tf}...]}, scoped:{webid:{term:[...]}}}
// with posting arrays sorted by url.
nlohmann::json to_json(const PodIndexSet& index_set);
PodIndexSet pod_index_set_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const MetadataProfile& profile);
MetadataProfile metadata_profile_from_json(const nlohmann::json& doc);

}  // namespace podsearch
