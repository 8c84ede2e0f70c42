#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "podsearch/bloom.hpp"
#include "podsearch/core.hpp"
#include "podsearch/pod_index.hpp"

namespace podsearch {

enum class MetadataMode { exact, bloom };

const char* to_string(MetadataMode mode);
MetadataMode metadata_mode_from_string(const std::string& text);

struct StatsRecord {
  std::uint32_t source_count = 0;
  std::uint64_t tf_total = 0;
  // Matching resources contributing to this entry at this tier.
  std::uint64_t collection_size = 0;

  friend bool operator==(const StatsRecord&, const StatsRecord&) = default;
};

// One (webid, term) cell: the matching sources (pod urls at the server tier,
// server ids at the system tier) plus summed stats. Cells with no match are
// simply absent; readers treat absence as (empty, zero).
struct MetadataEntry {
  std::set<std::string> sources;
  StatsRecord stats;

  friend bool operator==(const MetadataEntry&, const MetadataEntry&) = default;
};

using TermEntries = std::map<Term, MetadataEntry>;

// Aggregated over one server's registered pods. `per_webid` holds the
// ACL-derived partitions, one per WebId with no cross-partition sharing;
// `public_terms` is the shared partition every identity may read.
struct ServerMetadata {
  ServerId server_id;
  std::map<WebId, TermEntries> per_webid;
  TermEntries public_terms;
  std::uint64_t as_of = 0;
};

struct SystemMetadata {
  std::map<WebId, TermEntries> per_webid;
  TermEntries public_terms;
  // Per-server snapshot times; aggregation tolerates lagging inputs.
  std::map<ServerId, std::uint64_t> snapshot_times;
  std::uint64_t as_of = 0;
};

// Records which partitions a read touched. Used by the audit layer to show
// that serving one WebId never reads another WebId's partition.
struct QueryTrace {
  std::vector<ServerId> servers_selected;
  std::set<ServerId> servers_contacted;
  std::set<Url> pods_selected;
  std::uint64_t pod_index_reads = 0;
  std::set<WebId> partitions_read;
  bool public_partition_read = false;
};

// Throws stale-profile when a registered, indexing-enabled pod has no current
// profile. Registered pods with indexing disabled are skipped: they are
// undiscoverable until their owner enables indexing.
ServerMetadata aggregate_server_metadata(const Server& server,
                                         const std::map<Url, MetadataProfile>& profiles,
                                         std::uint64_t as_of);

struct ServerSnapshotInput {
  ServerId server_id;
  ServerMetadata metadata;
  std::uint64_t snapshot_time = 0;
};

SystemMetadata aggregate_system_metadata(const std::vector<ServerSnapshotInput>& snapshots);

// Merged view of one (webid, term) cell: the WebId's own partition plus the
// shared public partition. Absent cells come back empty.
MetadataEntry effective_entry(const std::map<WebId, TermEntries>& per_webid,
                              const TermEntries& public_terms, const WebId& webid,
                              const Term& term, QueryTrace* trace = nullptr);
MetadataEntry effective_entry(const ServerMetadata& metadata, const WebId& webid, const Term& term,
                              QueryTrace* trace = nullptr);
MetadataEntry effective_entry(const SystemMetadata& metadata, const WebId& webid, const Term& term,
                              QueryTrace* trace = nullptr);

// Terms a WebId can observe at this tier (own partition plus public).
std::set<Term> effective_terms(const std::map<WebId, TermEntries>& per_webid,
                               const TermEntries& public_terms, const WebId& webid);

// Probabilistic alternative to the exact tiers: one sketch per WebId per
// tier over (term, context) keys, plus one shared sketch for public terms.
struct SketchSet {
  BloomParams params;
  std::uint64_t as_of = 0;
  std::map<WebId, BloomSketch> system_scoped;
  BloomSketch system_shared;
  std::map<ServerId, std::map<WebId, BloomSketch>> server_scoped;
  std::map<ServerId, BloomSketch> server_shared;
};

SketchSet build_sketches(const std::map<ServerId, ServerMetadata>& servers,
                         const SystemMetadata& system, const BloomParams& params,
                         std::uint64_t as_of);

// Maybe-matching contexts for (webid, term) among `candidates`: always a
// superset of the true matches. `server` selects the server tier.
std::set<std::string> bloom_select(const SketchSet& sketches, const WebId& webid,
                                   const std::optional<ServerId>& server, const Term& term,
                                   const std::set<std::string>& candidates,
                                   QueryTrace* trace = nullptr);

// Everything a refresh produces; search runs against one of these.
struct Snapshot {
  std::uint64_t as_of = 0;
  std::map<Url, PodIndexSet> indexes;
  std::map<Url, MetadataProfile> profiles;
  std::map<ServerId, ServerMetadata> servers;
  SystemMetadata system;
  SketchSet sketches;
  std::vector<Url> skipped_pods;  // indexing disabled at refresh time
};

// Reindexes dirty pods (reusing clean ones from `previous` when given),
// re-aggregates both tiers and rebuilds all sketches. Clears dirty markers.
Snapshot refresh(Corpus& corpus, const BloomParams& params, const Snapshot* previous = nullptr);

// Dump formats. Both tiers serialize as {tier, as_of, per_webid:{webid:{term:
// {sources:[...sorted], stats:{source_count, tf_total, collection_size}}}}}
// plus the shared `public` partition; the system tier adds `snapshot_times`
// and the server tier its `server_id`.
nlohmann::json metadata_to_json(const ServerMetadata& metadata);
nlohmann::json metadata_to_json(const SystemMetadata& metadata);
ServerMetadata server_metadata_from_json(const nlohmann::json& doc);
SystemMetadata system_metadata_from_json(const nlohmann::json& doc);

nlohmann::json sketches_to_json(const SketchSet& sketches);
SketchSet sketches_from_json(const nlohmann::json& doc);

}  // namespace podsearch
