#include "podsearch/metadata.hpp"

#include <algorithm>

namespace podsearch {

const char* to_string(MetadataMode mode) {
  return mode == MetadataMode::exact ? "exact" : "bloom";
}

MetadataMode metadata_mode_from_string(const std::string& text) {
  if (text == "exact") return MetadataMode::exact;
  if (text == "bloom") return MetadataMode::bloom;
  fail(Errc::invalid_params, "unknown metadata mode '" + text + "'");
}

namespace {

void fold_profile_terms(TermEntries& into, const std::map<Term, TermStats>& stats,
                        const Url& pod_url) {
  for (const auto& [term, s] : stats) {
    MetadataEntry& entry = into[term];
    entry.sources.insert(pod_url);
    entry.stats.tf_total += s.tf_total;
    entry.stats.collection_size += s.matching_resources;
    entry.stats.source_count = static_cast<std::uint32_t>(entry.sources.size());
  }
}

void fold_server_terms(TermEntries& into, const TermEntries& from, const ServerId& server_id) {
  for (const auto& [term, entry] : from) {
    if (entry.stats.source_count == 0) continue;
    MetadataEntry& out = into[term];
    out.sources.insert(server_id);
    out.stats.tf_total += entry.stats.tf_total;
    out.stats.collection_size += entry.stats.collection_size;
    out.stats.source_count = static_cast<std::uint32_t>(out.sources.size());
  }
}

}  // namespace

ServerMetadata aggregate_server_metadata(const Server& server,
                                         const std::map<Url, MetadataProfile>& profiles,
                                         std::uint64_t as_of) {
  ServerMetadata metadata;
  metadata.server_id = server.id;
  metadata.as_of = as_of;
  for (const auto& [pod_url, pod] : server.pods) {
    if (!pod.registered_for_search) continue;
    if (!pod.indexing_enabled) continue;  // undiscoverable until indexing is enabled
    auto it = profiles.find(pod_url);
    if (it == profiles.end() || it->second.built_at != pod.last_mutation) {
      fail(Errc::stale_profile, "no current metadata profile for registered pod " + pod_url);
    }
    const MetadataProfile& profile = it->second;
    for (const auto& [webid, stats] : profile.per_webid) {
      fold_profile_terms(metadata.per_webid[webid], stats, pod_url);
    }
    fold_profile_terms(metadata.public_terms, profile.public_terms, pod_url);
  }
  return metadata;
}

SystemMetadata aggregate_system_metadata(const std::vector<ServerSnapshotInput>& snapshots) {
  SystemMetadata system;
  for (const ServerSnapshotInput& snap : snapshots) {
    system.snapshot_times[snap.server_id] = snap.snapshot_time;
    system.as_of = std::max(system.as_of, snap.snapshot_time);
    for (const auto& [webid, terms] : snap.metadata.per_webid) {
      fold_server_terms(system.per_webid[webid], terms, snap.server_id);
    }
    fold_server_terms(system.public_terms, snap.metadata.public_terms, snap.server_id);
    // Servers whose partitions were all empty still contribute nothing but
    // their snapshot time.
  }
  // Drop WebIds whose partitions ended up empty so absence stays canonical.
  for (auto it = system.per_webid.begin(); it != system.per_webid.end();) {
    it = it->second.empty() ? system.per_webid.erase(it) : std::next(it);
  }
  return system;
}

MetadataEntry effective_entry(const std::map<WebId, TermEntries>& per_webid,
                              const TermEntries& public_terms, const WebId& webid,
                              const Term& term, QueryTrace* trace) {
  MetadataEntry merged;
  if (trace != nullptr) trace->partitions_read.insert(webid);
  if (auto pit = per_webid.find(webid); pit != per_webid.end()) {
    if (auto it = pit->second.find(term); it != pit->second.end()) merged = it->second;
  }
  if (trace != nullptr) trace->public_partition_read = true;
  if (auto it = public_terms.find(term); it != public_terms.end()) {
    merged.sources.insert(it->second.sources.begin(), it->second.sources.end());
    merged.stats.tf_total += it->second.stats.tf_total;
    merged.stats.collection_size += it->second.stats.collection_size;
  }
  merged.stats.source_count = static_cast<std::uint32_t>(merged.sources.size());
  return merged;
}

MetadataEntry effective_entry(const ServerMetadata& metadata, const WebId& webid, const Term& term,
                              QueryTrace* trace) {
  return effective_entry(metadata.per_webid, metadata.public_terms, webid, term, trace);
}

MetadataEntry effective_entry(const SystemMetadata& metadata, const WebId& webid, const Term& term,
                              QueryTrace* trace) {
  return effective_entry(metadata.per_webid, metadata.public_terms, webid, term, trace);
}

std::set<Term> effective_terms(const std::map<WebId, TermEntries>& per_webid,
                               const TermEntries& public_terms, const WebId& webid) {
  std::set<Term> terms;
  if (auto it = per_webid.find(webid); it != per_webid.end()) {
    for (const auto& [term, entry] : it->second) terms.insert(term);
  }
  for (const auto& [term, entry] : public_terms) terms.insert(term);
  return terms;
}

namespace {

std::vector<std::string> scoped_keys(const TermEntries& terms) {
  std::vector<std::string> keys;
  for (const auto& [term, entry] : terms) {
    for (const std::string& source : entry.sources) keys.push_back(bloom_key(term, source));
  }
  return keys;
}

}  // namespace

SketchSet build_sketches(const std::map<ServerId, ServerMetadata>& servers,
                         const SystemMetadata& system, const BloomParams& params,
                         std::uint64_t as_of) {
  SketchSet out;
  out.params = params;
  out.as_of = as_of;
  for (const auto& [webid, terms] : system.per_webid) {
    out.system_scoped.emplace(webid, bloom_build(scoped_keys(terms), params, webid, "system"));
  }
  out.system_shared = bloom_build(scoped_keys(system.public_terms), params, "", "system");
  for (const auto& [server_id, metadata] : servers) {
    auto& scoped = out.server_scoped[server_id];
    for (const auto& [webid, terms] : metadata.per_webid) {
      scoped.emplace(webid, bloom_build(scoped_keys(terms), params, webid, "server"));
    }
    out.server_shared.emplace(server_id,
                              bloom_build(scoped_keys(metadata.public_terms), params, "", "server"));
  }
  return out;
}

std::set<std::string> bloom_select(const SketchSet& sketches, const WebId& webid,
                                   const std::optional<ServerId>& server, const Term& term,
                                   const std::set<std::string>& candidates, QueryTrace* trace) {
  const BloomSketch* scoped = nullptr;
  const BloomSketch* shared = nullptr;
  if (server) {
    if (auto sit = sketches.server_scoped.find(*server); sit != sketches.server_scoped.end()) {
      if (auto it = sit->second.find(webid); it != sit->second.end()) scoped = &it->second;
    }
    if (auto it = sketches.server_shared.find(*server); it != sketches.server_shared.end()) {
      shared = &it->second;
    }
  } else {
    if (auto it = sketches.system_scoped.find(webid); it != sketches.system_scoped.end()) {
      scoped = &it->second;
    }
    shared = &sketches.system_shared;
  }
  if (trace != nullptr) {
    trace->partitions_read.insert(webid);
    trace->public_partition_read = true;
  }
  std::set<std::string> selected;
  for (const std::string& candidate : candidates) {
    const std::string key = bloom_key(term, candidate);
    const bool maybe = (scoped != nullptr && bloom_query_scoped(*scoped, webid, key)) ||
                       (shared != nullptr && bloom_contains(*shared, key));
    if (maybe) selected.insert(candidate);
  }
  return selected;
}

Snapshot refresh(Corpus& corpus, const BloomParams& params, const Snapshot* previous) {
  Snapshot snapshot;
  snapshot.as_of = corpus.event_counter;
  for (auto& [sid, server] : corpus.servers) {
    for (auto& [pod_url, pod] : server.pods) {
      if (!pod.indexing_enabled) {
        snapshot.skipped_pods.push_back(pod_url);
        continue;
      }
      const bool reusable = previous != nullptr && !pod.dirty &&
                            previous->indexes.count(pod_url) > 0 &&
                            previous->indexes.at(pod_url).built_at == pod.last_mutation;
      if (reusable) {
        snapshot.indexes.emplace(pod_url, previous->indexes.at(pod_url));
        snapshot.profiles.emplace(pod_url, previous->profiles.at(pod_url));
      } else {
        auto [index_set, profile] = reindex(corpus, pod_url);
        snapshot.indexes.emplace(pod_url, std::move(index_set));
        snapshot.profiles.emplace(pod_url, std::move(profile));
      }
    }
  }
  std::vector<ServerSnapshotInput> inputs;
  for (const auto& [sid, server] : corpus.servers) {
    ServerMetadata metadata =
        aggregate_server_metadata(server, snapshot.profiles, corpus.event_counter);
    inputs.push_back({sid, metadata, corpus.event_counter});
    snapshot.servers.emplace(sid, std::move(metadata));
  }
  snapshot.system = aggregate_system_metadata(inputs);
  snapshot.system.as_of = corpus.event_counter;
  snapshot.sketches = build_sketches(snapshot.servers, snapshot.system, params, corpus.event_counter);
  return snapshot;
}

namespace {

nlohmann::json entries_to_json(const TermEntries& terms) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [term, entry] : terms) {
    out[term] = {{"sources", std::vector<std::string>(entry.sources.begin(), entry.sources.end())},
                 {"stats",
                  {{"source_count", entry.stats.source_count},
                   {"tf_total", entry.stats.tf_total},
                   {"collection_size", entry.stats.collection_size}}}};
  }
  return out;
}

TermEntries entries_from_json(const nlohmann::json& doc) {
  TermEntries terms;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    MetadataEntry entry;
    for (const auto& source : it.value().at("sources")) {
      entry.sources.insert(source.get<std::string>());
    }
    const auto& stats = it.value().at("stats");
    entry.stats.source_count = stats.at("source_count").get<std::uint32_t>();
    entry.stats.tf_total = stats.at("tf_total").get<std::uint64_t>();
    entry.stats.collection_size = stats.at("collection_size").get<std::uint64_t>();
    terms.emplace(it.key(), std::move(entry));
  }
  return terms;
}

nlohmann::json partitions_to_json(const std::map<WebId, TermEntries>& per_webid) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [webid, terms] : per_webid) out[webid] = entries_to_json(terms);
  return out;
}

std::map<WebId, TermEntries> partitions_from_json(const nlohmann::json& doc) {
  std::map<WebId, TermEntries> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) out[it.key()] = entries_from_json(it.value());
  return out;
}

}  // namespace

nlohmann::json metadata_to_json(const ServerMetadata& metadata) {
  return nlohmann::json{{"tier", "server"},
                        {"server_id", metadata.server_id},
                        {"as_of", metadata.as_of},
                        {"per_webid", partitions_to_json(metadata.per_webid)},
                        {"public", entries_to_json(metadata.public_terms)}};
}

nlohmann::json metadata_to_json(const SystemMetadata& metadata) {
  nlohmann::json times = nlohmann::json::object();
  for (const auto& [server_id, t] : metadata.snapshot_times) times[server_id] = t;
  return nlohmann::json{{"tier", "system"},
                        {"as_of", metadata.as_of},
                        {"per_webid", partitions_to_json(metadata.per_webid)},
                        {"public", entries_to_json(metadata.public_terms)},
                        {"snapshot_times", std::move(times)}};
}

ServerMetadata server_metadata_from_json(const nlohmann::json& doc) {
  ServerMetadata metadata;
  metadata.server_id = doc.at("server_id").get<ServerId>();
  metadata.as_of = doc.at("as_of").get<std::uint64_t>();
  metadata.per_webid = partitions_from_json(doc.at("per_webid"));
  metadata.public_terms = entries_from_json(doc.at("public"));
  return metadata;
}

SystemMetadata system_metadata_from_json(const nlohmann::json& doc) {
  SystemMetadata metadata;
  metadata.as_of = doc.at("as_of").get<std::uint64_t>();
  metadata.per_webid = partitions_from_json(doc.at("per_webid"));
  metadata.public_terms = entries_from_json(doc.at("public"));
  const auto& times = doc.at("snapshot_times");
  for (auto it = times.begin(); it != times.end(); ++it) {
    metadata.snapshot_times[it.key()] = it.value().get<std::uint64_t>();
  }
  return metadata;
}

nlohmann::json sketches_to_json(const SketchSet& sketches) {
  nlohmann::json params = nlohmann::json::object();
  params["target_fpr"] = sketches.params.target_fpr;
  params["seed"] = sketches.params.seed;
  if (sketches.params.m) params["m"] = *sketches.params.m;
  if (sketches.params.k) params["k"] = *sketches.params.k;
  nlohmann::json system_scoped = nlohmann::json::object();
  for (const auto& [webid, sketch] : sketches.system_scoped) system_scoped[webid] = to_json(sketch);
  nlohmann::json servers = nlohmann::json::object();
  for (const auto& [server_id, scoped] : sketches.server_scoped) {
    nlohmann::json scoped_json = nlohmann::json::object();
    for (const auto& [webid, sketch] : scoped) scoped_json[webid] = to_json(sketch);
    servers[server_id] = {{"scoped", std::move(scoped_json)},
                          {"shared", to_json(sketches.server_shared.at(server_id))}};
  }
  return nlohmann::json{{"as_of", sketches.as_of},
                        {"params", std::move(params)},
                        {"system", {{"scoped", std::move(system_scoped)},
                                    {"shared", to_json(sketches.system_shared)}}},
                        {"server", std::move(servers)}};
}

SketchSet sketches_from_json(const nlohmann::json& doc) {
  SketchSet out;
  out.as_of = doc.at("as_of").get<std::uint64_t>();
  const auto& params = doc.at("params");
  out.params.target_fpr = params.at("target_fpr").get<double>();
  out.params.seed = params.at("seed").get<std::uint64_t>();
  if (params.contains("m")) out.params.m = params.at("m").get<std::uint32_t>();
  if (params.contains("k")) out.params.k = params.at("k").get<std::uint32_t>();
  const auto& system = doc.at("system");
  for (auto it = system.at("scoped").begin(); it != system.at("scoped").end(); ++it) {
    out.system_scoped.emplace(it.key(), bloom_from_json(it.value(), it.key(), "system"));
  }
  out.system_shared = bloom_from_json(system.at("shared"), "", "system");
  const auto& servers = doc.at("server");
  for (auto sit = servers.begin(); sit != servers.end(); ++sit) {
    auto& scoped = out.server_scoped[sit.key()];
    for (auto it = sit.value().at("scoped").begin(); it != sit.value().at("scoped").end(); ++it) {
      scoped.emplace(it.key(), bloom_from_json(it.value(), it.key(), "server"));
    }
    out.server_shared.emplace(sit.key(), bloom_from_json(sit.value().at("shared"), "", "server"));
  }
  return out;
}

}  // namespace podsearch
