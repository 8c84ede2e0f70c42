#include "podsearch/audit.hpp"

#include <algorithm>
#include <sstream>

namespace podsearch {

namespace {

constexpr std::size_t kMaxCounterexamples = 12;

void add_counterexample(CheckResult& result, std::string detail) {
  result.pass = false;
  if (result.counterexamples.size() < kMaxCounterexamples) {
    result.counterexamples.push_back(std::move(detail));
  }
}

std::string join(const std::set<std::string>& items) {
  std::string out = "{";
  bool first = true;
  for (const std::string& item : items) {
    if (!first) out += ", ";
    out += item;
    first = false;
  }
  return out + "}";
}

bool terms_all_present(const std::set<Term>& tokens, const std::vector<Term>& terms) {
  for (const Term& term : terms) {
    if (tokens.count(term) == 0) return false;
  }
  return true;
}

}  // namespace

std::set<Url> oracle_search(const Corpus& corpus, const WebId& webid,
                            const std::vector<Term>& terms) {
  std::set<Url> out;
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      for (const auto& [rurl, resource] : pod.resources) {
        if (!resource.acl.allows(webid)) continue;
        const auto tokens = tokenize(resource.text);
        if (terms_all_present({tokens.begin(), tokens.end()}, terms)) out.insert(rurl);
      }
    }
  }
  return out;
}

std::set<Url> oracle_search_discoverable(const Corpus& corpus, const WebId& webid,
                                         const std::vector<Term>& terms,
                                         const std::set<ServerId>* routable_servers) {
  std::set<Url> out;
  for (const auto& [sid, server] : corpus.servers) {
    if (routable_servers != nullptr && routable_servers->count(sid) == 0) continue;
    for (const auto& [purl, pod] : server.pods) {
      if (!pod.registered_for_search || !pod.indexing_enabled) continue;
      for (const auto& [rurl, resource] : pod.resources) {
        if (!resource.acl.allows(webid)) continue;
        const auto tokens = tokenize(resource.text);
        if (terms_all_present({tokens.begin(), tokens.end()}, terms)) out.insert(rurl);
      }
    }
  }
  return out;
}

std::string query_key(const std::vector<Term>& terms) {
  std::vector<Term> sorted = terms;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::string key;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0) key.push_back(' ');
    key += sorted[i];
  }
  return key;
}

ReconstructedServerMetadata reconstruct_server_metadata(const std::vector<ResultRecord>& log) {
  ReconstructedServerMetadata out;
  bool first = true;
  for (const ResultRecord& record : log) {
    if (first) {
      out.server_id = record.server_id;
      first = false;
    } else if (record.server_id != out.server_id) {
      fail(Errc::mixed_server_log,
           "records for " + out.server_id + " mixed with " + record.server_id);
    }
    ReconEntry& entry = out.per_webid[record.webid][query_key(record.terms)];
    entry.sources.insert(record.result_pod_urls.begin(), record.result_pod_urls.end());
    entry.count = static_cast<std::uint32_t>(entry.sources.size());
  }
  return out;
}

ReconstructedSystemMetadata reconstruct_system_metadata(
    const std::vector<ReconSnapshotInput>& snapshots) {
  ReconstructedSystemMetadata out;
  for (const ReconSnapshotInput& snap : snapshots) {
    for (const auto& [webid, queries] : snap.metadata.per_webid) {
      for (const auto& [key, entry] : queries) {
        if (entry.count == 0) continue;
        ReconEntry& cell = out.per_webid[webid][key];
        cell.sources.insert(snap.server_id);
        cell.count = static_cast<std::uint32_t>(cell.sources.size());
      }
    }
  }
  return out;
}

namespace {

ReconEntry recon_cell(const std::map<WebId, std::map<std::string, ReconEntry>>& per_webid,
                      const WebId& webid, const std::string& key) {
  if (auto uit = per_webid.find(webid); uit != per_webid.end()) {
    if (auto it = uit->second.find(key); it != uit->second.end()) return it->second;
  }
  return {};
}

// (webid, term) cells an authorized workload must cover: everything visible
// in the maintained metadata, which is exactly the set of single-term queries
// each WebId is entitled to ask.
std::map<WebId, std::set<Term>> metadata_domain(const Corpus& corpus, const Snapshot& snapshot) {
  std::map<WebId, std::set<Term>> domain;
  for (const WebId& webid : corpus.webids) {
    std::set<Term> terms;
    for (const auto& [sid, md] : snapshot.servers) {
      const auto observable = effective_terms(md.per_webid, md.public_terms, webid);
      terms.insert(observable.begin(), observable.end());
    }
    const auto observable =
        effective_terms(snapshot.system.per_webid, snapshot.system.public_terms, webid);
    terms.insert(observable.begin(), observable.end());
    if (!terms.empty()) domain[webid] = std::move(terms);
  }
  // Partitions can name WebIds beyond the corpus registry after a fault was
  // planted; keep them in the domain so the checkers see them.
  for (const auto& [sid, md] : snapshot.servers) {
    for (const auto& [webid, terms] : md.per_webid) {
      for (const auto& [term, entry] : terms) domain[webid].insert(term);
    }
  }
  for (const auto& [webid, terms] : snapshot.system.per_webid) {
    for (const auto& [term, entry] : terms) domain[webid].insert(term);
  }
  return domain;
}

std::set<Url> authorized_server_result(const Corpus& corpus, const Snapshot& snapshot,
                                       const WebId& webid, const Term& term,
                                       const ServerId& server_id, QueryTrace* trace = nullptr) {
  std::set<Url> pods;
  for (const Hit& hit :
       search_server(corpus, snapshot, webid, {term}, MetadataMode::exact, server_id, trace)) {
    pods.insert(hit.pod_url);
  }
  return pods;
}

// Term frequency and matching-resource totals a WebId can recompute from the
// postings behind its own authorized results on one server.
std::pair<std::uint64_t, std::uint64_t> authorized_stats(const Corpus& corpus,
                                                         const Snapshot& snapshot,
                                                         const WebId& webid, const Term& term,
                                                         const ServerId& server_id) {
  std::uint64_t tf = 0;
  std::uint64_t matching = 0;
  for (const Url& pod : authorized_server_result(corpus, snapshot, webid, term, server_id)) {
    auto it = snapshot.indexes.find(pod);
    if (it == snapshot.indexes.end()) continue;
    for (const Posting& posting : lookup_postings(it->second, webid, term)) {
      tf += posting.tf;
      ++matching;
    }
  }
  return {tf, matching};
}

}  // namespace

CheckResult check_scope_isolation(const Corpus& corpus, const Snapshot& snapshot,
                                  const OverlayNetwork& network, Rng& rng, int query_count) {
  CheckResult result;
  result.name = "pg1-scope-isolation";
  std::vector<WebId> identities(corpus.webids.begin(), corpus.webids.end());
  identities.push_back("visitor-without-grants");

  std::set<Term> pool_set;
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      for (const auto& [rurl, resource] : pod.resources) {
        for (const Term& term : tokenize(resource.text)) pool_set.insert(term);
      }
    }
  }
  std::vector<Term> pool(pool_set.begin(), pool_set.end());
  pool.push_back("absentterm");
  pool.push_back("nosuchword");

  std::set<ServerId> routable;
  for (const auto& [sid, location] : registered_servers(network)) routable.insert(sid);

  for (int i = 0; i < query_count; ++i) {
    const WebId webid = rng.pick(identities);
    std::set<Term> picked;
    const std::size_t wanted = std::min<std::size_t>(1 + rng.below(3), pool.size());
    while (picked.size() < wanted) picked.insert(rng.pick(pool));
    const std::vector<Term> terms(picked.begin(), picked.end());

    Query query;
    query.webid = webid;
    query.terms = terms;
    query.strategy = (i % 2 == 0) ? Strategy::direct : Strategy::propagate;
    query.mode = ((i / 2) % 2 == 0) ? MetadataMode::exact : MetadataMode::bloom;

    std::set<Url> urls;
    for (const RankedResult& r : search(corpus, snapshot, network, query)) {
      urls.insert(r.resource_url);
    }
    const std::set<Url> scope = global_visibility(corpus, webid).resources;
    for (const Url& url : urls) {
      if (scope.count(url) == 0) {
        add_counterexample(result, "webid " + webid + " query '" + query_key(terms) +
                                       "' returned " + url + " outside its visibility scope");
      }
    }
    const std::set<Url> expected = oracle_search_discoverable(corpus, webid, terms, &routable);
    if (urls != expected) {
      add_counterexample(result, "webid " + webid + " query '" + query_key(terms) +
                                     "': engine " + join(urls) + " != oracle " + join(expected));
    }
  }
  return result;
}

CheckResult check_index_isolation(const Corpus& corpus, const Snapshot& snapshot) {
  CheckResult result;
  result.name = "pg2-index-isolation";
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      if (!pod.indexing_enabled) {
        if (snapshot.indexes.count(purl) > 0) {
          add_counterexample(result, "pod " + purl + " has an index despite disabled indexing");
        }
        continue;
      }
      auto it = snapshot.indexes.find(purl);
      if (it == snapshot.indexes.end()) {
        add_counterexample(result, "pod " + purl + " has no index in the snapshot");
        continue;
      }
      // Reference build, straight from ACL state and text.
      std::map<WebId, InvertedIndex> scoped;
      InvertedIndex public_index;
      for (const auto& [rurl, resource] : pod.resources) {
        std::map<Term, std::uint32_t> counts;
        for (const Term& term : tokenize(resource.text)) ++counts[term];
        if (counts.empty()) continue;
        if (resource.acl.is_public) {
          for (const auto& [term, tf] : counts) public_index.entries[term].push_back({rurl, tf});
        } else {
          for (const WebId& reader : resource.acl.readers) {
            for (const auto& [term, tf] : counts) {
              scoped[reader].entries[term].push_back({rurl, tf});
            }
          }
        }
      }
      if (it->second.public_index != public_index) {
        add_counterexample(result, "pod " + purl + ": public index differs from reference build");
      }
      if (it->second.scoped != scoped) {
        std::set<WebId> keys;
        for (const auto& [webid, index] : it->second.scoped) keys.insert(webid);
        for (const auto& [webid, index] : scoped) keys.insert(webid);
        for (const WebId& webid : keys) {
          const auto built = it->second.scoped.find(webid);
          const auto reference = scoped.find(webid);
          const bool same = built != it->second.scoped.end() && reference != scoped.end() &&
                            built->second == reference->second;
          if (!same) {
            add_counterexample(result, "pod " + purl + ": scoped index for " + webid +
                                           " differs from reference build");
          }
        }
      }
    }
  }
  return result;
}

CheckResult check_conservativity(const Corpus& corpus, const Snapshot& snapshot) {
  CheckResult result;
  result.name = "pg4-conservativity";
  const auto domain = metadata_domain(corpus, snapshot);

  std::vector<ReconSnapshotInput> system_inputs;
  for (const auto& [sid, md] : snapshot.servers) {
    std::vector<ResultRecord> log;
    for (const auto& [webid, terms] : domain) {
      for (const Term& term : terms) {
        log.push_back(
            {webid, {term}, sid, authorized_server_result(corpus, snapshot, webid, term, sid)});
      }
    }
    ReconstructedServerMetadata recon = reconstruct_server_metadata(log);
    recon.server_id = sid;  // an empty log carries no server id

    for (const auto& [webid, terms] : domain) {
      for (const Term& term : terms) {
        const MetadataEntry maintained = effective_entry(md, webid, term);
        const ReconEntry rec = recon_cell(recon.per_webid, webid, term);
        if (rec.sources != maintained.sources || rec.count != maintained.stats.source_count) {
          add_counterexample(result, "server " + sid + " webid " + webid + " term " + term +
                                         ": maintained " + join(maintained.sources) +
                                         " not reproducible from authorized results " +
                                         join(rec.sources));
          continue;
        }
        const auto [tf, matching] = authorized_stats(corpus, snapshot, webid, term, sid);
        if (tf != maintained.stats.tf_total || matching != maintained.stats.collection_size) {
          add_counterexample(result, "server " + sid + " webid " + webid + " term " + term +
                                         ": stats (" + std::to_string(maintained.stats.tf_total) +
                                         ", " + std::to_string(maintained.stats.collection_size) +
                                         ") not recomputable from authorized postings");
        }
      }
    }
    system_inputs.push_back({sid, md.as_of, std::move(recon)});
  }

  const ReconstructedSystemMetadata system_recon = reconstruct_system_metadata(system_inputs);
  for (const auto& [webid, terms] : domain) {
    for (const Term& term : terms) {
      const MetadataEntry maintained = effective_entry(snapshot.system, webid, term);
      const ReconEntry rec = recon_cell(system_recon.per_webid, webid, term);
      if (rec.sources != maintained.sources || rec.count != maintained.stats.source_count) {
        add_counterexample(result, "system tier webid " + webid + " term " + term +
                                       ": maintained " + join(maintained.sources) +
                                       " not reproducible from authorized results " +
                                       join(rec.sources));
        continue;
      }
      std::uint64_t tf = 0;
      std::uint64_t matching = 0;
      for (const auto& [sid, md] : snapshot.servers) {
        const auto [server_tf, server_matching] =
            authorized_stats(corpus, snapshot, webid, term, sid);
        tf += server_tf;
        matching += server_matching;
      }
      if (tf != maintained.stats.tf_total || matching != maintained.stats.collection_size) {
        add_counterexample(result, "system tier webid " + webid + " term " + term +
                                       ": stats not recomputable from authorized postings");
      }
    }
  }
  return result;
}

CheckResult check_separability(const Corpus& corpus, const Snapshot& snapshot) {
  CheckResult result;
  result.name = "pg4-separability";
  const auto domain = metadata_domain(corpus, snapshot);

  for (const auto& [webid, terms] : domain) {
    // Rebuild this WebId's view from its own results alone.
    std::vector<ReconSnapshotInput> system_inputs;
    for (const auto& [sid, md] : snapshot.servers) {
      std::vector<ResultRecord> log;
      for (const Term& term : terms) {
        log.push_back(
            {webid, {term}, sid, authorized_server_result(corpus, snapshot, webid, term, sid)});
      }
      ReconstructedServerMetadata recon = reconstruct_server_metadata(log);
      recon.server_id = sid;
      for (const Term& term : terms) {
        const MetadataEntry maintained = effective_entry(md, webid, term);
        const ReconEntry rec = recon_cell(recon.per_webid, webid, term);
        if (rec.sources != maintained.sources || rec.count != maintained.stats.source_count) {
          add_counterexample(result, "server " + sid + " partition for " + webid + " term " +
                                         term + " is not derivable from that webid's results: " +
                                         join(maintained.sources) + " vs " + join(rec.sources));
        }
      }
      system_inputs.push_back({sid, md.as_of, std::move(recon)});
    }
    const ReconstructedSystemMetadata system_recon = reconstruct_system_metadata(system_inputs);
    for (const Term& term : terms) {
      const MetadataEntry maintained = effective_entry(snapshot.system, webid, term);
      const ReconEntry rec = recon_cell(system_recon.per_webid, webid, term);
      if (rec.sources != maintained.sources || rec.count != maintained.stats.source_count) {
        add_counterexample(result, "system partition for " + webid + " term " + term +
                                       " is not derivable from that webid's results: " +
                                       join(maintained.sources) + " vs " + join(rec.sources));
      }
    }
    // Read-path discipline: serving this WebId must not touch other partitions.
    QueryTrace trace;
    for (const auto& [sid, md] : snapshot.servers) {
      for (const Term& term : terms) {
        authorized_server_result(corpus, snapshot, webid, term, sid, &trace);
      }
    }
    for (const WebId& touched : trace.partitions_read) {
      if (touched != webid) {
        add_counterexample(result, "query path for " + webid + " read partition of " + touched);
      }
    }
  }
  return result;
}

std::vector<std::pair<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>>> default_fpr_grid() {
  const auto geometry = bloom_geometry(1000, 0.01);
  return {{0, geometry}, {250, geometry}, {1000, geometry}, {4000, geometry}, {16000, geometry}};
}

std::vector<FprRow> measure_bloom_fpr(
    const std::vector<std::pair<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>>>& grid,
    std::uint64_t trials, std::uint64_t seed) {
  std::vector<FprRow> rows;
  for (const auto& [n, geometry] : grid) {
    BloomParams params;
    params.m = geometry.first;
    params.k = geometry.second;
    params.seed = seed;
    BloomSketch sketch = bloom_make(params, n, "", "system");
    for (std::uint64_t i = 0; i < n; ++i) bloom_insert(sketch, "member-" + std::to_string(i));

    FprRow row;
    row.n = n;
    row.m = geometry.first;
    row.k = geometry.second;
    row.trials = trials;
    row.theoretical_fpr = bloom_theoretical_fpr(n, geometry.first, geometry.second);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!bloom_contains(sketch, "member-" + std::to_string(i))) ++row.false_negatives;
    }
    for (std::uint64_t probe = 0; probe < trials; ++probe) {
      if (bloom_contains(sketch, "probe-" + std::to_string(probe))) ++row.false_positives;
    }
    row.measured_fpr =
        trials == 0 ? 0.0 : static_cast<double>(row.false_positives) / static_cast<double>(trials);
    rows.push_back(row);
  }
  return rows;
}

CheckResult evaluate_fpr_rows(const std::vector<FprRow>& rows) {
  CheckResult result;
  result.name = "pg3-sketch-measurements";
  const auto reference = bloom_geometry(1000, 0.01);
  for (const FprRow& row : rows) {
    if (row.false_negatives > 0) {
      add_counterexample(result, "n=" + std::to_string(row.n) + ": " +
                                     std::to_string(row.false_negatives) +
                                     " inserted keys read as absent");
    }
    if (row.n == 1000 && row.m == reference.first && row.k == reference.second &&
        (row.measured_fpr < 0.005 || row.measured_fpr > 0.02)) {
      add_counterexample(result, "1% target at n=1000 measured " +
                                     std::to_string(row.measured_fpr) + ", outside [0.005, 0.02]");
    }
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<const FprRow*>> groups;
  for (const FprRow& row : rows) groups[{row.m, row.k}].push_back(&row);
  for (auto& [geometry, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const FprRow* a, const FprRow* b) { return a->n < b->n; });
    for (std::size_t i = 1; i < group.size(); ++i) {
      if (group[i]->measured_fpr < group[i - 1]->measured_fpr) {
        add_counterexample(result, "measured rate decreased from n=" +
                                       std::to_string(group[i - 1]->n) + " to n=" +
                                       std::to_string(group[i]->n) + " at fixed geometry");
      }
    }
  }
  return result;
}

std::vector<GoalRow> emit_goal_matrix(const std::map<std::string, bool>& verdicts) {
  for (const char* key : {"PG1", "PG2", "PG3", "PG4"}) {
    if (verdicts.count(key) == 0) {
      fail(Errc::incomplete_audit, std::string("missing verdict for ") + key);
    }
  }
  struct GoalSpec {
    const char* id;
    const char* name;
    std::vector<std::string> covered_by;
    std::vector<std::string> partial;
    const char* note;
  };
  const std::vector<GoalSpec> goals = {
      {"G1", "membership inference", {"PG1", "PG3"}, {},
       "results stay inside the caller's scope; sketch lookups cannot prove absence"},
      {"G2", "access pattern inference", {"PG1", "PG4"}, {},
       "only result-bearing sources inside the scope are revealed; metadata derives from visible results"},
      {"G3", "keyword frequency estimation", {"PG2", "PG3"}, {},
       "per-identity index scoping hides global term counts; sketches add noise"},
      {"G4", "index reconstruction", {"PG2", "PG3", "PG4"}, {},
       "index files are partitioned per identity; metadata reflects authorized results only"},
      {"G5", "correlation-based inference", {"PG1", "PG2"}, {"PG3", "PG4"},
       "direct access is bounded, but co-occurrence inside an authorized scope stays observable"},
      {"I1", "direct identification", {"PG1", "PG2"}, {},
       "results carry only references the caller may read"},
      {"I2", "re-identification via quasi-identifiers", {"PG1", "PG2"}, {"PG3"},
       "partitioned indexes and minimal metadata reduce linkage; no anonymization is applied"},
  };
  std::vector<GoalRow> rows;
  for (const GoalSpec& goal : goals) {
    GoalRow row;
    row.id = goal.id;
    row.name = goal.name;
    row.covered_by = goal.covered_by;
    row.partial = goal.partial;
    row.residual = !goal.partial.empty();
    bool covered = true;
    for (const std::string& guarantee : goal.covered_by) {
      covered = covered && verdicts.at(guarantee);
    }
    row.status = !covered ? "degraded" : (row.residual ? "pass-with-residual" : "pass");
    row.note = goal.note;
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* to_string(FaultClass fault) {
  switch (fault) {
    case FaultClass::cross_scope_posting: return "cross-scope-posting";
    case FaultClass::inflated_metadata_entry: return "inflated-metadata-entry";
    case FaultClass::shared_partition_entry: return "shared-partition-entry";
  }
  return "unknown-fault";
}

namespace {

std::optional<std::string> inject_cross_scope_posting(Snapshot& snapshot, const Corpus& corpus,
                                                      Rng& rng) {
  struct Target {
    Url pod;
    Url resource;
    WebId webid;
    Term term;
  };
  std::vector<Target> targets;
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      if (snapshot.indexes.count(purl) == 0) continue;
      for (const auto& [rurl, resource] : pod.resources) {
        if (resource.acl.is_public) continue;
        const auto tokens = tokenize(resource.text);
        const Term term = tokens.empty() ? Term("leak") : tokens.front();
        for (const WebId& webid : corpus.webids) {
          if (!resource.acl.allows(webid)) targets.push_back({purl, rurl, webid, term});
        }
      }
    }
  }
  if (targets.empty()) return std::nullopt;
  const Target& target = targets[rng.below(targets.size())];
  auto& postings = snapshot.indexes.at(target.pod).scoped[target.webid].entries[target.term];
  auto pos = std::lower_bound(
      postings.begin(), postings.end(), target.resource,
      [](const Posting& p, const Url& url) { return p.resource_url < url; });
  postings.insert(pos, {target.resource, 1});
  return "cross-scope posting: " + target.resource + " planted into the index of " + target.webid +
         " under term '" + target.term + "' (pod " + target.pod + ")";
}

std::optional<std::string> inject_inflated_metadata(Snapshot& snapshot, const Corpus& corpus,
                                                    Rng& rng) {
  struct Target {
    ServerId server;  // empty => system tier
    WebId webid;
    Term term;
    std::string ghost;
    bool creates_entry;
  };
  std::vector<Target> targets;
  for (const auto& [sid, md] : snapshot.servers) {
    const Server* server = find_server(corpus, sid);
    for (const auto& [webid, terms] : md.per_webid) {
      for (const auto& [term, entry] : terms) {
        const MetadataEntry effective = effective_entry(md, webid, term);
        std::string ghost = sid + "/ghost-pod/";
        if (server != nullptr) {
          for (const auto& [purl, pod] : server->pods) {
            if (effective.sources.count(purl) == 0) {
              ghost = purl;
              break;
            }
          }
        }
        targets.push_back({sid, webid, term, ghost, false});
      }
    }
  }
  for (const auto& [webid, terms] : snapshot.system.per_webid) {
    for (const auto& [term, entry] : terms) {
      const MetadataEntry effective = effective_entry(snapshot.system, webid, term);
      std::string ghost = "ghost-server";
      for (const auto& [sid, md] : snapshot.servers) {
        if (effective.sources.count(sid) == 0) {
          ghost = sid;
          break;
        }
      }
      targets.push_back({"", webid, term, ghost, false});
    }
  }
  if (targets.empty()) {
    // No private entries anywhere: fabricate one.
    if (corpus.webids.empty()) return std::nullopt;
    const WebId webid = *corpus.webids.begin();
    if (!snapshot.servers.empty()) {
      targets.push_back({snapshot.servers.begin()->first, webid, "phantomterm",
                         snapshot.servers.begin()->first + "/ghost-pod/", true});
    } else {
      return std::nullopt;
    }
  }
  const Target& target = targets[rng.below(targets.size())];
  if (target.server.empty()) {
    MetadataEntry& entry = snapshot.system.per_webid[target.webid][target.term];
    entry.sources.insert(target.ghost);
    entry.stats.source_count = static_cast<std::uint32_t>(entry.sources.size());
    return "inflated system metadata: (" + target.webid + ", " + target.term + ") gained server " +
           target.ghost;
  }
  MetadataEntry& entry = snapshot.servers.at(target.server).per_webid[target.webid][target.term];
  entry.sources.insert(target.ghost);
  entry.stats.source_count = static_cast<std::uint32_t>(entry.sources.size());
  return "inflated server metadata on " + target.server + ": (" + target.webid + ", " +
         target.term + ") gained pod " + target.ghost;
}

std::optional<std::string> inject_shared_partition(Snapshot& snapshot, const Corpus& corpus,
                                                   Rng& rng) {
  struct Target {
    ServerId server;  // empty => system tier
    WebId donor;
    WebId victim;
    Term term;
  };
  std::vector<Target> targets;
  auto collect = [&](const std::map<WebId, TermEntries>& per_webid, const TermEntries& pub,
                     const ServerId& server) {
    for (const auto& [donor, terms] : per_webid) {
      for (const auto& [term, entry] : terms) {
        if (entry.sources.empty()) continue;
        for (const WebId& victim : corpus.webids) {
          if (victim == donor) continue;
          const MetadataEntry seen = effective_entry(per_webid, pub, victim, term);
          bool adds_something = false;
          for (const std::string& source : entry.sources) {
            if (seen.sources.count(source) == 0) adds_something = true;
          }
          if (adds_something) targets.push_back({server, donor, victim, term});
        }
      }
    }
  };
  for (const auto& [sid, md] : snapshot.servers) collect(md.per_webid, md.public_terms, sid);
  collect(snapshot.system.per_webid, snapshot.system.public_terms, "");
  if (targets.empty()) return std::nullopt;

  const Target& target = targets[rng.below(targets.size())];
  auto& partitions =
      target.server.empty() ? snapshot.system.per_webid : snapshot.servers.at(target.server).per_webid;
  const MetadataEntry& donor_entry = partitions.at(target.donor).at(target.term);
  MetadataEntry& victim_entry = partitions[target.victim][target.term];
  victim_entry.sources.insert(donor_entry.sources.begin(), donor_entry.sources.end());
  victim_entry.stats.tf_total += donor_entry.stats.tf_total;
  victim_entry.stats.collection_size += donor_entry.stats.collection_size;
  victim_entry.stats.source_count = static_cast<std::uint32_t>(victim_entry.sources.size());
  const std::string tier = target.server.empty() ? "system tier" : "server " + target.server;
  return "shared partition entry at " + tier + ": (" + target.donor + ", " + target.term +
         ") copied into the partition of " + target.victim;
}

}  // namespace

std::optional<std::string> inject_fault(Snapshot& snapshot, const Corpus& corpus, FaultClass fault,
                                        Rng& rng) {
  switch (fault) {
    case FaultClass::cross_scope_posting: return inject_cross_scope_posting(snapshot, corpus, rng);
    case FaultClass::inflated_metadata_entry: return inject_inflated_metadata(snapshot, corpus, rng);
    case FaultClass::shared_partition_entry: return inject_shared_partition(snapshot, corpus, rng);
  }
  return std::nullopt;
}

AuditReport run_audit(const Corpus& corpus, const AuditOptions& options) {
  Corpus working = corpus;
  OverlayNetwork network = make_overlay(options.overlay_nodes);
  for (const auto& [sid, server] : working.servers) {
    register_server(network, sid, metadata_location(sid));
  }
  const Snapshot snapshot = refresh(working, options.bloom);

  AuditReport report;
  report.seed = options.seed;
  report.as_of = snapshot.as_of;

  Rng rng(options.seed);
  report.pg1 = check_scope_isolation(working, snapshot, network, rng, options.scope_queries);
  report.pg2 = check_index_isolation(working, snapshot);
  report.pg4_conservativity = check_conservativity(working, snapshot);
  report.pg4_separability = check_separability(working, snapshot);
  report.pg3_rows = measure_bloom_fpr(default_fpr_grid(), options.bloom_trials, options.seed);
  report.pg3 = evaluate_fpr_rows(report.pg3_rows);

  report.goal_matrix = emit_goal_matrix(
      {{"PG1", report.pg1.pass},
       {"PG2", report.pg2.pass},
       {"PG3", report.pg3.pass},
       {"PG4", report.pg4_conservativity.pass && report.pg4_separability.pass}});

  if (options.inject_faults) {
    for (const FaultClass fault : {FaultClass::cross_scope_posting,
                                   FaultClass::inflated_metadata_entry,
                                   FaultClass::shared_partition_entry}) {
      FaultStats stats;
      for (int run = 0; run < options.injection_runs; ++run) {
        ++stats.attempts;
        Snapshot corrupted = snapshot;
        const auto planted = inject_fault(corrupted, working, fault, rng);
        if (!planted) continue;
        ++stats.injected;
        const bool detected = !check_index_isolation(working, corrupted).pass ||
                              !check_conservativity(working, corrupted).pass ||
                              !check_separability(working, corrupted).pass;
        if (detected) ++stats.detected;
      }
      report.fault_injection[to_string(fault)] = stats;
    }
  }
  return report;
}

bool audit_passed(const AuditReport& report) {
  bool pass = report.pg1.pass && report.pg2.pass && report.pg3.pass &&
              report.pg4_conservativity.pass && report.pg4_separability.pass;
  for (const auto& [fault, stats] : report.fault_injection) {
    pass = pass && stats.detected == stats.injected;
  }
  return pass;
}

namespace {

nlohmann::json check_to_json(const CheckResult& check) {
  return nlohmann::json{{"pass", check.pass}, {"counterexamples", check.counterexamples}};
}

}  // namespace

nlohmann::json to_json(const AuditReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const FprRow& row : report.pg3_rows) {
    rows.push_back({{"n", row.n},
                    {"m", row.m},
                    {"k", row.k},
                    {"trials", row.trials},
                    {"false_positives", row.false_positives},
                    {"false_negatives", row.false_negatives},
                    {"measured_fpr", row.measured_fpr},
                    {"theoretical_fpr", row.theoretical_fpr}});
  }
  nlohmann::json goals = nlohmann::json::array();
  for (const GoalRow& goal : report.goal_matrix) {
    goals.push_back({{"id", goal.id},
                     {"name", goal.name},
                     {"covered_by", goal.covered_by},
                     {"partial", goal.partial},
                     {"residual", goal.residual},
                     {"status", goal.status},
                     {"note", goal.note}});
  }
  nlohmann::json doc{{"seed", report.seed},
                     {"as_of", report.as_of},
                     {"pg1", check_to_json(report.pg1)},
                     {"pg2", check_to_json(report.pg2)},
                     {"pg3", check_to_json(report.pg3)},
                     {"pg3_measurements", std::move(rows)},
                     {"pg4_conservativity", check_to_json(report.pg4_conservativity)},
                     {"pg4_separability", check_to_json(report.pg4_separability)},
                     {"goal_matrix", std::move(goals)}};
  if (!report.fault_injection.empty()) {
    nlohmann::json faults = nlohmann::json::object();
    for (const auto& [fault, stats] : report.fault_injection) {
      faults[fault] = {{"attempts", stats.attempts},
                       {"injected", stats.injected},
                       {"detected", stats.detected}};
    }
    doc["fault_injection"] = std::move(faults);
  }
  return doc;
}

std::string to_text(const AuditReport& report) {
  std::ostringstream out;
  auto line = [&](const std::string& name, const CheckResult& check) {
    out << "  " << name;
    for (std::size_t i = name.size(); i < 30; ++i) out << ' ';
    out << (check.pass ? "PASS" : "FAIL") << '\n';
    for (const std::string& detail : check.counterexamples) out << "      " << detail << '\n';
  };
  out << "guarantee checks\n";
  line("PG1 scope isolation", report.pg1);
  line("PG2 index isolation", report.pg2);
  line("PG3 sketch measurements", report.pg3);
  line("PG4 conservativity", report.pg4_conservativity);
  line("PG4 separability", report.pg4_separability);

  out << "sketch false-positive rates (trials per row: "
      << (report.pg3_rows.empty() ? 0 : report.pg3_rows.front().trials) << ")\n";
  for (const FprRow& row : report.pg3_rows) {
    out << "  n=" << row.n << " m=" << row.m << " k=" << row.k << " measured=" << row.measured_fpr
        << " theoretical=" << row.theoretical_fpr << " false_negatives=" << row.false_negatives
        << '\n';
  }

  out << "adversary goal coverage\n";
  out << "  goal                                          PG1 PG2 PG3 PG4  status\n";
  for (const GoalRow& goal : report.goal_matrix) {
    std::string label = "  " + goal.id + " " + goal.name;
    for (std::size_t i = label.size(); i < 48; ++i) label += ' ';
    out << label;
    for (const char* guarantee : {"PG1", "PG2", "PG3", "PG4"}) {
      const bool covered = std::find(goal.covered_by.begin(), goal.covered_by.end(), guarantee) !=
                           goal.covered_by.end();
      const bool partial =
          std::find(goal.partial.begin(), goal.partial.end(), guarantee) != goal.partial.end();
      out << (covered ? " x  " : partial ? " ~  " : "    ");
    }
    out << ' ' << goal.status << '\n';
  }
  if (!report.fault_injection.empty()) {
    out << "fault injection\n";
    for (const auto& [fault, stats] : report.fault_injection) {
      out << "  " << fault << ": injected " << stats.injected << "/" << stats.attempts
          << ", detected " << stats.detected << "/" << stats.injected << '\n';
    }
  }
  return out.str();
}

}  // namespace podsearch
