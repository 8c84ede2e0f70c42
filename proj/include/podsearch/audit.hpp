#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "podsearch/generator.hpp"
#include "podsearch/rng.hpp"
#include "podsearch/search.hpp"

namespace podsearch {

// Brute-force reference search: a full scan over access control state and
// resource text. Consults no index or metadata, so it can stand against the
// engine as an independent oracle.
std::set<Url> oracle_search(const Corpus& corpus, const WebId& webid,
                            const std::vector<Term>& terms);

// Same scan restricted to pods the engine is allowed to discover (registered,
// indexing enabled, and — when given — hosted on a routable server).
std::set<Url> oracle_search_discoverable(const Corpus& corpus, const WebId& webid,
                                         const std::vector<Term>& terms,
                                         const std::set<ServerId>* routable_servers = nullptr);

// One authorized query execution against one server, as observable by the
// querying WebId: the pod urls that produced results.
struct ResultRecord {
  WebId webid;
  std::vector<Term> terms;
  ServerId server_id;
  std::set<Url> result_pod_urls;
};

struct ReconEntry {
  std::set<std::string> sources;
  std::uint32_t count = 0;

  friend bool operator==(const ReconEntry&, const ReconEntry&) = default;
};

struct ReconstructedServerMetadata {
  ServerId server_id;
  std::map<WebId, std::map<std::string, ReconEntry>> per_webid;
};

struct ReconstructedSystemMetadata {
  std::map<WebId, std::map<std::string, ReconEntry>> per_webid;
};

// Canonical key for a query's term set.
std::string query_key(const std::vector<Term>& terms);

// Folds authorized result records into server-tier metadata: per (webid,
// query), the union of result pods and its cardinality. Entries never seen
// stay implicitly (empty, 0). Throws mixed-server-log on records from more
// than one server.
ReconstructedServerMetadata reconstruct_server_metadata(const std::vector<ResultRecord>& log);

struct ReconSnapshotInput {
  ServerId server_id;
  std::uint64_t snapshot_time = 0;
  ReconstructedServerMetadata metadata;
};

// Merges server-tier reconstructions: a server joins a (webid, query) cell
// when its snapshot showed a positive count. Order-independent.
ReconstructedSystemMetadata reconstruct_system_metadata(
    const std::vector<ReconSnapshotInput>& snapshots);

struct CheckResult {
  std::string name;
  bool pass = true;
  std::vector<std::string> counterexamples;  // capped; pass iff empty
};

// Every engine result must fall inside the caller's visibility scope and
// match the oracle on discoverable pods. Randomized workload.
CheckResult check_scope_isolation(const Corpus& corpus, const Snapshot& snapshot,
                                  const OverlayNetwork& network, Rng& rng, int query_count);

// Every scoped index must equal a brute-force index over exactly the
// resources that list the WebId in their ACL; the public index over exactly
// the public resources.
CheckResult check_index_isolation(const Corpus& corpus, const Snapshot& snapshot);

// Replays an authorized query workload covering every (webid, term) cell in
// the maintained metadata, reconstructs both tiers from the results alone and
// demands field-for-field agreement on sources and source counts; term
// frequencies and collection sizes are recomputed from authorized postings.
CheckResult check_conservativity(const Corpus& corpus, const Snapshot& snapshot);

// Rebuilds each WebId's metadata view from that WebId's own results only and
// compares against the maintained partition (plus the shared public tier);
// also asserts the query path never reads another WebId's partition.
CheckResult check_separability(const Corpus& corpus, const Snapshot& snapshot);

struct FprRow {
  std::uint64_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t k = 0;
  std::uint64_t trials = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t false_negatives = 0;
  double measured_fpr = 0.0;
  double theoretical_fpr = 0.0;
};

std::vector<std::pair<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>>> default_fpr_grid();

// Empirical false-positive rates per (n, m, k); every inserted key is probed
// back (false negatives counted, must be zero).
std::vector<FprRow> measure_bloom_fpr(
    const std::vector<std::pair<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>>>& grid,
    std::uint64_t trials, std::uint64_t seed);

// Zero false negatives everywhere; measured rate inside [0.5%, 2%] for the
// 1%-sized row at n=1000; non-decreasing in n for fixed geometry.
CheckResult evaluate_fpr_rows(const std::vector<FprRow>& rows);

struct GoalRow {
  std::string id;
  std::string name;
  std::vector<std::string> covered_by;  // guarantees that must hold
  std::vector<std::string> partial;     // guarantees that only reduce the risk
  bool residual = false;
  std::string status;  // pass | pass-with-residual | degraded
  std::string note;
};

// Adversary-goal coverage derived from the guarantee verdicts. Requires all
// of PG1..PG4; throws incomplete-audit otherwise. Goals with residual risk
// never report full mitigation.
std::vector<GoalRow> emit_goal_matrix(const std::map<std::string, bool>& verdicts);

enum class FaultClass {
  cross_scope_posting,      // a posting leaks into another WebId's index
  inflated_metadata_entry,  // metadata names a source no authorized query produced
  shared_partition_entry,   // one WebId's entry copied into another's partition
};

const char* to_string(FaultClass fault);

// Corrupts the snapshot in place; returns a description of the planted fault
// or nullopt when the corpus offers no viable target. Used to demonstrate the
// checkers actually detect violations.
std::optional<std::string> inject_fault(Snapshot& snapshot, const Corpus& corpus, FaultClass fault,
                                        Rng& rng);

struct AuditOptions {
  std::uint64_t seed = 1;
  int scope_queries = 60;
  std::uint64_t bloom_trials = 100000;
  std::size_t overlay_nodes = 3;
  BloomParams bloom;
  bool inject_faults = false;
  int injection_runs = 6;  // per fault class
};

struct FaultStats {
  int attempts = 0;
  int injected = 0;
  int detected = 0;
};

struct AuditReport {
  CheckResult pg1;
  CheckResult pg2;
  CheckResult pg3;
  std::vector<FprRow> pg3_rows;
  CheckResult pg4_conservativity;
  CheckResult pg4_separability;
  std::vector<GoalRow> goal_matrix;
  std::map<std::string, FaultStats> fault_injection;  // empty unless enabled
  std::uint64_t seed = 0;
  std::uint64_t as_of = 0;
};

// Runs the whole pipeline on a working copy (overlay registration, refresh,
// all checks, sketch measurements) and assembles the report.
AuditReport run_audit(const Corpus& corpus, const AuditOptions& options);

// Non-residual verdicts only: the exit gate for the audit command.
bool audit_passed(const AuditReport& report);

nlohmann::json to_json(const AuditReport& report);
std::string to_text(const AuditReport& report);

}  // namespace podsearch
