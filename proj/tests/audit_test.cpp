#include "doctest.h"

#include <algorithm>

#include "fixtures.hpp"
#include "podsearch/audit.hpp"

using namespace podsearch;

TEST_CASE("the oracle scans exactly the visible resources") {
  const Corpus scoped = fixtures::scope_isolation_corpus();
  CHECK(oracle_search(scoped, "U_A", {"diabetes"}).empty());
  CHECK(oracle_search(scoped, "U_B", {"diabetes"}) == std::set<Url>{"srv1/pB/r3"});

  const Corpus partitioned = fixtures::index_partition_corpus();
  CHECK(oracle_search(partitioned, "U2", {"cancer"}) == std::set<Url>{"srv1/podA/r2"});
  CHECK(oracle_search(partitioned, "nobody", {"cancer"}).empty());
}

TEST_CASE("server-tier reconstruction unions authorized results") {
  const std::vector<ResultRecord> log = {
      {"w1", {"q"}, "S1", {"P_A"}},
      {"w2", {"q"}, "S1", {"P_B"}},
  };
  const ReconstructedServerMetadata recon = reconstruct_server_metadata(log);
  CHECK(recon.server_id == "S1");
  CHECK(recon.per_webid.at("w1").at("q") == ReconEntry{{"P_A"}, 1});
  CHECK(recon.per_webid.at("w2").at("q") == ReconEntry{{"P_B"}, 1});
}

TEST_CASE("empty results materialize explicit zero entries") {
  const ReconstructedServerMetadata recon =
      reconstruct_server_metadata({{"w2", {"q"}, "S2", {}}});
  CHECK(recon.per_webid.at("w2").at("q") == ReconEntry{{}, 0});
}

TEST_CASE("repeated records union rather than overwrite") {
  const std::vector<ResultRecord> log = {
      {"w", {"cancer"}, "S", {"P1"}},
      {"w", {"cancer"}, "S", {"P1", "P4", "P7"}},
  };
  const ReconstructedServerMetadata recon = reconstruct_server_metadata(log);
  CHECK(recon.per_webid.at("w").at("cancer") == ReconEntry{{"P1", "P4", "P7"}, 3});

  // Replaying the same log is a no-op on the reconstruction.
  std::vector<ResultRecord> doubled = log;
  doubled.insert(doubled.end(), log.begin(), log.end());
  CHECK(reconstruct_server_metadata(doubled).per_webid == recon.per_webid);
}

TEST_CASE("records from different servers cannot be mixed") {
  const std::vector<ResultRecord> log = {
      {"w", {"q"}, "S1", {}},
      {"w", {"q"}, "S2", {}},
  };
  try {
    reconstruct_server_metadata(log);
    FAIL("expected an error");
  } catch (const Error& error) {
    CHECK(error.code() == Errc::mixed_server_log);
  }
}

TEST_CASE("system-tier reconstruction collects result-bearing servers") {
  ReconstructedServerMetadata s1;
  s1.server_id = "S1";
  s1.per_webid["w1"]["q"] = {{"P_A"}, 1};
  s1.per_webid["w2"]["q"] = {{"P_B"}, 1};
  ReconstructedServerMetadata s2;
  s2.server_id = "S2";
  s2.per_webid["w1"]["q"] = {{"P_C"}, 1};
  s2.per_webid["w2"]["q"] = {{}, 0};

  const std::vector<ReconSnapshotInput> snapshots = {{"S1", 1, s1}, {"S2", 1, s2}};
  const ReconstructedSystemMetadata system = reconstruct_system_metadata(snapshots);
  CHECK(system.per_webid.at("w1").at("q") == ReconEntry{{"S1", "S2"}, 2});
  CHECK(system.per_webid.at("w2").at("q") == ReconEntry{{"S1"}, 1});

  const std::vector<ReconSnapshotInput> reversed = {{"S2", 1, s2}, {"S1", 1, s1}};
  CHECK(reconstruct_system_metadata(reversed).per_webid == system.per_webid);

  // All-empty snapshots leave every cell implicitly zero.
  ReconstructedServerMetadata blank;
  blank.server_id = "S9";
  blank.per_webid["w"]["q"] = {{}, 0};
  CHECK(reconstruct_system_metadata({{"S9", 1, blank}}).per_webid.empty());

  // Extending the input can only ever add servers.
  ReconstructedServerMetadata s3;
  s3.server_id = "S3";
  s3.per_webid["w1"]["q"] = {{"P_X"}, 1};
  std::vector<ReconSnapshotInput> extended = snapshots;
  extended.push_back({"S3", 2, s3});
  const ReconstructedSystemMetadata grown = reconstruct_system_metadata(extended);
  for (const auto& [webid, queries] : system.per_webid) {
    for (const auto& [key, entry] : queries) {
      const auto& grown_entry = grown.per_webid.at(webid).at(key);
      CHECK(std::includes(grown_entry.sources.begin(), grown_entry.sources.end(),
                          entry.sources.begin(), entry.sources.end()));
    }
  }
}

TEST_CASE("the two-server worked example reconstructs end to end") {
  fixtures::PreparedWorld world = fixtures::prepare(fixtures::reconstruction_corpus());

  std::vector<ReconSnapshotInput> inputs;
  for (const ServerId sid : {"S1", "S2"}) {
    std::vector<ResultRecord> log;
    for (const WebId webid : {"w1", "w2"}) {
      std::set<Url> pods;
      for (const Hit& hit : search_server(world.corpus, world.snapshot, webid, {"cancer"},
                                          MetadataMode::exact, sid)) {
        pods.insert(hit.pod_url);
      }
      log.push_back({webid, {"cancer"}, sid, pods});
    }
    inputs.push_back({sid, 0, reconstruct_server_metadata(log)});
  }
  CHECK(inputs[0].metadata.per_webid.at("w1").at("cancer") == ReconEntry{{"S1/P_A/"}, 1});
  CHECK(inputs[0].metadata.per_webid.at("w2").at("cancer") == ReconEntry{{"S1/P_B/"}, 1});
  CHECK(inputs[1].metadata.per_webid.at("w1").at("cancer") == ReconEntry{{"S2/P_C/"}, 1});
  CHECK(inputs[1].metadata.per_webid.at("w2").at("cancer") == ReconEntry{{}, 0});

  const ReconstructedSystemMetadata system = reconstruct_system_metadata(inputs);
  CHECK(system.per_webid.at("w1").at("cancer") == ReconEntry{{"S1", "S2"}, 2});
  CHECK(system.per_webid.at("w2").at("cancer") == ReconEntry{{"S1"}, 1});
}

TEST_CASE("conservativity holds on well-formed worlds") {
  fixtures::PreparedWorld tiered = fixtures::prepare(fixtures::system_tier_corpus());
  CHECK(check_conservativity(tiered.corpus, tiered.snapshot).pass);

  Corpus empty;
  BloomParams params;
  Snapshot empty_snapshot = refresh(empty, params);
  CHECK(check_conservativity(empty, empty_snapshot).pass);
}

TEST_CASE("an inflated metadata entry is caught and named") {
  fixtures::PreparedWorld world = fixtures::prepare(fixtures::system_tier_corpus());
  MetadataEntry& entry = world.snapshot.servers.at("server1").per_webid.at("UUID1").at("kwd1");
  entry.sources.insert("server1/uninvolved-pod/");
  entry.stats.source_count = static_cast<std::uint32_t>(entry.sources.size());

  const CheckResult verdict = check_conservativity(world.corpus, world.snapshot);
  CHECK_FALSE(verdict.pass);
  REQUIRE(!verdict.counterexamples.empty());
  bool named = false;
  for (const std::string& detail : verdict.counterexamples) {
    if (detail.find("UUID1") != std::string::npos && detail.find("kwd1") != std::string::npos &&
        detail.find("uninvolved-pod") != std::string::npos) {
      named = true;
    }
  }
  CHECK(named);
}

TEST_CASE("separability holds per identity and fails on shared entries") {
  fixtures::PreparedWorld world = fixtures::prepare(fixtures::reconstruction_corpus());
  CHECK(check_separability(world.corpus, world.snapshot).pass);

  // Copy w1's entry into w2's partition.
  auto& partitions = world.snapshot.servers.at("S1").per_webid;
  partitions["w2"]["cancer"].sources.insert(partitions.at("w1").at("cancer").sources.begin(),
                                            partitions.at("w1").at("cancer").sources.end());
  partitions["w2"]["cancer"].stats.source_count =
      static_cast<std::uint32_t>(partitions["w2"]["cancer"].sources.size());
  CHECK_FALSE(check_separability(world.corpus, world.snapshot).pass);
}

TEST_CASE("separability is trivial with a single identity") {
  fixtures::PreparedWorld world = fixtures::prepare(fixtures::corpus_of(
      {{"s1", {fixtures::pod("s1/p/", "solo", {fixtures::res("s1/p/r", "note", {"solo"})})}}}));
  CHECK(check_separability(world.corpus, world.snapshot).pass);
}

TEST_CASE("scope isolation scans pass on healthy worlds") {
  fixtures::PreparedWorld world = fixtures::prepare(fixtures::scope_isolation_corpus());
  Rng rng(42);
  const CheckResult verdict =
      check_scope_isolation(world.corpus, world.snapshot, world.network, rng, 40);
  CHECK(verdict.pass);

  // Public-only corpus queried by an unknown identity.
  fixtures::PreparedWorld open = fixtures::prepare(fixtures::corpus_of(
      {{"s1", {fixtures::pod("s1/p/", "o", {fixtures::res("s1/p/r", "open data", {}, true)})}}}));
  Rng rng2(43);
  CHECK(check_scope_isolation(open.corpus, open.snapshot, open.network, rng2, 20).pass);
}

TEST_CASE("index isolation verifies partitions and catches planted postings") {
  fixtures::PreparedWorld world = fixtures::prepare(fixtures::index_partition_corpus());
  CHECK(check_index_isolation(world.corpus, world.snapshot).pass);

  // After a revocation and refresh the revoked terms vanish from that scope.
  revoke_read(world.corpus, "srv1/podA/r3", "U2");
  world.snapshot = refresh(world.corpus, BloomParams{}, &world.snapshot);
  CHECK(world.snapshot.indexes.at("srv1/podA/").scoped.at("U2").entries.count("diabetes") == 0);
  CHECK(check_index_isolation(world.corpus, world.snapshot).pass);

  // Planted cross-scope posting.
  Rng rng(7);
  const auto planted =
      inject_fault(world.snapshot, world.corpus, FaultClass::cross_scope_posting, rng);
  REQUIRE(planted.has_value());
  CHECK_FALSE(check_index_isolation(world.corpus, world.snapshot).pass);
}

TEST_CASE("an empty pod passes index isolation") {
  fixtures::PreparedWorld world =
      fixtures::prepare(fixtures::corpus_of({{"s1", {fixtures::pod("s1/p/", "o", {})}}}));
  CHECK(check_index_isolation(world.corpus, world.snapshot).pass);
}

TEST_CASE("sketch measurements behave across the grid") {
  const auto rows = measure_bloom_fpr(default_fpr_grid(), 20000, 1);
  REQUIRE(!rows.empty());
  CHECK(rows.front().n == 0);
  CHECK(rows.front().false_positives == 0);
  CHECK(rows.front().measured_fpr == 0.0);
  for (const FprRow& row : rows) CHECK(row.false_negatives == 0);
  CHECK(evaluate_fpr_rows(rows).pass);

  // A decreasing sequence must be flagged.
  std::vector<FprRow> bad = rows;
  bad.back().measured_fpr = 0.0;
  CHECK_FALSE(evaluate_fpr_rows(bad).pass);
}

TEST_CASE("goal coverage follows the guarantee verdicts") {
  const auto all_pass = emit_goal_matrix(
      {{"PG1", true}, {"PG2", true}, {"PG3", true}, {"PG4", true}});
  REQUIRE(all_pass.size() == 7);
  CHECK(all_pass[0].id == "G1");
  CHECK(all_pass[0].status == "pass");
  for (const GoalRow& row : all_pass) {
    if (row.id == "G5") {
      CHECK(row.residual);
      CHECK(row.status == "pass-with-residual");  // residual risk never fully clears
      CHECK(row.partial == std::vector<std::string>{"PG3", "PG4"});
    }
    if (row.id == "I2") {
      CHECK(row.residual);
      CHECK(row.status == "pass-with-residual");
    }
  }

  const auto pg4_down = emit_goal_matrix(
      {{"PG1", true}, {"PG2", true}, {"PG3", true}, {"PG4", false}});
  for (const GoalRow& row : pg4_down) {
    if (row.id == "G2" || row.id == "G4") CHECK(row.status == "degraded");
    if (row.id == "G1" || row.id == "I1") CHECK(row.status == "pass");
  }

  CHECK_THROWS_AS(emit_goal_matrix({{"PG1", true}}), Error);
}

TEST_CASE("a full audit passes on a generated corpus and detects planted faults") {
  WorkbenchConfig config;
  config.seed = 1234;
  config.scale = {3, 3, 5, 5, 16, 0.3, 0.2};
  const Corpus corpus = generate_corpus(config);

  AuditOptions options;
  options.seed = 17;
  options.scope_queries = 30;
  options.bloom_trials = 20000;
  options.inject_faults = true;
  options.injection_runs = 4;

  const AuditReport report = run_audit(corpus, options);
  CHECK(report.pg1.pass);
  CHECK(report.pg2.pass);
  CHECK(report.pg3.pass);
  CHECK(report.pg4_conservativity.pass);
  CHECK(report.pg4_separability.pass);
  REQUIRE(report.fault_injection.size() == 3);
  for (const auto& [fault, stats] : report.fault_injection) {
    CHECK(stats.injected > 0);
    CHECK(stats.detected == stats.injected);
  }
  CHECK(audit_passed(report));

  // Determinism: the same options yield the same report bytes.
  const AuditReport again = run_audit(corpus, options);
  CHECK(to_json(report).dump() == to_json(again).dump());

  const std::string text = to_text(report);
  CHECK(text.find("PG1 scope isolation") != std::string::npos);
  CHECK(text.find("pass-with-residual") != std::string::npos);
}
