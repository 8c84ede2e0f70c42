#include "doctest.h"

#include "fixtures.hpp"
#include "podsearch/core.hpp"
#include "podsearch/generator.hpp"
#include "podsearch/rng.hpp"

using namespace podsearch;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Treatment-Resistant Depression") ==
        std::vector<Term>{"treatment", "resistant", "depression"});
  CHECK(tokenize("") == std::vector<Term>{});
  CHECK(tokenize("diabetes, diet; diabetes") == std::vector<Term>{"diabetes", "diet", "diabetes"});
  // Multibyte characters act as separators.
  CHECK(tokenize("caf\xc3\xa9 visit") == std::vector<Term>{"caf", "visit"});
  CHECK(tokenize("A1c=7.2%") == std::vector<Term>{"a1c", "7", "2"});
}

TEST_CASE("visibility scope follows the ACL exactly") {
  const Corpus corpus = fixtures::three_reader_corpus();
  const Pod& p1 = corpus.servers.at("srv1").pods.at("srv1/p1/");

  CHECK(visibility_scope(p1, "UUID1").resources == std::set<Url>{"srv1/p1/r1", "srv1/p1/r3"});
  CHECK(visibility_scope(p1, "UUID2").resources == std::set<Url>{"srv1/p1/r2"});
  CHECK(visibility_scope(p1, "UUID4").resources.empty());
}

TEST_CASE("public resources are visible to any identity") {
  Corpus corpus = fixtures::corpus_of(
      {{"s1", {fixtures::pod("s1/p1/", "owner", {fixtures::res("s1/p1/r1", "open note", {}, true)})}}});
  const Pod& pod = corpus.servers.at("s1").pods.at("s1/p1/");
  CHECK(visibility_scope(pod, "nobody-knows-me").resources == std::set<Url>{"s1/p1/r1"});
}

TEST_CASE("global visibility is the union across pods and servers") {
  CHECK(global_visibility(fixtures::three_reader_corpus(), "UUID2").resources ==
        std::set<Url>{"srv1/p1/r2"});
  CHECK(global_visibility(Corpus{}, "anyone").resources.empty());

  const Corpus two = fixtures::corpus_of(
      {{"s1", {fixtures::pod("s1/p1/", "o1", {fixtures::res("s1/p1/r1", "x", {"U"})})}},
       {"s2", {fixtures::pod("s2/p1/", "o2", {fixtures::res("s2/p1/r1", "y", {"U"})})}}});
  CHECK(global_visibility(two, "U").resources == std::set<Url>{"s1/p1/r1", "s2/p1/r1"});
}

TEST_CASE("mutations update scopes and bookkeeping") {
  Corpus corpus = fixtures::three_reader_corpus();
  const Pod& p1 = corpus.servers.at("srv1").pods.at("srv1/p1/");

  grant_read(corpus, "srv1/p1/r2", "UUID1");
  CHECK(visibility_scope(p1, "UUID1").resources ==
        std::set<Url>{"srv1/p1/r1", "srv1/p1/r2", "srv1/p1/r3"});
  CHECK(p1.dirty);
  CHECK(corpus.mutation_log.back().kind == "grant-read");

  delete_resource(corpus, "srv1/p1/r3");
  CHECK(visibility_scope(p1, "UUID3").resources.empty());

  set_public(corpus, "srv1/p1/r2", true);
  CHECK(visibility_scope(p1, "stranger").resources == std::set<Url>{"srv1/p1/r2"});

  revoke_read(corpus, "srv1/p1/r1", "UUID1");
  CHECK(visibility_scope(p1, "UUID1").resources == std::set<Url>{"srv1/p1/r2"});

  CHECK(corpus.event_counter == 4);
  CHECK(corpus.mutation_log.size() == 4);
}

TEST_CASE("mutation errors") {
  Corpus corpus = fixtures::three_reader_corpus();
  CHECK_THROWS_WITH_AS(add_resource(corpus, "srv1/p1/", fixtures::res("srv1/p1/r1", "dup")),
                       doctest::Contains("duplicate-url"), Error);
  CHECK_THROWS_AS(add_resource(corpus, "srv1/nowhere/", fixtures::res("srv1/nowhere/r", "x")),
                  Error);
  CHECK_THROWS_AS(delete_resource(corpus, "srv1/p1/absent"), Error);
  CHECK_THROWS_AS(grant_read(corpus, "srv1/p1/absent", "U"), Error);

  try {
    add_resource(corpus, "srv1/p1/", fixtures::res("elsewhere/r9", "x"));
    FAIL("expected an error");
  } catch (const Error& error) {
    CHECK(error.code() == Errc::invalid_params);
  }
}

TEST_CASE("registration bumps the counter without dirtying the pod") {
  Corpus corpus = fixtures::three_reader_corpus();
  Pod& p1 = corpus.servers.at("srv1").pods.at("srv1/p1/");
  p1.registered_for_search = false;

  set_pod_registered(corpus, "srv1/p1/", true);
  CHECK(corpus.event_counter == 1);
  CHECK_FALSE(p1.dirty);

  set_pod_registered(corpus, "srv1/p1/", true);  // no change, no bump
  CHECK(corpus.event_counter == 1);
}

TEST_CASE("grants never shrink scopes and revokes never grow them") {
  WorkbenchConfig config;
  config.seed = 77;
  config.scale = {2, 3, 5, 5, 20, 0.3, 0.2};
  Corpus corpus = generate_corpus(config);
  Rng rng(123);

  std::vector<Url> resources;
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      for (const auto& [rurl, r] : pod.resources) resources.push_back(rurl);
    }
  }
  const std::vector<WebId> webids(corpus.webids.begin(), corpus.webids.end());

  for (int step = 0; step < 200; ++step) {
    const Url& target = rng.pick(resources);
    const WebId& webid = rng.pick(webids);
    std::map<WebId, std::set<Url>> before;
    for (const WebId& u : webids) before[u] = global_visibility(corpus, u).resources;

    const bool granting = rng.chance(0.5);
    if (granting) {
      grant_read(corpus, target, webid);
    } else {
      revoke_read(corpus, target, webid);
    }
    for (const WebId& u : webids) {
      const std::set<Url> after = global_visibility(corpus, u).resources;
      if (granting) {
        CHECK(std::includes(after.begin(), after.end(), before[u].begin(), before[u].end()));
      } else {
        CHECK(std::includes(before[u].begin(), before[u].end(), after.begin(), after.end()));
      }
    }
  }
}

TEST_CASE("scope membership matches the ACL rule exhaustively") {
  WorkbenchConfig config;
  config.seed = 4242;
  config.scale = {1, 5, 10, 6, 25, 0.25, 0.2};
  const Corpus corpus = generate_corpus(config);
  std::vector<WebId> parties(corpus.webids.begin(), corpus.webids.end());
  parties.push_back("unknown-party");

  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      for (const WebId& webid : parties) {
        const auto scope = visibility_scope(pod, webid).resources;
        for (const auto& [rurl, r] : pod.resources) {
          CHECK(scope.count(rurl) == (r.acl.is_public || r.acl.readers.count(webid) > 0 ? 1u : 0u));
        }
      }
    }
  }
}

TEST_CASE("identical state serializes to identical bytes") {
  const Corpus corpus = fixtures::three_reader_corpus();
  const Pod& p1 = corpus.servers.at("srv1").pods.at("srv1/p1/");
  CHECK(to_json(visibility_scope(p1, "UUID1")).dump() ==
        to_json(visibility_scope(p1, "UUID1")).dump());
  CHECK(save_corpus(corpus).dump(2) == save_corpus(corpus).dump(2));
}

TEST_CASE("corpus files round-trip and load strictly") {
  const Corpus corpus = fixtures::three_reader_corpus();
  const nlohmann::json doc = save_corpus(corpus);
  const Corpus reloaded = load_corpus(doc);
  CHECK(save_corpus(reloaded).dump(2) == doc.dump(2));

  nlohmann::json extra = doc;
  extra["surprise"] = 1;
  CHECK_THROWS_AS(load_corpus(extra), Error);

  nlohmann::json bad_reader = doc;
  bad_reader["servers"][0]["pods"][0]["resources"][0]["readers"].push_back("ghost-webid");
  CHECK_THROWS_AS(load_corpus(bad_reader), Error);

  nlohmann::json missing = doc;
  missing["servers"][0]["pods"][0].erase("owner");
  CHECK_THROWS_AS(load_corpus(missing), Error);

  nlohmann::json dup = doc;
  dup["servers"][0]["pods"][0]["resources"][1]["url"] = "srv1/p1/r1";
  CHECK_THROWS_AS(load_corpus(dup), Error);
}
