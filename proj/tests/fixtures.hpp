#pragma once

// Shared corpus fixtures for the worked examples exercised across suites.

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "podsearch/audit.hpp"
#include "podsearch/generator.hpp"
#include "podsearch/search.hpp"

namespace fixtures {

using namespace podsearch;

inline Resource res(Url url, std::string text, std::initializer_list<WebId> readers = {},
                    bool is_public = false) {
  Resource r;
  r.url = std::move(url);
  r.text = std::move(text);
  r.acl.readers = readers;
  r.acl.is_public = is_public;
  return r;
}

inline Pod pod(Url url, WebId owner, std::vector<Resource> resources, bool enabled = true,
               bool registered = true) {
  Pod p;
  p.url = std::move(url);
  p.owner = std::move(owner);
  p.indexing_enabled = enabled;
  p.registered_for_search = registered;
  for (Resource& r : resources) p.resources.emplace(r.url, std::move(r));
  return p;
}

inline Corpus corpus_of(std::vector<std::pair<ServerId, std::vector<Pod>>> servers,
                        std::initializer_list<WebId> extra_webids = {}) {
  Corpus corpus;
  corpus.webids = extra_webids;
  for (auto& [sid, pods] : servers) {
    Server server;
    server.id = sid;
    for (Pod& p : pods) {
      corpus.webids.insert(p.owner);
      for (const auto& [rurl, r] : p.resources) {
        corpus.webids.insert(r.acl.readers.begin(), r.acl.readers.end());
      }
      server.pods.emplace(p.url, std::move(p));
    }
    corpus.servers.emplace(server.id, std::move(server));
  }
  return corpus;
}

// Registered overlay plus refreshed metadata, ready to query.
struct PreparedWorld {
  Corpus corpus;
  OverlayNetwork network;
  Snapshot snapshot;
};

inline PreparedWorld prepare(Corpus corpus, BloomParams params = {}) {
  PreparedWorld world{std::move(corpus), make_overlay(3), {}};
  for (const auto& [sid, server] : world.corpus.servers) {
    register_server(world.network, sid, metadata_location(sid));
  }
  world.snapshot = refresh(world.corpus, params);
  return world;
}

// One pod, three resources with per-identity grants; r1 and r3 share a term
// so a single query can hit both.
inline Corpus three_reader_corpus() {
  return corpus_of({{"srv1",
                     {pod("srv1/p1/", "owner1",
                          {res("srv1/p1/r1", "alpha one", {"UUID1"}),
                           res("srv1/p1/r2", "beta two", {"UUID2"}),
                           res("srv1/p1/r3", "alpha three", {"UUID1", "UUID3"})})}}},
                   {"UUID4"});
}

// Term partitions per identity: U1 sees genetic/therapy, U2 the rest.
inline Corpus index_partition_corpus() {
  return corpus_of({{"srv1",
                     {pod("srv1/podA/", "owner1",
                          {res("srv1/podA/r1", "genetic therapy", {"U1"}),
                           res("srv1/podA/r2", "cancer", {"U2"}),
                           res("srv1/podA/r3", "diabetes diet", {"U2"})})}}});
}

// "diabetes" exists only outside U_A's scope.
inline Corpus scope_isolation_corpus() {
  return corpus_of({{"srv1",
                     {pod("srv1/pA/", "ownerA",
                          {res("srv1/pA/r1", "hypertension notes", {"U_A"}),
                           res("srv1/pA/r2", "asthma inhaler", {"U_A"})}),
                      pod("srv1/pB/", "ownerB", {res("srv1/pB/r3", "diabetes insulin", {"U_B"})})}}});
}

// Four data stores on one server; per-identity pod counts 1/2/0/1.
inline Corpus server_tier_corpus() {
  return corpus_of(
      {{"server1",
        {pod("server1/dstore1/", "o1", {res("server1/dstore1/r1", "kwd1", {"UUID1"})}),
         pod("server1/dstore2/", "o2", {res("server1/dstore2/r1", "kwd2", {"UUID1"})}),
         pod("server1/dstore3/", "o3", {res("server1/dstore3/r1", "kwd2", {"UUID1"})}),
         pod("server1/dstore4/", "o4", {res("server1/dstore4/r1", "kwd2", {"UUID2"})})}}},
      {"UUID2"});
}

// Three servers; per-identity server counts 1/2 and 0/1.
inline Corpus system_tier_corpus() {
  return corpus_of(
      {{"server1",
        {pod("server1/p1/", "o1",
             {res("server1/p1/ra", "kwd1", {"UUID1"}), res("server1/p1/rb", "kwd2", {"UUID1"})})}},
       {"server2", {pod("server2/p1/", "o2", {res("server2/p1/ra", "kwd2", {"UUID1"})})}},
       {"server3", {pod("server3/p1/", "o3", {res("server3/p1/ra", "kwd2", {"UUID2"})})}}});
}

// Two servers, three pods, one keyword; per-identity results differ per pod.
inline Corpus reconstruction_corpus() {
  return corpus_of(
      {{"S1",
        {pod("S1/P_A/", "oa", {res("S1/P_A/r1", "cancer", {"w1"})}),
         pod("S1/P_B/", "ob", {res("S1/P_B/r1", "cancer", {"w2"})})}},
       {"S2", {pod("S2/P_C/", "oc", {res("S2/P_C/r1", "cancer", {"w1"})})}}});
}

}  // namespace fixtures
