#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "podsearch/errors.hpp"

namespace podsearch {

using WebId = std::string;
using Url = std::string;
using Term = std::string;
using ServerId = std::string;

// Per-resource read policy. `is_public` grants read access to every identity,
// including ones the corpus has never seen. Owners get no implicit access:
// they appear in `readers` like anyone else.
struct AccessControlList {
  std::set<WebId> readers;
  bool is_public = false;

  bool allows(const WebId& webid) const { return is_public || readers.count(webid) > 0; }

  friend bool operator==(const AccessControlList&, const AccessControlList&) = default;
};

struct Resource {
  Url url;
  std::string text;
  AccessControlList acl;

  friend bool operator==(const Resource&, const Resource&) = default;
};

struct Pod {
  Url url;
  WebId owner;
  std::map<Url, Resource> resources;
  bool indexing_enabled = true;
  bool registered_for_search = false;

  // Event counter of the last content or ACL change. Index builds stamp
  // themselves with this value; a mismatch means the index is stale.
  std::uint64_t last_mutation = 0;
  bool dirty = false;
};

struct Server {
  ServerId id;
  std::map<Url, Pod> pods;
};

struct MutationEvent {
  std::string kind;  // add-resource | delete-resource | grant-read | revoke-read | set-public
  Url target;
  std::uint64_t at = 0;
};

// The whole simulated world. Single-writer discipline: mutations go through
// the functions below; everything downstream consumes value snapshots.
struct Corpus {
  std::map<ServerId, Server> servers;
  std::set<WebId> webids;
  std::vector<MutationEvent> mutation_log;
  std::uint64_t event_counter = 0;
};

struct VisibilityScope {
  WebId webid;
  std::set<Url> resources;
};

// Lowercases and splits on any non-alphanumeric byte; empty tokens dropped,
// duplicates kept (they carry term frequency). Only ASCII letters fold.
std::vector<Term> tokenize(const std::string& text);

// Resources in `pod` readable by `webid`: listed in the ACL or public.
// Unknown WebIds are fine and see only public resources.
VisibilityScope visibility_scope(const Pod& pod, const WebId& webid);

// Union of the per-pod scopes across every server.
VisibilityScope global_visibility(const Corpus& corpus, const WebId& webid);

// Mutations. Each bumps the event counter, appends to the mutation log and
// marks the owning pod dirty. Indexes and metadata are rebuilt separately.
void add_resource(Corpus& corpus, const Url& pod_url, Resource resource);
void delete_resource(Corpus& corpus, const Url& resource_url);
void grant_read(Corpus& corpus, const Url& resource_url, const WebId& webid);
void revoke_read(Corpus& corpus, const Url& resource_url, const WebId& webid);
void set_public(Corpus& corpus, const Url& resource_url, bool is_public);

// Registration is not a content mutation: it bumps the event counter (so
// aggregated metadata goes stale) but leaves pod indexes valid.
void set_pod_registered(Corpus& corpus, const Url& pod_url, bool registered);

Pod* find_pod(Corpus& corpus, const Url& pod_url);
const Pod* find_pod(const Corpus& corpus, const Url& pod_url);
const Server* find_server(const Corpus& corpus, const ServerId& id);
const Server* server_of_pod(const Corpus& corpus, const Url& pod_url);

nlohmann::json to_json(const VisibilityScope& scope);

// Corpus file format. One document:
//   {servers:[{id, pods:[{url, owner, indexing_enabled, registered,
//     resources:[{url, text, readers:[...], public}]}]}], webids:[...]}
// Loading is strict: unknown or missing fields are rejected, ids must be
// unique, readers and owners must be declared in `webids`.
nlohmann::json save_corpus(const Corpus& corpus);
Corpus load_corpus(const nlohmann::json& doc);

}  // namespace podsearch
