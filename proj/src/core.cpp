#include "podsearch/core.hpp"

#include <algorithm>
#include <utility>

namespace podsearch {

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char fold(unsigned char c) {
  if (c >= 'A' && c <= 'Z') return static_cast<char>(c - 'A' + 'a');
  return static_cast<char>(c);
}

struct ResourceRef {
  Server* server = nullptr;
  Pod* pod = nullptr;
  Resource* resource = nullptr;
};

ResourceRef find_resource(Corpus& corpus, const Url& resource_url) {
  for (auto& [sid, server] : corpus.servers) {
    for (auto& [purl, pod] : server.pods) {
      auto it = pod.resources.find(resource_url);
      if (it != pod.resources.end()) return {&server, &pod, &it->second};
    }
  }
  fail(Errc::unknown_target, "no resource at " + resource_url);
}

void touch(Corpus& corpus, Pod& pod, const char* kind, const Url& target) {
  ++corpus.event_counter;
  pod.last_mutation = corpus.event_counter;
  pod.dirty = true;
  corpus.mutation_log.push_back({kind, target, corpus.event_counter});
}

}  // namespace

std::vector<Term> tokenize(const std::string& text) {
  std::vector<Term> out;
  Term current;
  for (unsigned char c : text) {
    if (is_ascii_alnum(c)) {
      current.push_back(fold(c));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

VisibilityScope visibility_scope(const Pod& pod, const WebId& webid) {
  VisibilityScope scope{webid, {}};
  for (const auto& [url, resource] : pod.resources) {
    if (resource.acl.allows(webid)) scope.resources.insert(url);
  }
  return scope;
}

VisibilityScope global_visibility(const Corpus& corpus, const WebId& webid) {
  VisibilityScope scope{webid, {}};
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, pod] : server.pods) {
      for (const auto& [url, resource] : pod.resources) {
        if (resource.acl.allows(webid)) scope.resources.insert(url);
      }
    }
  }
  return scope;
}

void add_resource(Corpus& corpus, const Url& pod_url, Resource resource) {
  Pod* pod = find_pod(corpus, pod_url);
  if (pod == nullptr) fail(Errc::unknown_target, "no pod at " + pod_url);
  for (const auto& [sid, server] : corpus.servers) {
    for (const auto& [purl, other] : server.pods) {
      if (other.resources.count(resource.url) > 0) {
        fail(Errc::duplicate_url, "resource url already exists: " + resource.url);
      }
    }
  }
  if (resource.url.rfind(pod->url, 0) != 0) {
    fail(Errc::invalid_params, "resource url " + resource.url + " is not under pod " + pod_url);
  }
  corpus.webids.insert(resource.acl.readers.begin(), resource.acl.readers.end());
  const Url url = resource.url;
  pod->resources.emplace(url, std::move(resource));
  touch(corpus, *pod, "add-resource", url);
}

void delete_resource(Corpus& corpus, const Url& resource_url) {
  ResourceRef ref = find_resource(corpus, resource_url);
  ref.pod->resources.erase(resource_url);
  touch(corpus, *ref.pod, "delete-resource", resource_url);
}

void grant_read(Corpus& corpus, const Url& resource_url, const WebId& webid) {
  ResourceRef ref = find_resource(corpus, resource_url);
  ref.resource->acl.readers.insert(webid);
  corpus.webids.insert(webid);
  touch(corpus, *ref.pod, "grant-read", resource_url);
}

void revoke_read(Corpus& corpus, const Url& resource_url, const WebId& webid) {
  ResourceRef ref = find_resource(corpus, resource_url);
  ref.resource->acl.readers.erase(webid);
  touch(corpus, *ref.pod, "revoke-read", resource_url);
}

void set_public(Corpus& corpus, const Url& resource_url, bool is_public) {
  ResourceRef ref = find_resource(corpus, resource_url);
  ref.resource->acl.is_public = is_public;
  touch(corpus, *ref.pod, "set-public", resource_url);
}

void set_pod_registered(Corpus& corpus, const Url& pod_url, bool registered) {
  Pod* pod = find_pod(corpus, pod_url);
  if (pod == nullptr) fail(Errc::unknown_target, "no pod at " + pod_url);
  if (pod->registered_for_search == registered) return;
  pod->registered_for_search = registered;
  ++corpus.event_counter;
}

Pod* find_pod(Corpus& corpus, const Url& pod_url) {
  for (auto& [sid, server] : corpus.servers) {
    auto it = server.pods.find(pod_url);
    if (it != server.pods.end()) return &it->second;
  }
  return nullptr;
}

const Pod* find_pod(const Corpus& corpus, const Url& pod_url) {
  return find_pod(const_cast<Corpus&>(corpus), pod_url);
}

const Server* find_server(const Corpus& corpus, const ServerId& id) {
  auto it = corpus.servers.find(id);
  return it == corpus.servers.end() ? nullptr : &it->second;
}

const Server* server_of_pod(const Corpus& corpus, const Url& pod_url) {
  for (const auto& [sid, server] : corpus.servers) {
    if (server.pods.count(pod_url) > 0) return &server;
  }
  return nullptr;
}

nlohmann::json to_json(const VisibilityScope& scope) {
  return nlohmann::json{{"webid", scope.webid},
                        {"resources", std::vector<Url>(scope.resources.begin(), scope.resources.end())}};
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) fail(Errc::invalid_corpus, ctx + ": missing field '" + key + "'");
  return *it;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const std::string& ctx) {
  if (!j.is_object()) fail(Errc::invalid_corpus, ctx + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(Errc::invalid_corpus, ctx + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace

nlohmann::json save_corpus(const Corpus& corpus) {
  nlohmann::json servers = nlohmann::json::array();
  for (const auto& [sid, server] : corpus.servers) {
    nlohmann::json pods = nlohmann::json::array();
    for (const auto& [purl, pod] : server.pods) {
      nlohmann::json resources = nlohmann::json::array();
      for (const auto& [rurl, resource] : pod.resources) {
        resources.push_back(
            {{"url", resource.url},
             {"text", resource.text},
             {"readers",
              std::vector<WebId>(resource.acl.readers.begin(), resource.acl.readers.end())},
             {"public", resource.acl.is_public}});
      }
      pods.push_back({{"url", pod.url},
                      {"owner", pod.owner},
                      {"indexing_enabled", pod.indexing_enabled},
                      {"registered", pod.registered_for_search},
                      {"resources", std::move(resources)}});
    }
    servers.push_back({{"id", server.id}, {"pods", std::move(pods)}});
  }
  return nlohmann::json{{"servers", std::move(servers)},
                        {"webids", std::vector<WebId>(corpus.webids.begin(), corpus.webids.end())}};
}

Corpus load_corpus(const nlohmann::json& doc) {
  Corpus corpus;
  reject_unknown(doc, {"servers", "webids"}, "corpus");
  for (const auto& w : require_field(doc, "webids", "corpus")) {
    if (!w.is_string()) fail(Errc::invalid_corpus, "webids entries must be strings");
    if (!corpus.webids.insert(w.get<WebId>()).second) {
      fail(Errc::invalid_corpus, "duplicate webid " + w.get<WebId>());
    }
  }
  std::set<Url> seen_resource_urls;
  std::set<Url> seen_pod_urls;
  for (const auto& sj : require_field(doc, "servers", "corpus")) {
    reject_unknown(sj, {"id", "pods"}, "server");
    Server server;
    server.id = require_field(sj, "id", "server").get<ServerId>();
    if (corpus.servers.count(server.id) > 0) {
      fail(Errc::invalid_corpus, "duplicate server id " + server.id);
    }
    for (const auto& pj : require_field(sj, "pods", "server " + server.id)) {
      const std::string pctx = "pod in server " + server.id;
      reject_unknown(pj, {"url", "owner", "indexing_enabled", "registered", "resources"}, pctx);
      Pod pod;
      pod.url = require_field(pj, "url", pctx).get<Url>();
      pod.owner = require_field(pj, "owner", pctx).get<WebId>();
      pod.indexing_enabled = require_field(pj, "indexing_enabled", pctx).get<bool>();
      pod.registered_for_search = require_field(pj, "registered", pctx).get<bool>();
      if (!seen_pod_urls.insert(pod.url).second) {
        fail(Errc::invalid_corpus, "duplicate pod url " + pod.url);
      }
      if (corpus.webids.count(pod.owner) == 0) {
        fail(Errc::invalid_corpus, "pod " + pod.url + " owner not declared in webids");
      }
      for (const auto& rj : require_field(pj, "resources", pctx)) {
        const std::string rctx = "resource in pod " + pod.url;
        reject_unknown(rj, {"url", "text", "readers", "public"}, rctx);
        Resource resource;
        resource.url = require_field(rj, "url", rctx).get<Url>();
        resource.text = require_field(rj, "text", rctx).get<std::string>();
        resource.acl.is_public = require_field(rj, "public", rctx).get<bool>();
        for (const auto& reader : require_field(rj, "readers", rctx)) {
          const WebId webid = reader.get<WebId>();
          if (corpus.webids.count(webid) == 0) {
            fail(Errc::invalid_corpus,
                 "resource " + resource.url + " reader " + webid + " not declared in webids");
          }
          resource.acl.readers.insert(webid);
        }
        if (!seen_resource_urls.insert(resource.url).second) {
          fail(Errc::invalid_corpus, "duplicate resource url " + resource.url);
        }
        if (resource.url.rfind(pod.url, 0) != 0) {
          fail(Errc::invalid_corpus,
               "resource url " + resource.url + " is not under pod " + pod.url);
        }
        pod.resources.emplace(resource.url, std::move(resource));
      }
      server.pods.emplace(pod.url, std::move(pod));
    }
    corpus.servers.emplace(server.id, std::move(server));
  }
  return corpus;
}

}  // namespace podsearch
