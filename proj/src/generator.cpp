#include "podsearch/generator.hpp"

#include <algorithm>
#include <array>

namespace podsearch {

namespace {

// Hidden condition terms and their observable companions lead the list so
// that small vocabularies still contain correlated pairs.
constexpr std::array<const char*, 60> kBaseVocabulary = {
    "depression", "fatigue",    "withdrawal",   "insomnia",   "diabetes",  "thirst",
    "insulin",    "asthma",     "inhaler",      "wheeze",     "migraine",  "aura",
    "nausea",     "eczema",     "rash",         "arthritis",  "stiffness", "anemia",
    "pallor",     "hypertension", "dizziness",  "statin",     "ibuprofen", "therapy",
    "antibiotic", "vaccine",    "dialysis",     "fever",      "cough",     "tremor",
    "pain",       "allergy",    "clinic",       "referral",   "appointment", "followup",
    "prescription", "dosage",   "screening",    "consult",    "bloodwork", "xray",
    "scan",       "checkup",    "review",       "notes",      "summary",   "visit",
    "history",    "results",    "ward",         "discharge",  "triage",    "recovery",
    "monitor",    "sample",     "chart",        "intake",     "outcome",   "baseline"};

// hidden term -> companions emitted alongside it
struct Correlation {
  const char* hidden;
  std::array<const char*, 2> companions;
};
constexpr std::array<Correlation, 3> kCorrelations = {{
    {"depression", {"fatigue", "withdrawal"}},
    {"diabetes", {"thirst", "insulin"}},
    {"asthma", {"inhaler", "wheeze"}},
}};

std::string padded(std::uint32_t value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return digits;
}

double require_unit_interval(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const double value = j.at(key).get<double>();
  if (value < 0.0 || value > 1.0) {
    fail(Errc::invalid_config, std::string(key) + " must lie in [0, 1]");
  }
  return value;
}

std::uint32_t require_count(const nlohmann::json& j, const char* key, std::uint32_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) {
    fail(Errc::invalid_config, std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::uint32_t>();
}

}  // namespace

WorkbenchConfig config_from_json(const nlohmann::json& doc) {
  WorkbenchConfig config;
  if (!doc.is_object()) fail(Errc::invalid_config, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "seed" && key != "scale" && key != "bloom" && key != "defaults" &&
        key != "overlay_nodes") {
      fail(Errc::invalid_config, "unknown config field '" + key + "'");
    }
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) {
      fail(Errc::invalid_config, "seed must be a non-negative integer");
    }
    config.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("scale")) {
    const auto& s = doc.at("scale");
    config.scale.servers = require_count(s, "servers", config.scale.servers);
    config.scale.pods_per_server = require_count(s, "pods_per_server", config.scale.pods_per_server);
    config.scale.resources_per_pod =
        require_count(s, "resources_per_pod", config.scale.resources_per_pod);
    config.scale.webids = require_count(s, "webids", config.scale.webids);
    config.scale.vocabulary = require_count(s, "vocabulary", config.scale.vocabulary);
    config.scale.acl_density = require_unit_interval(s, "acl_density", config.scale.acl_density);
    config.scale.public_fraction =
        require_unit_interval(s, "public_fraction", config.scale.public_fraction);
  }
  if (doc.contains("bloom")) {
    const auto& b = doc.at("bloom");
    if (b.contains("m") || b.contains("k")) {
      if (!b.contains("m") || !b.contains("k")) {
        fail(Errc::invalid_config, "explicit bloom geometry requires both m and k");
      }
      config.bloom.m = b.at("m").get<std::uint32_t>();
      config.bloom.k = b.at("k").get<std::uint32_t>();
      if (*config.bloom.m < 8 || *config.bloom.k < 1) {
        fail(Errc::invalid_config, "bloom geometry must satisfy m >= 8, k >= 1");
      }
    } else if (b.contains("target_fpr")) {
      config.bloom.target_fpr = b.at("target_fpr").get<double>();
      if (!(config.bloom.target_fpr > 0.0 && config.bloom.target_fpr < 1.0)) {
        fail(Errc::invalid_config, "target_fpr must lie in (0, 1)");
      }
    }
    if (b.contains("seed")) config.bloom.seed = b.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("defaults")) {
    const auto& d = doc.at("defaults");
    if (d.contains("strategy")) {
      config.default_strategy = strategy_from_string(d.at("strategy").get<std::string>());
    }
    if (d.contains("metadata_mode")) {
      config.default_mode = metadata_mode_from_string(d.at("metadata_mode").get<std::string>());
    }
  }
  if (doc.contains("overlay_nodes")) {
    config.overlay_nodes = doc.at("overlay_nodes").get<std::size_t>();
    if (config.overlay_nodes == 0) fail(Errc::invalid_config, "overlay_nodes must be >= 1");
  }
  return config;
}

std::vector<std::string> vocabulary(std::uint32_t size) {
  std::vector<std::string> terms;
  terms.reserve(size);
  for (std::uint32_t i = 0; i < size; ++i) {
    if (i < kBaseVocabulary.size()) {
      terms.emplace_back(kBaseVocabulary[i]);
    } else {
      terms.push_back("term" + padded(i, 3));
    }
  }
  return terms;
}

Corpus generate_corpus(const WorkbenchConfig& config) {
  Rng rng(config.seed);
  const std::vector<std::string> vocab = vocabulary(config.scale.vocabulary);

  Corpus corpus;
  std::vector<WebId> webids;
  for (std::uint32_t w = 0; w < config.scale.webids; ++w) {
    webids.push_back("u" + padded(w + 1, 2));
  }
  corpus.webids.insert(webids.begin(), webids.end());

  for (std::uint32_t s = 0; s < config.scale.servers; ++s) {
    Server server;
    server.id = "s" + padded(s + 1, 2);
    for (std::uint32_t p = 0; p < config.scale.pods_per_server; ++p) {
      Pod pod;
      pod.url = server.id + "/p" + padded(p + 1, 2) + "/";
      pod.owner = webids.empty() ? "u00"
                                 : webids[(s * config.scale.pods_per_server + p) % webids.size()];
      pod.indexing_enabled = true;
      pod.registered_for_search = true;
      for (std::uint32_t r = 0; r < config.scale.resources_per_pod; ++r) {
        Resource resource;
        resource.url = pod.url + "r" + padded(r + 1, 3);
        std::vector<std::string> words;
        if (!vocab.empty()) {
          const std::size_t length = 3 + static_cast<std::size_t>(rng.below(8));
          for (std::size_t i = 0; i < length; ++i) words.push_back(rng.pick(vocab));
          // Hidden conditions drag their observable companions along, giving
          // correlation-based inference something to latch onto.
          for (const Correlation& c : kCorrelations) {
            const bool has_hidden =
                std::find(words.begin(), words.end(), c.hidden) != words.end();
            if (has_hidden && rng.chance(0.8)) {
              for (const char* companion : c.companions) words.emplace_back(companion);
            }
          }
        }
        for (std::size_t i = 0; i < words.size(); ++i) {
          if (i > 0) resource.text.push_back(' ');
          resource.text += words[i];
        }
        resource.acl.is_public = rng.chance(config.scale.public_fraction);
        for (const WebId& webid : webids) {
          if (rng.chance(config.scale.acl_density)) resource.acl.readers.insert(webid);
        }
        pod.resources.emplace(resource.url, std::move(resource));
      }
      if (webids.empty()) corpus.webids.insert(pod.owner);
      server.pods.emplace(pod.url, std::move(pod));
    }
    corpus.servers.emplace(server.id, std::move(server));
  }
  return corpus;
}

}  // namespace podsearch
