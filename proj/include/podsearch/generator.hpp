#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "podsearch/rng.hpp"
#include "podsearch/search.hpp"

namespace podsearch {

struct ScaleConfig {
  std::uint32_t servers = 2;
  std::uint32_t pods_per_server = 3;
  std::uint32_t resources_per_pod = 4;
  std::uint32_t webids = 4;
  std::uint32_t vocabulary = 30;
  double acl_density = 0.30;     // chance a given webid reads a given resource
  double public_fraction = 0.15; // chance a resource is public
};

struct WorkbenchConfig {
  std::uint64_t seed = 1;
  ScaleConfig scale;
  BloomParams bloom;
  Strategy default_strategy = Strategy::direct;
  MetadataMode default_mode = MetadataMode::exact;
  std::size_t overlay_nodes = 3;
};

// Config file shape:
//   {seed, scale:{servers, pods_per_server, resources_per_pod, webids,
//    vocabulary, acl_density, public_fraction},
//    bloom:{target_fpr}|{m,k}, defaults:{strategy, metadata_mode},
//    overlay_nodes}
// Everything except `seed` has defaults. Throws invalid-config.
WorkbenchConfig config_from_json(const nlohmann::json& doc);

// Healthcare-flavored term list. The first entries include a hidden condition
// term and the observable terms it co-occurs with, so correlation effects are
// reproducible at any vocabulary size. Sizes beyond the built-in list are
// padded with synthetic terms.
std::vector<std::string> vocabulary(std::uint32_t size);

// Deterministic: the same config yields byte-identical corpora. Pods come out
// indexing-enabled and registered, ready for the index/refresh pipeline.
Corpus generate_corpus(const WorkbenchConfig& config);

}  // namespace podsearch
