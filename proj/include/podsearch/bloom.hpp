#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "podsearch/core.hpp"

namespace podsearch {

struct BloomParams {
  // Sketches are sized per insertion count for this rate unless an explicit
  // geometry is given.
  double target_fpr = 0.01;
  std::optional<std::uint32_t> m;
  std::optional<std::uint32_t> k;
  std::uint64_t seed = 0;
};

// Fixed-size bit array with k hash probes. Never returns false for an
// inserted key; absent keys may read as present. A sketch with a non-empty
// `scope_webid` may only be queried by that identity; sketches with an empty
// scope hold the shared public tier.
struct BloomSketch {
  std::uint32_t m = 8;
  std::uint32_t k = 1;
  std::uint64_t seed = 0;
  WebId scope_webid;
  std::string tier;  // "server" | "system"
  std::uint64_t inserted_count = 0;
  std::vector<std::uint8_t> bits;
};

// m = ceil(-n ln p / ln^2 2), k = ceil((m/n) ln 2); minimum geometry (8, 1).
std::pair<std::uint32_t, std::uint32_t> bloom_geometry(std::uint64_t n, double target_fpr);

// Membership keys bind a term to the context it was seen in (server id at the
// system tier, pod url at the server tier), separated by US (0x1f).
std::string bloom_key(const Term& term, const std::string& context);

BloomSketch bloom_make(const BloomParams& params, std::uint64_t expected_insertions,
                       WebId scope_webid, std::string tier);
BloomSketch bloom_build(const std::vector<std::string>& keys, const BloomParams& params,
                        WebId scope_webid, std::string tier);

void bloom_insert(BloomSketch& sketch, const std::string& key);
bool bloom_contains(const BloomSketch& sketch, const std::string& key);

// Enforces the per-WebId access rule; throws scope-violation when `requester`
// does not own a scoped sketch.
bool bloom_query_scoped(const BloomSketch& sketch, const WebId& requester, const std::string& key);

// (1 - e^{-kn/m})^k
double bloom_theoretical_fpr(std::uint64_t n, std::uint32_t m, std::uint32_t k);

// {m, k, seed, bits: base64}
nlohmann::json to_json(const BloomSketch& sketch);
BloomSketch bloom_from_json(const nlohmann::json& doc, WebId scope_webid, std::string tier);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace podsearch
