#include "podsearch/bloom.hpp"

#include <cmath>

namespace podsearch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ splitmix64(seed);
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Double hashing: probe i lands at (h1 + i*h2) mod m.
struct Probes {
  std::uint64_t h1;
  std::uint64_t h2;
};

Probes probes_for(const BloomSketch& sketch, const std::string& key) {
  const std::uint64_t base = fnv1a64(key, sketch.seed);
  return {splitmix64(base), splitmix64(base ^ 0x6a09e667f3bcc909ull) | 1ull};
}

}  // namespace

std::pair<std::uint32_t, std::uint32_t> bloom_geometry(std::uint64_t n, double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    fail(Errc::invalid_params, "target false-positive rate must be in (0, 1)");
  }
  if (n == 0) return {8, 1};
  const double ln2 = std::log(2.0);
  const double m = std::ceil(-static_cast<double>(n) * std::log(target_fpr) / (ln2 * ln2));
  const std::uint32_t m_bits = static_cast<std::uint32_t>(std::max(8.0, m));
  const double k = std::ceil(static_cast<double>(m_bits) / static_cast<double>(n) * ln2);
  return {m_bits, static_cast<std::uint32_t>(std::max(1.0, k))};
}

std::string bloom_key(const Term& term, const std::string& context) {
  return term + '\x1f' + context;
}

BloomSketch bloom_make(const BloomParams& params, std::uint64_t expected_insertions,
                       WebId scope_webid, std::string tier) {
  BloomSketch sketch;
  if (params.m || params.k) {
    if (!params.m || !params.k) {
      fail(Errc::invalid_params, "explicit bloom geometry requires both m and k");
    }
    sketch.m = *params.m;
    sketch.k = *params.k;
  } else {
    std::tie(sketch.m, sketch.k) = bloom_geometry(expected_insertions, params.target_fpr);
  }
  if (sketch.m < 8) fail(Errc::invalid_params, "bloom sketch needs at least 8 bits");
  if (sketch.k < 1) fail(Errc::invalid_params, "bloom sketch needs at least one hash");
  sketch.seed = params.seed;
  sketch.scope_webid = std::move(scope_webid);
  sketch.tier = std::move(tier);
  sketch.bits.assign((sketch.m + 7) / 8, 0);
  return sketch;
}

BloomSketch bloom_build(const std::vector<std::string>& keys, const BloomParams& params,
                        WebId scope_webid, std::string tier) {
  BloomSketch sketch = bloom_make(params, keys.size(), std::move(scope_webid), std::move(tier));
  for (const std::string& key : keys) bloom_insert(sketch, key);
  return sketch;
}

void bloom_insert(BloomSketch& sketch, const std::string& key) {
  const Probes p = probes_for(sketch, key);
  for (std::uint32_t i = 0; i < sketch.k; ++i) {
    const std::uint64_t bit = (p.h1 + i * p.h2) % sketch.m;
    sketch.bits[bit >> 3] |= static_cast<std::uint8_t>(1u << (bit & 7u));
  }
  ++sketch.inserted_count;
}

bool bloom_contains(const BloomSketch& sketch, const std::string& key) {
  const Probes p = probes_for(sketch, key);
  for (std::uint32_t i = 0; i < sketch.k; ++i) {
    const std::uint64_t bit = (p.h1 + i * p.h2) % sketch.m;
    if ((sketch.bits[bit >> 3] & (1u << (bit & 7u))) == 0) return false;
  }
  return true;
}

bool bloom_query_scoped(const BloomSketch& sketch, const WebId& requester, const std::string& key) {
  if (!sketch.scope_webid.empty() && sketch.scope_webid != requester) {
    fail(Errc::scope_violation,
         "sketch scoped to " + sketch.scope_webid + " queried by " + requester);
  }
  return bloom_contains(sketch, key);
}

double bloom_theoretical_fpr(std::uint64_t n, std::uint32_t m, std::uint32_t k) {
  if (n == 0) return 0.0;
  const double exponent = -static_cast<double>(k) * static_cast<double>(n) / static_cast<double>(m);
  return std::pow(1.0 - std::exp(exponent), static_cast<double>(k));
}

nlohmann::json to_json(const BloomSketch& sketch) {
  return nlohmann::json{{"m", sketch.m},
                        {"k", sketch.k},
                        {"seed", sketch.seed},
                        {"bits", base64_encode(sketch.bits)}};
}

BloomSketch bloom_from_json(const nlohmann::json& doc, WebId scope_webid, std::string tier) {
  BloomSketch sketch;
  sketch.m = doc.at("m").get<std::uint32_t>();
  sketch.k = doc.at("k").get<std::uint32_t>();
  sketch.seed = doc.at("seed").get<std::uint64_t>();
  sketch.bits = base64_decode(doc.at("bits").get<std::string>());
  sketch.scope_webid = std::move(scope_webid);
  sketch.tier = std::move(tier);
  return sketch;
}

namespace {
constexpr char kBase64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out.push_back(kBase64Alphabet[(chunk >> 18) & 0x3f]);
    out.push_back(kBase64Alphabet[(chunk >> 12) & 0x3f]);
    out.push_back(i + 1 < bytes.size() ? kBase64Alphabet[(chunk >> 6) & 0x3f] : '=');
    out.push_back(i + 2 < bytes.size() ? kBase64Alphabet[chunk & 0x3f] : '=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t chunk = 0;
  int have = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = base64_value(c);
    if (v < 0) fail(Errc::invalid_params, "invalid base64 input");
    chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
    if (++have == 4) {
      out.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xff));
      out.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
      out.push_back(static_cast<std::uint8_t>(chunk & 0xff));
      chunk = 0;
      have = 0;
    }
  }
  if (have == 2) {
    out.push_back(static_cast<std::uint8_t>((chunk >> 4) & 0xff));
  } else if (have == 3) {
    out.push_back(static_cast<std::uint8_t>((chunk >> 10) & 0xff));
    out.push_back(static_cast<std::uint8_t>((chunk >> 2) & 0xff));
  }
  return out;
}

}  // namespace podsearch
