// Command-line workbench: corpus generation, indexing, registration,
// metadata refresh, queries, audits and stage timings, all file-based.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "podsearch/audit.hpp"
#include "podsearch/generator.hpp"
#include "podsearch/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace podsearch;

struct Workspace {
  fs::path dir;
  Corpus corpus;
  WorkbenchConfig defaults;  // seed, bloom, strategy/mode defaults, overlay width
};

json state_to_json(const Workspace& ws) {
  json bloom;
  bloom["target_fpr"] = ws.defaults.bloom.target_fpr;
  bloom["seed"] = ws.defaults.bloom.seed;
  if (ws.defaults.bloom.m) bloom["m"] = *ws.defaults.bloom.m;
  if (ws.defaults.bloom.k) bloom["k"] = *ws.defaults.bloom.k;
  return json{{"event_counter", ws.corpus.event_counter},
              {"seed", ws.defaults.seed},
              {"overlay_nodes", ws.defaults.overlay_nodes},
              {"bloom", std::move(bloom)},
              {"defaults",
               {{"strategy", to_string(ws.defaults.default_strategy)},
                {"metadata_mode", to_string(ws.defaults.default_mode)}}}};
}

void save_state(const Workspace& ws) {
  save_json_file(ws.dir / "state.json", state_to_json(ws));
}

Workspace load_workspace(const fs::path& dir) {
  Workspace ws;
  ws.dir = dir;
  ws.corpus = load_corpus(load_json_file(dir / "corpus.json"));
  const fs::path state_path = dir / "state.json";
  if (fs::exists(state_path)) {
    const json state = load_json_file(state_path);
    ws.corpus.event_counter = state.at("event_counter").get<std::uint64_t>();
    ws.defaults.seed = state.at("seed").get<std::uint64_t>();
    ws.defaults.overlay_nodes = state.at("overlay_nodes").get<std::size_t>();
    const json& bloom = state.at("bloom");
    ws.defaults.bloom.target_fpr = bloom.at("target_fpr").get<double>();
    ws.defaults.bloom.seed = bloom.at("seed").get<std::uint64_t>();
    if (bloom.contains("m")) ws.defaults.bloom.m = bloom.at("m").get<std::uint32_t>();
    if (bloom.contains("k")) ws.defaults.bloom.k = bloom.at("k").get<std::uint32_t>();
    const json& defaults = state.at("defaults");
    ws.defaults.default_strategy =
        strategy_from_string(defaults.at("strategy").get<std::string>());
    ws.defaults.default_mode =
        metadata_mode_from_string(defaults.at("metadata_mode").get<std::string>());
  }
  return ws;
}

void save_corpus_file(const Workspace& ws) {
  save_json_file(ws.dir / "corpus.json", save_corpus(ws.corpus));
}

// Artifact files are enumerated in sorted key order so reruns are
// byte-identical.
std::string numbered(const char* stem, std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s_%04zu.json", stem, index);
  return buffer;
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_snapshot(const Workspace& ws, const Snapshot& snapshot) {
  fs::remove_all(ws.dir / "indexes");
  fs::remove_all(ws.dir / "metadata");
  std::size_t i = 0;
  for (const auto& [pod_url, index_set] : snapshot.indexes) {
    save_json_file(ws.dir / "indexes" / numbered("pod", i), to_json(index_set));
    save_json_file(ws.dir / "metadata" / "profiles" / numbered("pod", i),
                   to_json(snapshot.profiles.at(pod_url)));
    ++i;
  }
  std::size_t s = 0;
  for (const auto& [server_id, metadata] : snapshot.servers) {
    save_json_file(ws.dir / "metadata" / numbered("server", s), metadata_to_json(metadata));
    ++s;
  }
  save_json_file(ws.dir / "metadata" / "system.json", metadata_to_json(snapshot.system));
  save_json_file(ws.dir / "metadata" / "sketches.json", sketches_to_json(snapshot.sketches));
}

std::optional<Snapshot> load_snapshot(const Workspace& ws) {
  const fs::path system_path = ws.dir / "metadata" / "system.json";
  if (!fs::exists(system_path)) return std::nullopt;
  Snapshot snapshot;
  snapshot.system = system_metadata_from_json(load_json_file(system_path));
  snapshot.as_of = snapshot.system.as_of;
  for (const fs::path& file : sorted_json_files(ws.dir / "indexes")) {
    PodIndexSet index_set = pod_index_set_from_json(load_json_file(file));
    snapshot.indexes.emplace(index_set.pod_url, std::move(index_set));
  }
  for (const fs::path& file : sorted_json_files(ws.dir / "metadata" / "profiles")) {
    MetadataProfile profile = metadata_profile_from_json(load_json_file(file));
    snapshot.profiles.emplace(profile.pod_url, std::move(profile));
  }
  for (const fs::path& file : sorted_json_files(ws.dir / "metadata")) {
    if (file.filename().string().rfind("server_", 0) != 0) continue;
    ServerMetadata metadata = server_metadata_from_json(load_json_file(file));
    snapshot.servers.emplace(metadata.server_id, std::move(metadata));
  }
  const fs::path sketches_path = ws.dir / "metadata" / "sketches.json";
  if (fs::exists(sketches_path)) {
    snapshot.sketches = sketches_from_json(load_json_file(sketches_path));
  }
  return snapshot;
}

OverlayNetwork load_overlay(const Workspace& ws) {
  const fs::path path = ws.dir / "overlay.json";
  if (fs::exists(path)) return overlay_from_json(load_json_file(path));
  return make_overlay(ws.defaults.overlay_nodes);
}

void save_overlay(const Workspace& ws, const OverlayNetwork& network) {
  save_json_file(ws.dir / "overlay.json", to_json(network, ws.corpus.webids));
}

void emit(const json& doc, bool text) {
  if (text) {
    for (const auto& [key, value] : doc.items()) {
      std::cout << key << ": " << value.dump() << '\n';
    }
  } else {
    std::cout << doc.dump(2) << '\n';
  }
}

int cmd_generate(const fs::path& config_path, const fs::path& out_dir, bool text) {
  const WorkbenchConfig config = config_from_json(load_json_file(config_path));
  Workspace ws;
  ws.dir = out_dir;
  ws.defaults = config;
  ws.corpus = generate_corpus(config);
  fs::create_directories(out_dir);
  save_corpus_file(ws);
  save_state(ws);
  std::size_t pods = 0;
  std::size_t resources = 0;
  for (const auto& [sid, server] : ws.corpus.servers) {
    pods += server.pods.size();
    for (const auto& [purl, pod] : server.pods) resources += pod.resources.size();
  }
  emit({{"command", "generate"},
        {"out", out_dir.string()},
        {"servers", ws.corpus.servers.size()},
        {"pods", pods},
        {"resources", resources},
        {"webids", ws.corpus.webids.size()}},
       text);
  return 0;
}

int cmd_index(const fs::path& dir, bool text) {
  Workspace ws = load_workspace(dir);
  std::vector<std::string> indexed;
  std::vector<std::string> skipped;
  fs::remove_all(ws.dir / "indexes");
  fs::remove_all(ws.dir / "metadata" / "profiles");
  std::size_t i = 0;
  for (const auto& [sid, server] : ws.corpus.servers) {
    for (const auto& [pod_url, pod] : server.pods) {
      if (!pod.indexing_enabled) {
        skipped.push_back(pod_url);
        continue;
      }
      const PodIndexSet index_set = build_pod_index_set(pod);
      const MetadataProfile profile = build_metadata_profile(pod, index_set);
      save_json_file(ws.dir / "indexes" / numbered("pod", i), to_json(index_set));
      save_json_file(ws.dir / "metadata" / "profiles" / numbered("pod", i), to_json(profile));
      indexed.push_back(pod_url);
      ++i;
    }
  }
  emit({{"command", "index"}, {"indexed", indexed}, {"skipped", skipped}}, text);
  return 0;
}

int cmd_register(const fs::path& dir, const std::string& server_id, const std::string& pod_url,
                 bool text) {
  Workspace ws = load_workspace(dir);
  OverlayNetwork network = load_overlay(ws);
  std::vector<std::string> servers;
  std::vector<std::string> pods;
  std::vector<std::string> duplicates;

  auto register_one_server = [&](const ServerId& sid) {
    if (register_server(network, sid, metadata_location(sid))) {
      servers.push_back(sid);
    } else {
      duplicates.push_back(sid);
    }
  };
  auto register_one_pod = [&](const Url& url) {
    const Server* host = server_of_pod(ws.corpus, url);
    if (host == nullptr) fail(Errc::unknown_target, "no pod at " + url);
    if (!server_registered(network, host->id)) {
      fail(Errc::server_not_registered,
           "server " + host->id + " must be registered before pod " + url);
    }
    const Pod* pod = find_pod(ws.corpus, url);
    if (pod->registered_for_search) {
      duplicates.push_back(url);
    } else {
      set_pod_registered(ws.corpus, url, true);
      pods.push_back(url);
    }
  };

  if (!server_id.empty()) {
    if (find_server(ws.corpus, server_id) == nullptr) {
      fail(Errc::unknown_target, "no server " + server_id);
    }
    register_one_server(server_id);
  } else if (!pod_url.empty()) {
    register_one_pod(pod_url);
  } else {
    for (const auto& [sid, server] : ws.corpus.servers) register_one_server(sid);
    for (const auto& [sid, server] : ws.corpus.servers) {
      for (const auto& [url, pod] : server.pods) register_one_pod(url);
    }
  }
  save_corpus_file(ws);
  save_state(ws);
  save_overlay(ws, network);
  emit({{"command", "register"},
        {"servers", servers},
        {"pods", pods},
        {"already_registered", duplicates}},
       text);
  return 0;
}

int cmd_refresh(const fs::path& dir, const std::string& mode, bool text) {
  Workspace ws = load_workspace(dir);
  if (!mode.empty()) ws.defaults.default_mode = metadata_mode_from_string(mode);
  const Snapshot snapshot = refresh(ws.corpus, ws.defaults.bloom);
  write_snapshot(ws, snapshot);
  save_state(ws);
  emit({{"command", "refresh"},
        {"as_of", snapshot.as_of},
        {"mode", to_string(ws.defaults.default_mode)},
        {"servers", snapshot.servers.size()},
        {"indexed_pods", snapshot.indexes.size()},
        {"skipped_pods", snapshot.skipped_pods}},
       text);
  return 0;
}

int cmd_search(const fs::path& dir, const std::string& webid, const std::string& query_text,
               const std::string& strategy, bool text) {
  Workspace ws = load_workspace(dir);
  const auto snapshot = load_snapshot(ws);
  if (!snapshot) {
    fail(Errc::stale_metadata, "no metadata in " + dir.string() + "; run index and refresh first");
  }
  if (snapshot->as_of != ws.corpus.event_counter) {
    fail(Errc::stale_metadata, "metadata as_of " + std::to_string(snapshot->as_of) +
                                   " does not match corpus state " +
                                   std::to_string(ws.corpus.event_counter) + "; run refresh");
  }
  const OverlayNetwork network = load_overlay(ws);

  // Simulated identity layer: every known WebId has a session, and the caller
  // is bound to the identity it authenticated as.
  SessionLedger ledger;
  for (const WebId& known : ws.corpus.webids) ledger[known] = known;
  ledger[webid] = webid;

  Query query;
  query.terms = {query_text};
  query.strategy =
      strategy.empty() ? ws.defaults.default_strategy : strategy_from_string(strategy);
  query.mode = ws.defaults.default_mode;
  const auto results = search_as(ws.corpus, *snapshot, network, webid, ledger, query);
  if (text) {
    for (const RankedResult& r : results) {
      std::cout << r.resource_url << "  score=" << r.score << "  server=" << r.server_id
                << "  pod=" << r.pod_url << '\n';
    }
  } else {
    std::cout << results_to_json(results).dump(2) << '\n';
  }
  return 0;
}

int cmd_audit(const fs::path& dir, const fs::path& out, bool inject_faults, bool text) {
  Workspace ws = load_workspace(dir);
  AuditOptions options;
  options.seed = ws.defaults.seed;
  options.bloom = ws.defaults.bloom;
  options.overlay_nodes = ws.defaults.overlay_nodes;
  options.inject_faults = inject_faults;
  const AuditReport report = run_audit(ws.corpus, options);
  save_json_file(out, to_json(report));
  if (text) {
    std::cout << to_text(report);
  } else {
    std::cout << to_json(report).dump(2) << '\n';
  }
  return audit_passed(report) ? 0 : 2;
}

int cmd_bench(const fs::path& config_path, bool text) {
  const WorkbenchConfig config = config_from_json(load_json_file(config_path));
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point start) {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  auto t0 = clock::now();
  Corpus corpus = generate_corpus(config);
  const double generate_ms = ms_since(t0);

  OverlayNetwork network = make_overlay(config.overlay_nodes);
  for (const auto& [sid, server] : corpus.servers) {
    register_server(network, sid, metadata_location(sid));
  }

  t0 = clock::now();
  const Snapshot snapshot = refresh(corpus, config.bloom);
  const double refresh_ms = ms_since(t0);

  std::size_t total_pods = 0;
  for (const auto& [sid, server] : corpus.servers) total_pods += server.pods.size();

  // A handful of representative queries, with touch counters from the last
  // one to show how far source selection narrows the fan-out.
  const auto vocab = vocabulary(config.scale.vocabulary);
  QueryTrace trace;
  double search_ms = 0.0;
  std::size_t queries = 0;
  if (!vocab.empty() && !corpus.webids.empty()) {
    Rng rng(config.seed);
    for (int i = 0; i < 5; ++i) {
      Query query;
      query.webid = *corpus.webids.begin();
      query.terms = {vocab[rng.below(vocab.size())]};
      query.strategy = config.default_strategy;
      query.mode = config.default_mode;
      trace = QueryTrace{};
      t0 = clock::now();
      search(corpus, snapshot, network, query, &trace);
      search_ms += ms_since(t0);
      ++queries;
    }
  }
  emit({{"command", "bench"},
        {"scale",
         {{"servers", config.scale.servers},
          {"pods_per_server", config.scale.pods_per_server},
          {"resources_per_pod", config.scale.resources_per_pod},
          {"webids", config.scale.webids},
          {"vocabulary", config.scale.vocabulary}}},
        {"timings_ms",
         {{"generate", generate_ms},
          {"refresh", refresh_ms},
          {"search_avg", queries == 0 ? 0.0 : search_ms / static_cast<double>(queries)}}},
        {"last_query_touch",
         {{"servers_contacted", trace.servers_contacted.size()},
          {"pods_read", trace.pod_index_reads},
          {"total_pods", total_pods}}}},
       text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic keyword-search simulator over access-controlled data stores"};
  app.require_subcommand(1);
  bool text = false;
  app.add_flag("--text", text, "human-readable output instead of JSON");

  std::string config_path;
  std::string out_dir;
  auto* generate = app.add_subcommand("generate", "generate a synthetic corpus");
  generate->add_option("--config", config_path, "config file")->required();
  generate->add_option("--out", out_dir, "output directory")->required();

  std::string corpus_dir;
  auto* index = app.add_subcommand("index", "build pod indexes and metadata profiles");
  index->add_option("--corpus", corpus_dir, "corpus directory")->required();

  std::string reg_server;
  std::string reg_pod;
  auto* reg = app.add_subcommand("register", "register servers and pods for search");
  reg->add_option("--corpus", corpus_dir, "corpus directory")->required();
  reg->add_option("--server", reg_server, "register a single server");
  reg->add_option("--pod", reg_pod, "register a single pod");

  std::string mode;
  auto* refresh_cmd = app.add_subcommand("refresh", "rebuild all metadata tiers and sketches");
  refresh_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  refresh_cmd->add_option("--mode", mode, "metadata mode: exact|bloom");

  std::string webid;
  std::string query_text;
  std::string strategy;
  auto* search_cmd = app.add_subcommand("search", "run an authorized keyword query");
  search_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  search_cmd->add_option("--webid", webid, "querying identity")->required();
  search_cmd->add_option("--query", query_text, "keywords")->required();
  search_cmd->add_option("--strategy", strategy, "direct|propagate");

  std::string report_path = "report.json";
  bool inject_faults = false;
  auto* audit = app.add_subcommand("audit", "verify the privacy guarantees");
  audit->add_option("--corpus", corpus_dir, "corpus directory")->required();
  audit->add_option("--out", report_path, "report file");
  audit->add_flag("--inject-faults", inject_faults, "plant violations and require detection");

  auto* bench = app.add_subcommand("bench", "time the pipeline stages");
  bench->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(config_path, out_dir, text);
    if (*index) return cmd_index(corpus_dir, text);
    if (*reg) {
      if (!reg_server.empty() && !reg_pod.empty()) {
        podsearch::fail(podsearch::Errc::invalid_params, "--server and --pod are exclusive");
      }
      return cmd_register(corpus_dir, reg_server, reg_pod, text);
    }
    if (*refresh_cmd) return cmd_refresh(corpus_dir, mode, text);
    if (*search_cmd) return cmd_search(corpus_dir, webid, query_text, strategy, text);
    if (*audit) return cmd_audit(corpus_dir, report_path, inject_faults, text);
    if (*bench) return cmd_bench(config_path, text);
  } catch (const podsearch::Error& error) {
    std::cerr << json{{"error", podsearch::to_string(error.code())}, {"message", error.what()}}.dump()
              << '\n';
    return 1;
  } catch (const std::exception& error) {
    std::cerr << json{{"error", "internal"}, {"message", error.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
