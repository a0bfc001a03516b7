#include "txg/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "txg/contract.hpp"
#include "txg/contract_io.hpp"
#include "txg/csv.hpp"
#include "txg/error.hpp"
#include "txg/graph_io.hpp"
#include "txg/synth.hpp"

namespace txg {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace log {
namespace {
Level g_level = Level::kInfo;
}
void set_level(Level level) { g_level = level; }
Level level() { return g_level; }
void info(const std::string& message) {
  if (g_level >= Level::kInfo) std::cerr << "[txg] " << message << '\n';
}
void debug(const std::string& message) {
  if (g_level >= Level::kDebug) std::cerr << "[txg:debug] " << message << '\n';
}
}  // namespace log

PipelineConfig pipeline_config_from_json(const std::string& text, const fs::path& base) {
  PipelineConfig c;
  auto resolve = [&base](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
  };
  try {
    const auto j = ordered_json::parse(text);
    if (j.contains("input")) c.input = resolve(j.at("input").get<std::string>());
    if (j.contains("scenario")) c.scenario = resolve(j.at("scenario").get<std::string>());
    if (j.contains("labels")) c.labels = resolve(j.at("labels").get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
    if (j.contains("log_level")) {
      const auto lvl = j.at("log_level").get<std::string>();
      if (lvl == "quiet") c.log_level = log::Level::kQuiet;
      else if (lvl == "info") c.log_level = log::Level::kInfo;
      else if (lvl == "debug") c.log_level = log::Level::kDebug;
      else throw Error(ErrorKind::kConfig, "log_level must be quiet, info or debug");
    }
    if (j.contains("ingest")) {
      const auto& s = j.at("ingest");
      if (s.contains("start_block")) c.ingest.start_block = s.at("start_block").get<std::uint64_t>();
      if (s.contains("on_error")) {
        const auto policy = s.at("on_error").get<std::string>();
        if (policy == "fail") c.ingest.on_error = ErrorPolicy::kFailFast;
        else if (policy == "skip") c.ingest.on_error = ErrorPolicy::kSkip;
        else throw Error(ErrorKind::kConfig, "ingest.on_error must be fail or skip");
      }
    }
    if (j.contains("graph")) {
      const auto& s = j.at("graph");
      if (s.contains("track_block_range")) {
        c.graph.track_block_range = s.at("track_block_range").get<bool>();
      }
    }
    if (j.contains("detection")) {
      const auto& s = j.at("detection");
      if (s.contains("enabled")) c.detect = s.at("enabled").get<bool>();
      if (s.contains("top_k")) c.detection.top_k = s.at("top_k").get<std::size_t>();
      if (s.contains("threshold")) {
        c.detection.deposit_neighbor_threshold = s.at("threshold").get<double>();
      }
      if (s.contains("min_neighbors")) {
        c.detection.min_neighbors = s.at("min_neighbors").get<std::size_t>();
      }
      if (s.contains("deposit_forward_fraction")) {
        c.detection.deposit_forward_fraction = s.at("deposit_forward_fraction").get<double>();
      }
      if (s.contains("min_deposit_inflows")) {
        c.detection.min_deposit_inflows = s.at("min_deposit_inflows").get<std::size_t>();
      }
    }
    if (j.contains("contraction")) {
      const auto& s = j.at("contraction");
      if (s.contains("verify")) c.verify = s.at("verify").get<bool>();
    }
    if (j.contains("analytics")) {
      const auto& s = j.at("analytics");
      if (s.contains("buckets")) c.buckets = s.at("buckets").get<std::vector<std::uint64_t>>();
      if (s.contains("directional")) {
        c.report.directional_user_exchange = s.at("directional").get<bool>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("pipeline config: ") + e.what());
  }
  c.detection.validate();
  for (std::size_t i = 0; i < c.buckets.size(); ++i) {
    if (c.buckets[i] == 0 || (i > 0 && c.buckets[i] <= c.buckets[i - 1])) {
      throw Error(ErrorKind::kConfig, "analytics.buckets must be positive and increasing");
    }
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return pipeline_config_from_json(text, path.parent_path());
}

IngestSummary run_ingest(const fs::path& input, const fs::path& output,
                         const IngestOptions& options) {
  std::ifstream file_in;
  std::istream* in = &std::cin;
  if (input != "-") {
    file_in.open(input);
    if (!file_in) throw Error(ErrorKind::kIo, "cannot open " + input.string());
    in = &file_in;
  }
  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (output != "-") {
    file_out = csv::open_output(output);
    out = &file_out;
  }
  const IngestSummary summary = ingest(*in, options, [out](const TransferRecord& t) {
    *out << to_line(t) << '\n';
  });
  out->flush();
  if (!*out) throw Error(ErrorKind::kIo, "write failed: " + output.string());
  return summary;
}

AggregatedGraph run_build(const fs::path& transfers, const fs::path& graph_dir,
                          const GraphBuildOptions& options) {
  std::ifstream in(transfers);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + transfers.string());
  GraphBuilder builder(options);
  // Transfers files are ingest output; re-filtering them is a no-op.
  ingest(in, IngestOptions{}, [&builder](const TransferRecord& t) { builder.add(t); });
  AggregatedGraph graph = builder.finish();
  save_graph(graph, graph_dir);
  return graph;
}

std::vector<ExchangeCluster> run_detect(const fs::path& graph_dir,
                                        const DetectionParams& params,
                                        const std::optional<fs::path>& labels,
                                        const fs::path& output) {
  const AggregatedGraph graph = load_graph(graph_dir);
  const LabelMap label_map = labels ? load_labels(*labels) : LabelMap{};
  auto clusters = detect_exchanges(graph, params, label_map);
  save_clusters(clusters, output);
  return clusters;
}

ContractOutcome run_contract(const fs::path& graph_dir, const fs::path& coloring_path,
                             const fs::path& output_dir, bool verify) {
  const AggregatedGraph graph = load_graph(graph_dir);
  const Coloring coloring = load_coloring(graph, coloring_path);
  ColorLabels labels;
  {
    std::ifstream probe(coloring_path);
    std::string header;
    if (std::getline(probe, header) && header.rfind("cluster_id,", 0) == 0) {
      labels = color_labels(load_clusters(coloring_path));
    }
  }
  const Contraction c = contract(graph, coloring);
  ContractOutcome outcome;
  outcome.clusters = c.graph.order();
  outcome.edges = c.graph.size();
  outcome.passes = c.passes;
  outcome.conservation = check_conservation(c.graph, graph.order(),
                                            graph.transaction_count(), graph.total_flux());
  if (!outcome.conservation.ok() || !verify_contraction(c.graph)) {
    throw Error(ErrorKind::kConsistency,
                std::string("contraction check failed:") +
                    (outcome.conservation.nodes ? "" : " nodes") +
                    (outcome.conservation.transactions ? "" : " transactions") +
                    (outcome.conservation.flux ? "" : " flux") +
                    (verify_contraction(c.graph) ? "" : " proper-coloring"));
  }
  if (verify) {
    const Contraction reference = oracle_contract(graph, coloring);
    if (canonical_form(c.graph, c.assignment) !=
        canonical_form(reference.graph, reference.assignment)) {
      throw Error(ErrorKind::kConsistency, "contraction differs from the oracle");
    }
    outcome.verified = true;
  }
  save_contraction(c, labels, graph_stats(graph), output_dir);
  return outcome;
}

NetworkReport run_analyze(const fs::path& contracted_dir,
                          const std::optional<fs::path>& clusters_path,
                          const fs::path& output_dir,
                          const std::vector<std::uint64_t>& buckets,
                          const ReportOptions& options) {
  const ContractedArtifacts art = load_contraction(contracted_dir);
  const std::vector<ExchangeCluster> clusters =
      clusters_path ? load_clusters(*clusters_path) : std::vector<ExchangeCluster>{};
  const ContractedGraph& g = art.contraction.graph;
  NetworkReport report = build_report(
      art.source_stats, g, clusters, flux_partition(g), exchange_table(g, clusters),
      cluster_size_histogram(art.contraction.assignment, g, buckets));
  ColorLabels labels = art.labels;
  for (const auto& [color, label] : color_labels(clusters)) labels[color] = label;
  save_report(report, g, labels, output_dir, options);
  return report;
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(ordered_json& timings) : timings_(timings) {}

  template <typename Fn>
  auto run(const char* stage, Fn&& fn) {
    log::info(std::string("stage ") + stage);
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto result = fn();
        record(stage, start);
        return result;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("stage ") + stage + ": " + e.what());
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timings_[stage] = elapsed.count();
    log::debug(std::string(stage) + " took " + std::to_string(elapsed.count()) + " s");
  }

  ordered_json& timings_;
};

void validate_paths(const PipelineConfig& c) {
  auto need = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) {
      throw Error(ErrorKind::kConfig, std::string(what) + " not found: " + p.string());
    }
  };
  if (c.scenario) {
    need(*c.scenario, "scenario");
  } else {
    if (c.input.empty()) throw Error(ErrorKind::kConfig, "no input or scenario given");
    need(c.input, "input");
  }
  if (c.labels) need(*c.labels, "labels");
  if (c.output_dir.empty()) throw Error(ErrorKind::kConfig, "output_dir is required");
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "cannot create " + c.output_dir.string() + ": " + ec.message());
  }
}

}  // namespace

NetworkReport run_pipeline(const PipelineConfig& config) {
  log::set_level(config.log_level);
  validate_paths(config);
  const fs::path out = config.output_dir;
  ordered_json timings = ordered_json::object();
  StageTimer timer(timings);
  ordered_json manifest;
  manifest["version"] = kVersion;

  fs::path records = config.input;
  if (config.scenario) {
    records = out / "records.jsonl";
    timer.run("synth", [&] {
      const ScenarioConfig scenario = load_scenario(*config.scenario);
      auto file = csv::open_output(records);
      const GroundTruth truth = generate(scenario, [&file](const ExtrinsicRecord& r) {
        file << to_line(r) << '\n';
      });
      file.close();
      save_truth(truth, out / "truth");
      manifest["synth"] = {{"records", truth.records}, {"transfers", truth.transfers}};
    });
  }

  const IngestSummary summary = timer.run("ingest", [&] {
    return run_ingest(records, out / "transfers.jsonl", config.ingest);
  });
  manifest["ingest"] = {{"start_block", config.ingest.start_block},
                        {"on_error", config.ingest.on_error == ErrorPolicy::kSkip ? "skip" : "fail"},
                        {"lines", summary.lines},
                        {"parsed", summary.parsed},
                        {"kept", summary.kept},
                        {"dropped", summary.dropped},
                        {"below_start", summary.below_start},
                        {"zero_amount", summary.zero_amount},
                        {"errors", summary.errors}};

  const AggregatedGraph graph = timer.run("build", [&] {
    return run_build(out / "transfers.jsonl", out / "graph", config.graph);
  });
  const GraphStats stats = graph_stats(graph);
  manifest["graph"] = {{"order", stats.order},
                       {"aggregated_size", stats.aggregated_size},
                       {"transaction_count", stats.transaction_count},
                       {"total_flux_planck", to_string(stats.total_flux)}};
  if (stats.transaction_count != summary.kept) {
    throw Error(ErrorKind::kConsistency, "graph transaction count differs from ingest count");
  }

  timer.run("detect", [&] {
    if (config.detect) {
      const auto clusters = run_detect(out / "graph", config.detection, config.labels,
                                       out / "clusters.csv");
      manifest["detection"] = {{"enabled", true},
                               {"top_k", config.detection.top_k},
                               {"threshold", config.detection.deposit_neighbor_threshold},
                               {"min_neighbors", config.detection.min_neighbors},
                               {"deposit_forward_fraction",
                                config.detection.deposit_forward_fraction},
                               {"min_deposit_inflows", config.detection.min_deposit_inflows},
                               {"clusters", clusters.size()}};
    } else {
      save_clusters({}, out / "clusters.csv");
      manifest["detection"] = {{"enabled", false}, {"clusters", 0}};
    }
  });

  const ContractOutcome outcome = timer.run("contract", [&] {
    return run_contract(out / "graph", out / "clusters.csv", out / "contracted", config.verify);
  });
  manifest["contraction"] = {{"clusters", outcome.clusters},
                             {"edges", outcome.edges},
                             {"passes", outcome.passes},
                             {"verify", config.verify},
                             {"oracle_match", outcome.verified},
                             {"conservation",
                              {{"nodes", outcome.conservation.nodes},
                               {"transactions", outcome.conservation.transactions},
                               {"flux", outcome.conservation.flux}}}};

  NetworkReport report = timer.run("analyze", [&] {
    return run_analyze(out / "contracted", out / "clusters.csv", out / "report",
                       config.buckets, config.report);
  });
  manifest["analytics"] = {{"buckets", config.buckets},
                           {"directional", config.report.directional_user_exchange}};
  manifest["timings_s"] = timings;
  csv::open_output(out / "manifest.json") << manifest.dump(2) << '\n';
  return report;
}

}  // namespace txg
