// txg: command-line front end for the transaction-graph pipeline.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "txg/amount.hpp"
#include "txg/csv.hpp"
#include "txg/error.hpp"
#include "txg/graph_io.hpp"
#include "txg/pipeline.hpp"
#include "txg/synth.hpp"

namespace {

using namespace txg;
namespace fs = std::filesystem;

struct Args {
  std::string config;
  std::string input = "-";
  std::string output;
  std::string graph;
  std::string coloring;
  std::string contracted;
  std::string clusters;
  std::string labels;
  std::string truth;
  std::string buckets;
  std::string on_error;
  std::uint64_t start_block = 0;
  bool polkadot = false;
  bool track_blocks = false;
  bool verify = false;
  bool directional = false;
  bool print_example = false;
  bool quiet = false;
  bool verbose = false;
  DetectionParams detection;
};

// Stage parameters come from --config when given; explicit flags win.
PipelineConfig base_config(const Args& a) {
  return a.config.empty() ? PipelineConfig{} : load_pipeline_config(a.config);
}

bool given(const CLI::App* app, const char* name) {
  return app->count(name) > 0;
}

ErrorPolicy parse_policy(const std::string& s) {
  if (s == "fail") return ErrorPolicy::kFailFast;
  if (s == "skip") return ErrorPolicy::kSkip;
  throw Error(ErrorKind::kConfig, "--on-error must be fail or skip");
}

void print_summary(const IngestSummary& s) {
  log::info("lines " + std::to_string(s.lines) + ", parsed " + std::to_string(s.parsed) +
            ", kept " + std::to_string(s.kept) + ", dropped " + std::to_string(s.dropped) +
            " (below start " + std::to_string(s.below_start) + ", zero amount " +
            std::to_string(s.zero_amount) + "), errors " + std::to_string(s.errors));
}

void print_stats(const GraphStats& s) {
  std::cout << "order              " << s.order << '\n'
            << "aggregated_size    " << s.aggregated_size << '\n'
            << "transaction_count  " << s.transaction_count << '\n'
            << "total_flux_planck  " << to_string(s.total_flux) << '\n'
            << "total_flux_dot     " << format_dot(s.total_flux, 2, true) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aggregated transaction graphs, exchange detection and colour contraction"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Args a;
  app.add_flag("-q,--quiet", a.quiet, "Only log errors");
  app.add_flag("-v,--verbose", a.verbose, "Debug logging");

  auto add_config = [&a](CLI::App* sub, const char* what) {
    sub->add_option("--config", a.config, what)->check(CLI::ExistingFile);
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "Filter extrinsic records down to transfers");
  add_config(ingest_cmd, "Pipeline config supplying ingest parameters");
  ingest_cmd->add_option("--input", a.input, "Extrinsic records, JSON Lines ('-' for stdin)");
  ingest_cmd->add_option("--output", a.output, "Transfer records ('-' for stdout)")
      ->default_val("-");
  ingest_cmd->add_option("--start-block", a.start_block, "Drop records below this block");
  ingest_cmd->add_flag("--polkadot", a.polkadot,
                       "Use the Polkadot transfer activation block as start block");
  ingest_cmd->add_option("--on-error", a.on_error, "fail or skip")
      ->check(CLI::IsMember({"fail", "skip"}));

  auto* build_cmd = app.add_subcommand("build", "Aggregate transfers into a graph directory");
  add_config(build_cmd, "Pipeline config supplying graph options");
  build_cmd->add_option("--input", a.input, "Transfer records")->required();
  build_cmd->add_option("--output", a.output, "Graph directory")->required();
  build_cmd->add_flag("--track-blocks", a.track_blocks, "Record first/last block per edge");

  auto* stats_cmd = app.add_subcommand("stats", "Print graph statistics");
  add_config(stats_cmd, "Accepted for uniformity; unused");
  stats_cmd->add_option("--graph", a.graph, "Graph directory")->required();

  auto* detect_cmd = app.add_subcommand("detect", "Find exchange clusters");
  add_config(detect_cmd, "Pipeline config supplying detection parameters");
  detect_cmd->add_option("--graph", a.graph, "Graph directory")->required();
  detect_cmd->add_option("--output", a.output, "Cluster file")->required();
  detect_cmd->add_option("--labels", a.labels, "address,label file")->check(CLI::ExistingFile);
  detect_cmd->add_option("--top-k", a.detection.top_k, "Central nodes examined");
  detect_cmd->add_option("--threshold", a.detection.deposit_neighbor_threshold,
                         "Deposit share a hub must exceed");
  detect_cmd->add_option("--min-neighbors", a.detection.min_neighbors,
                         "Smallest neighbourhood considered");
  detect_cmd->add_option("--forward-fraction", a.detection.deposit_forward_fraction,
                         "Share of a deposit's out-flux sent to the hub");
  detect_cmd->add_option("--min-inflows", a.detection.min_deposit_inflows,
                         "Inflows a deposit address needs");

  auto* contract_cmd = app.add_subcommand("contract", "Contract monochromatic components");
  add_config(contract_cmd, "Pipeline config supplying the verify flag");
  contract_cmd->add_option("--graph", a.graph, "Graph directory")->required();
  contract_cmd->add_option("--coloring", a.coloring, "Cluster file or address,color file")
      ->required()
      ->check(CLI::ExistingFile);
  contract_cmd->add_option("--output", a.output, "Contracted graph directory")->required();
  contract_cmd->add_flag("--verify", a.verify, "Compare against the reference implementation");

  auto* analyze_cmd = app.add_subcommand("analyze", "Report on a contracted graph");
  add_config(analyze_cmd, "Pipeline config supplying analytics options");
  analyze_cmd->add_option("--contracted", a.contracted, "Contracted graph directory")
      ->required();
  analyze_cmd->add_option("--clusters", a.clusters, "Cluster file")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--output", a.output, "Report directory")->required();
  analyze_cmd->add_option("--buckets", a.buckets, "Size bucket bounds, e.g. 1,2,3,10,100,421");
  analyze_cmd->add_flag("--directional", a.directional,
                        "Split user/exchange traffic by direction");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic ledger");
  synth_cmd->add_option("--config", a.config, "Scenario file (JSON)")->check(CLI::ExistingFile);
  synth_cmd->add_option("--output", a.output, "Extrinsic records ('-' for stdout)");
  synth_cmd->add_option("--truth", a.truth, "Ground-truth directory");
  synth_cmd->add_flag("--print-example", a.print_example,
                      "Print the reference scenario and exit");

  auto* run_cmd = app.add_subcommand("run", "Run every stage");
  run_cmd->add_option("--config", a.config, "Pipeline config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_flag("--verify", a.verify, "Force oracle verification");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  log::set_level(a.quiet ? log::Level::kQuiet
                         : a.verbose ? log::Level::kDebug : log::Level::kInfo);

  try {
    if (*ingest_cmd) {
      PipelineConfig c = base_config(a);
      if (given(ingest_cmd, "--start-block")) c.ingest.start_block = a.start_block;
      if (a.polkadot) c.ingest.start_block = kPolkadotTransferStartBlock;
      if (!a.on_error.empty()) c.ingest.on_error = parse_policy(a.on_error);
      print_summary(run_ingest(a.input, a.output, c.ingest));
    } else if (*build_cmd) {
      PipelineConfig c = base_config(a);
      if (a.track_blocks) c.graph.track_block_range = true;
      const AggregatedGraph g = run_build(a.input, a.output, c.graph);
      const GraphStats s = graph_stats(g);
      log::info("graph: " + std::to_string(s.order) + " nodes, " +
                std::to_string(s.aggregated_size) + " edges, " +
                std::to_string(s.transaction_count) + " transfers");
    } else if (*stats_cmd) {
      print_stats(graph_stats(load_graph(a.graph)));
    } else if (*detect_cmd) {
      PipelineConfig c = base_config(a);
      DetectionParams p = c.detection;
      if (given(detect_cmd, "--top-k")) p.top_k = a.detection.top_k;
      if (given(detect_cmd, "--threshold")) {
        p.deposit_neighbor_threshold = a.detection.deposit_neighbor_threshold;
      }
      if (given(detect_cmd, "--min-neighbors")) p.min_neighbors = a.detection.min_neighbors;
      if (given(detect_cmd, "--forward-fraction")) {
        p.deposit_forward_fraction = a.detection.deposit_forward_fraction;
      }
      if (given(detect_cmd, "--min-inflows")) {
        p.min_deposit_inflows = a.detection.min_deposit_inflows;
      }
      p.validate();
      std::optional<fs::path> labels = c.labels;
      if (!a.labels.empty()) labels = a.labels;
      const auto clusters = run_detect(a.graph, p, labels, a.output);
      for (const auto& cl : clusters) {
        log::info("exchange " + std::to_string(cl.cluster_id) + " " + cl.label + ": " +
                  std::to_string(cl.main_addresses.size()) + " main, " +
                  std::to_string(cl.deposit_addresses.size()) + " deposit");
      }
      if (clusters.empty()) log::info("no exchanges found");
    } else if (*contract_cmd) {
      PipelineConfig c = base_config(a);
      const ContractOutcome o =
          run_contract(a.graph, a.coloring, a.output, a.verify || c.verify);
      log::info("contracted to " + std::to_string(o.clusters) + " clusters, " +
                std::to_string(o.edges) + " edges in " + std::to_string(o.passes) +
                " passes" + (o.verified ? "; matches reference" : ""));
    } else if (*analyze_cmd) {
      PipelineConfig c = base_config(a);
      if (!a.buckets.empty()) c.buckets = parse_bucket_bounds(a.buckets);
      if (a.directional) c.report.directional_user_exchange = true;
      std::optional<fs::path> clusters;
      if (!a.clusters.empty()) clusters = a.clusters;
      const NetworkReport r = run_analyze(a.contracted, clusters, a.output, c.buckets, c.report);
      std::cout << report_text(r, c.report);
    } else if (*synth_cmd) {
      if (a.print_example) {
        std::cout << scenario_to_json(reference_scenario(1)) << '\n';
        return 0;
      }
      if (a.config.empty() || a.output.empty()) {
        throw Error(ErrorKind::kConfig, "synth needs --config and --output");
      }
      const ScenarioConfig scenario = load_scenario(a.config);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (a.output != "-") {
        file = csv::open_output(a.output);
        out = &file;
      }
      const GroundTruth truth =
          generate(scenario, [out](const ExtrinsicRecord& r) { *out << to_line(r) << '\n'; });
      out->flush();
      if (!*out) throw Error(ErrorKind::kIo, "write failed: " + a.output);
      if (!a.truth.empty()) save_truth(truth, a.truth);
      log::info("generated " + std::to_string(truth.records) + " records, " +
                std::to_string(truth.transfers) + " transfers");
    } else if (*run_cmd) {
      PipelineConfig c = load_pipeline_config(a.config);
      if (a.verify) c.verify = true;
      if (a.quiet) c.log_level = log::Level::kQuiet;
      if (a.verbose) c.log_level = log::Level::kDebug;
      const NetworkReport r = run_pipeline(c);
      std::cout << report_text(r, c.report);
    }
  } catch (const Error& e) {
    std::cerr << "txg: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "txg: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
