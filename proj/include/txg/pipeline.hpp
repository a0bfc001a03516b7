#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "txg/analytics.hpp"
#include "txg/detect.hpp"
#include "txg/graph.hpp"
#include "txg/ingest.hpp"

namespace txg {

inline constexpr const char* kVersion = "0.1.0";

namespace log {
enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };
void set_level(Level level);
Level level();
void info(const std::string& message);
void debug(const std::string& message);
}  // namespace log

struct PipelineConfig {
  /// Extrinsic records (JSON Lines). Ignored when `scenario` is set.
  std::filesystem::path input;
  /// When set, records are generated from this scenario file first.
  std::optional<std::filesystem::path> scenario;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> labels;

  IngestOptions ingest;
  GraphBuildOptions graph;
  bool detect = true;
  DetectionParams detection;
  bool verify = false;
  std::vector<std::uint64_t> buckets{std::begin(kDefaultBucketBounds),
                                     std::end(kDefaultBucketBounds)};
  ReportOptions report;
  log::Level log_level = log::Level::kInfo;
};

/// Reads a JSON pipeline config; relative paths resolve against the file's
/// directory. Throws Error(kConfig).
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const std::string& text,
                                         const std::filesystem::path& base = {});

// Individual stages. Each reads and writes the documented file artifacts.

IngestSummary run_ingest(const std::filesystem::path& input,  // "-" for stdin
                         const std::filesystem::path& output,  // "-" for stdout
                         const IngestOptions& options);

AggregatedGraph run_build(const std::filesystem::path& transfers,
                          const std::filesystem::path& graph_dir,
                          const GraphBuildOptions& options = {});

std::vector<ExchangeCluster> run_detect(const std::filesystem::path& graph_dir,
                                        const DetectionParams& params,
                                        const std::optional<std::filesystem::path>& labels,
                                        const std::filesystem::path& output);

struct ContractOutcome {
  std::size_t clusters = 0;
  std::size_t edges = 0;
  std::size_t passes = 0;
  bool verified = false;  // oracle ran and matched
  ConservationCheck conservation;
};

/// `coloring` is a cluster file or an address,color file. Throws
/// Error(kConsistency) if conservation fails or the oracle disagrees.
ContractOutcome run_contract(const std::filesystem::path& graph_dir,
                             const std::filesystem::path& coloring,
                             const std::filesystem::path& output_dir, bool verify);

NetworkReport run_analyze(const std::filesystem::path& contracted_dir,
                          const std::optional<std::filesystem::path>& clusters,
                          const std::filesystem::path& output_dir,
                          const std::vector<std::uint64_t>& buckets,
                          const ReportOptions& options = {});

/// Runs every stage in order under output_dir and writes manifest.json.
NetworkReport run_pipeline(const PipelineConfig& config);

}  // namespace txg
