#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "test_util.hpp"
#include "txg/csv.hpp"
#include "txg/error.hpp"
#include "txg/pipeline.hpp"
#include "txg/synth.hpp"

using namespace txg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { csv::open_output(p) << text; }

fs::path scenario_file(const fs::path& dir, const ScenarioConfig& cfg) {
  write(dir / "scenario.json", scenario_to_json(cfg));
  return dir / "scenario.json";
}

PipelineConfig quiet_config(const fs::path& dir) {
  PipelineConfig c;
  c.scenario = dir / "scenario.json";
  c.output_dir = dir / "out";
  c.log_level = log::Level::kQuiet;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TXG_BINARY) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, MatchesGroundTruth) {
  const auto dir = test::scratch("pipeline-truth");
  const ScenarioConfig cfg = reference_scenario(21, 0.3);
  scenario_file(dir, cfg);
  PipelineConfig pc = quiet_config(dir);
  pc.verify = true;
  const NetworkReport r = run_pipeline(pc);

  GroundTruth truth = generate(cfg, [](const ExtrinsicRecord&) {});
  // The report keeps both user/exchange directions even when not printed.
  EXPECT_EQ(r.partition, truth.categories);
  EXPECT_EQ(r.before.transaction_count, truth.transfers);
  EXPECT_EQ(r.before.order, truth.transacting_accounts);
  EXPECT_EQ(r.exchange_count, truth.exchanges.size());

  // Exchange rows against the generator's pairwise matrix.
  for (const auto& row : r.exchanges.rows) {
    std::size_t e = 0;
    std::uint64_t nodes = 0;
    for (; e < truth.exchanges.size(); ++e) {
      nodes = truth.exchanges[e].mains.size() + truth.exchanges[e].deposits.size();
      if (nodes == row.node_count) break;
    }
    ASSERT_LT(e, truth.exchanges.size());
    CategoryTotals expect;
    for (std::size_t o = 0; o < truth.exchanges.size(); ++o) {
      expect.tx_count += truth.inter_exchange[e][o].tx_count + truth.inter_exchange[o][e].tx_count;
      expect.flux += truth.inter_exchange[e][o].flux + truth.inter_exchange[o][e].flux;
    }
    EXPECT_EQ(row.inter_exchange, expect) << row.label;
    EXPECT_EQ(row.main_address_count, truth.exchanges[e].mains.size());
  }

  // Users histogram against the generator's cluster sizes.
  std::vector<std::uint64_t> sizes;
  for (const auto& [s, n] : r.histogram.size_counts) sizes.insert(sizes.end(), n, s);
  std::sort(sizes.rbegin(), sizes.rend());
  EXPECT_EQ(sizes, truth.user_cluster_sizes);

  for (const char* f : {"records.jsonl", "transfers.jsonl", "graph/nodes.csv", "graph/edges.csv",
                        "clusters.csv", "contracted/nodes.csv", "contracted/assignment.csv",
                        "report/report.json", "report/report.txt", "manifest.json",
                        "truth/truth.json"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  const auto manifest = slurp(dir / "out" / "manifest.json");
  EXPECT_NE(manifest.find("\"oracle_match\": true"), std::string::npos);
}

TEST(Pipeline, DetectionDisabled) {
  const auto dir = test::scratch("pipeline-nodetect");
  scenario_file(dir, reference_scenario(2, 0.1));
  PipelineConfig pc = quiet_config(dir);
  pc.detect = false;
  const auto r = run_pipeline(pc);
  EXPECT_EQ(r.exchange_count, 0u);
  EXPECT_EQ(r.exchange_nodes, 0u);
  EXPECT_EQ(r.user_nodes, r.before.order);
  EXPECT_EQ(r.partition.intra_user.tx_count, r.before.transaction_count);
}

TEST(Pipeline, RerunIsByteIdentical) {
  const auto dir = test::scratch("pipeline-rerun");
  scenario_file(dir, reference_scenario(8, 0.1));
  run_pipeline(quiet_config(dir));
  const auto first = slurp(dir / "out" / "report" / "report.json");
  const auto first_text = slurp(dir / "out" / "report" / "report.txt");
  const auto first_graph = slurp(dir / "out" / "contracted" / "edges.csv");
  run_pipeline(quiet_config(dir));
  EXPECT_EQ(slurp(dir / "out" / "report" / "report.json"), first);
  EXPECT_EQ(slurp(dir / "out" / "report" / "report.txt"), first_text);
  EXPECT_EQ(slurp(dir / "out" / "contracted" / "edges.csv"), first_graph);
}

TEST(Pipeline, StagesComposeLikeTheFullRun) {
  const auto dir = test::scratch("pipeline-stages");
  const ScenarioConfig cfg = reference_scenario(4, 0.1);
  {
    auto out = csv::open_output(dir / "records.jsonl");
    generate(cfg, [&out](const ExtrinsicRecord& r) { out << to_line(r) << '\n'; });
  }
  log::set_level(log::Level::kQuiet);
  const auto summary = run_ingest(dir / "records.jsonl", dir / "transfers.jsonl", {});
  const auto g = run_build(dir / "transfers.jsonl", dir / "graph");
  EXPECT_EQ(g.transaction_count(), summary.kept);
  run_detect(dir / "graph", {}, std::nullopt, dir / "clusters.csv");
  const auto outcome = run_contract(dir / "graph", dir / "clusters.csv", dir / "contracted", true);
  EXPECT_TRUE(outcome.verified);
  EXPECT_TRUE(outcome.conservation.ok());
  const auto staged = run_analyze(dir / "contracted", dir / "clusters.csv", dir / "report",
                                  std::vector<std::uint64_t>(std::begin(kDefaultBucketBounds),
                                                             std::end(kDefaultBucketBounds)));

  PipelineConfig pc;
  pc.input = dir / "records.jsonl";
  pc.output_dir = dir / "full";
  pc.log_level = log::Level::kQuiet;
  run_pipeline(pc);
  EXPECT_EQ(slurp(dir / "report" / "report.json"), slurp(dir / "full" / "report" / "report.json"));
  EXPECT_EQ(staged.partition.total_tx, summary.kept);
}

TEST(Pipeline, ConfigParsing) {
  const auto dir = test::scratch("pipeline-config");
  write(dir / "cfg.json", R"({
    "input": "data/records.jsonl",
    "output_dir": "/abs/out",
    "labels": "labels.csv",
    "ingest": {"start_block": 25, "on_error": "skip"},
    "graph": {"track_block_range": true},
    "detection": {"enabled": false, "top_k": 5, "threshold": 0.8, "min_neighbors": 4},
    "contraction": {"verify": true},
    "analytics": {"buckets": [1, 5], "directional": true},
    "log_level": "debug"
  })");
  const auto c = load_pipeline_config(dir / "cfg.json");
  EXPECT_EQ(c.input, dir / "data" / "records.jsonl");
  EXPECT_EQ(c.output_dir, fs::path("/abs/out"));
  EXPECT_EQ(c.labels, dir / "labels.csv");
  EXPECT_EQ(c.ingest.start_block, 25u);
  EXPECT_EQ(c.ingest.on_error, ErrorPolicy::kSkip);
  EXPECT_TRUE(c.graph.track_block_range);
  EXPECT_FALSE(c.detect);
  EXPECT_EQ(c.detection.top_k, 5u);
  EXPECT_DOUBLE_EQ(c.detection.deposit_neighbor_threshold, 0.8);
  EXPECT_EQ(c.detection.min_neighbors, 4u);
  EXPECT_TRUE(c.verify);
  EXPECT_EQ(c.buckets, (std::vector<std::uint64_t>{1, 5}));
  EXPECT_TRUE(c.report.directional_user_exchange);
  EXPECT_EQ(c.log_level, log::Level::kDebug);

  auto kind = [](const std::string& text) {
    try {
      pipeline_config_from_json(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind(R"({"ingest": {"on_error": "maybe"}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind(R"({"detection": {"threshold": 0}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind(R"({"analytics": {"buckets": [3, 2]}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind("{"), ErrorKind::kConfig);
}

TEST(Pipeline, ValidatesPathsBeforeRunning) {
  const auto dir = test::scratch("pipeline-paths");
  PipelineConfig pc;
  pc.input = dir / "missing.jsonl";
  pc.output_dir = dir / "out";
  pc.log_level = log::Level::kQuiet;
  try {
    run_pipeline(pc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Pipeline, StageErrorsNameTheStage) {
  const auto dir = test::scratch("pipeline-stage-error");
  write(dir / "records.jsonl", "{\"block_number\": 1}\n");
  PipelineConfig pc;
  pc.input = dir / "records.jsonl";
  pc.output_dir = dir / "out";
  pc.log_level = log::Level::kQuiet;
  try {
    run_pipeline(pc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingField);
    EXPECT_NE(std::string(e.what()).find("ingest"), std::string::npos);
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = test::scratch("cli");
  const std::string d = dir.string();
  scenario_file(dir, reference_scenario(3, 0.05));
  EXPECT_EQ(run_cli("synth --config " + d + "/scenario.json --output " + d +
                    "/records.jsonl --truth " + d + "/truth"), 0);
  EXPECT_EQ(run_cli("ingest --input " + d + "/records.jsonl --output " + d +
                    "/transfers.jsonl --start-block 0 --on-error fail"), 0);
  EXPECT_EQ(run_cli("build --input " + d + "/transfers.jsonl --output " + d + "/graph"), 0);
  EXPECT_EQ(run_cli("stats --graph " + d + "/graph"), 0);
  EXPECT_EQ(run_cli("detect --graph " + d + "/graph --top-k 60 --threshold 0.90 --labels " + d +
                    "/truth/labels.csv --output " + d + "/clusters.csv"), 0);
  EXPECT_EQ(run_cli("contract --graph " + d + "/graph --coloring " + d + "/clusters.csv --output " +
                    d + "/contracted --verify"), 0);
  EXPECT_EQ(run_cli("analyze --contracted " + d + "/contracted --clusters " + d +
                    "/clusters.csv --output " + d + "/report --buckets 1,2,3,10,100,421"), 0);
  EXPECT_NE(slurp(dir / "report" / "report.txt").find("Atlas"), std::string::npos);

  write(dir / "bad.jsonl", "{oops\n");
  EXPECT_EQ(run_cli("ingest --input " + d + "/bad.jsonl --output " + d + "/x.jsonl"),
            exit_code(ErrorKind::kMalformedRecord));
  EXPECT_EQ(run_cli("ingest --input " + d + "/bad.jsonl --output " + d + "/x.jsonl --on-error skip"),
            0);
  write(dir / "partial.csv", "address,color\n");
  EXPECT_EQ(run_cli("contract --graph " + d + "/graph --coloring " + d + "/partial.csv --output " +
                    d + "/c2"),
            exit_code(ErrorKind::kPartialColoring));
  EXPECT_EQ(run_cli("detect --graph " + d + "/graph --threshold 1.5 --output " + d + "/c.csv"),
            exit_code(ErrorKind::kConfig));
  EXPECT_EQ(run_cli("stats --graph " + d + "/nowhere"), exit_code(ErrorKind::kIo));
  EXPECT_NE(run_cli("frobnicate"), 0);

  // Distinct codes per error class.
  std::set<int> codes;
  for (auto k : {ErrorKind::kMalformedRecord, ErrorKind::kMissingField, ErrorKind::kUnknownAccount,
                 ErrorKind::kClusterOverlap, ErrorKind::kPartialColoring, ErrorKind::kConfig,
                 ErrorKind::kIo, ErrorKind::kConsistency}) {
    EXPECT_NE(exit_code(k), 0);
    codes.insert(exit_code(k));
  }
  EXPECT_EQ(codes.size(), 8u);
}

TEST(Cli, RunWithConfig) {
  const auto dir = test::scratch("cli-run");
  scenario_file(dir, reference_scenario(3, 0.05));
  write(dir / "run.json", R"({"scenario": "scenario.json", "output_dir": "out"})");
  EXPECT_EQ(run_cli("run --config " + (dir / "run.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  // A pipeline config feeds stage parameters to single stages too.
  write(dir / "params.json", R"({"ingest": {"start_block": 999999999}})");
  EXPECT_EQ(run_cli("ingest --config " + (dir / "params.json").string() + " --input " +
                    (dir / "out" / "records.jsonl").string() + " --output " +
                    (dir / "late.jsonl").string()),
            0);
  EXPECT_EQ(slurp(dir / "late.jsonl"), "");
}
