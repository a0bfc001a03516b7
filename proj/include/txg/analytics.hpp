#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "txg/contract.hpp"
#include "txg/contract_io.hpp"
#include "txg/detect.hpp"

namespace txg {

struct CategoryTotals {
  std::uint64_t tx_count = 0;
  Flux flux = 0;

  CategoryTotals& operator+=(const EdgeAggregate& agg) {
    tx_count += agg.multiplicity;
    flux += agg.flux;
    return *this;
  }
  bool operator==(const CategoryTotals&) const = default;
};

/// Transactions and flux by interaction category. Shares are taken against
/// total_tx / total_flux at display time, from the exact integers.
struct FluxPartition {
  CategoryTotals intra_exchange;
  CategoryTotals inter_exchange;
  CategoryTotals user_exchange;  // both directions
  CategoryTotals intra_user;
  CategoryTotals user_to_exchange;
  CategoryTotals exchange_to_user;
  std::uint64_t total_tx = 0;
  Flux total_flux = 0;

  bool operator==(const FluxPartition&) const = default;
};

FluxPartition flux_partition(const ContractedGraph& contracted);

struct ExchangeRow {
  Color color = 0;
  std::string label;
  std::size_t main_address_count = 0;
  std::uint64_t node_count = 0;
  /// Transactions/flux on edges joining this exchange to another exchange,
  /// either direction.
  CategoryTotals inter_exchange;

  bool operator==(const ExchangeRow&) const = default;
};

struct ExchangeTable {
  std::vector<ExchangeRow> rows;  // descending node_count, then label
  std::uint64_t total_nodes = 0;
  /// Sums over rows; every inter-exchange edge is counted by both endpoints.
  CategoryTotals total_inter_exchange;
};

ExchangeTable exchange_table(const ContractedGraph& contracted,
                             const std::vector<ExchangeCluster>& clusters);

/// Upper bounds of the leading size ranges: 1, 2, 3, 4-10, 11-100, 101-421.
inline constexpr std::uint64_t kDefaultBucketBounds[] = {1, 2, 3, 10, 100, 421};

struct HistogramBucket {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t cluster_count = 0;
  std::uint64_t user_count = 0;
  std::uint64_t intra_tx_sum = 0;
  Flux intra_flux_sum = 0;

  std::string range_label() const;
  std::optional<double> avg_intra_tx() const;
  /// Mean intra-cluster flux in Planck.
  std::optional<long double> avg_intra_flux() const;
};

struct ClusterSizeHistogram {
  std::vector<HistogramBucket> buckets;
  std::uint64_t total_users = 0;
  std::uint64_t total_clusters = 0;
  std::uint64_t max_size = 0;
  /// size -> number of user clusters of that size.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> size_counts;
};

/// Buckets user-coloured clusters by size. `bounds` must be strictly
/// increasing and positive; it is followed by a tail range up to max-1 and
/// a final bucket holding the largest cluster size. Throws Error(kConfig).
ClusterSizeHistogram cluster_size_histogram(
    const ClusterAssignment& assignment, const ContractedGraph& contracted,
    std::span<const std::uint64_t> bounds = kDefaultBucketBounds);

struct NetworkReport {
  GraphStats before;
  std::uint64_t contracted_order = 0;
  std::uint64_t contracted_size = 0;
  std::uint64_t exchange_count = 0;
  std::uint64_t exchange_nodes = 0;
  std::uint64_t user_nodes = 0;
  std::uint64_t user_clusters = 0;
  std::uint64_t largest_user_cluster = 0;  // u*
  FluxPartition partition;
  ExchangeTable exchanges;
  ClusterSizeHistogram histogram;
};

/// Cross-checks every total and throws Error(kConsistency) on mismatch.
NetworkReport build_report(const GraphStats& before, const ContractedGraph& contracted,
                           const std::vector<ExchangeCluster>& clusters,
                           FluxPartition partition, ExchangeTable table,
                           ClusterSizeHistogram histogram);

struct ReportOptions {
  /// Emit user->exchange and exchange->user separately.
  bool directional_user_exchange = false;
};

std::string report_json(const NetworkReport& report, const ReportOptions& options = {});
std::string report_text(const NetworkReport& report, const ReportOptions& options = {});

/// report.json, report.txt and plots/{partition,exchanges,exchange_edges,
/// user_cluster_sizes}.csv under `dir`.
void save_report(const NetworkReport& report, const ContractedGraph& contracted,
                 const ColorLabels& labels, const std::filesystem::path& dir,
                 const ReportOptions& options = {});

/// Parses "1,2,3,10" into bucket bounds; throws Error(kConfig).
std::vector<std::uint64_t> parse_bucket_bounds(const std::string& text);

}  // namespace txg
