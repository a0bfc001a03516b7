#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "txg/graph.hpp"

namespace txg {

struct DetectionParams {
  /// How many of the most central nodes are examined.
  std::size_t top_k = 60;
  /// A hub is an exchange when strictly more than this share of its
  /// neighbours are deposit addresses.
  double deposit_neighbor_threshold = 0.90;
  std::size_t min_neighbors = 10;
  /// Minimum share of a deposit address's out-flux forwarded to the main wallet.
  double deposit_forward_fraction = 0.99;
  std::size_t min_deposit_inflows = 1;

  /// Throws Error(kConfig) if a fraction is outside (0, 1] or a count is 0.
  void validate() const;
};

struct ExchangeCluster {
  std::uint32_t cluster_id = 0;
  std::string label;
  std::vector<AccountId> main_addresses;     // sorted
  std::vector<AccountId> deposit_addresses;  // sorted, disjoint from mains
  /// For each deposit address (same order), the main wallet it forwards to.
  std::vector<AccountId> deposit_owner;

  std::size_t node_count() const noexcept {
    return main_addresses.size() + deposit_addresses.size();
  }
  bool operator==(const ExchangeCluster&) const = default;
};

using LabelMap = std::map<AccountId, std::string>;

/// Deposit-address pattern test of `candidate` against main wallet `main`.
/// Throws Error(kUnknownAccount) if either account is absent.
bool is_deposit_address(const AggregatedGraph& graph, const AccountId& candidate,
                        const AccountId& main, const DetectionParams& params);
bool is_deposit_address(const AggregatedGraph& graph, NodeId candidate,
                        NodeId main, const DetectionParams& params);

/// Tests every distinct neighbour of `node`; returns a single-main cluster
/// (cluster_id 0, empty label) when the deposit share clears the threshold.
std::optional<ExchangeCluster> classify_exchange(const AggregatedGraph& graph,
                                                 const AccountId& node,
                                                 const DetectionParams& params);

/// Classifies the top_k central nodes, merges clusters that share a label
/// or a member, labels them and numbers them 1..K by descending size.
std::vector<ExchangeCluster> detect_exchanges(const AggregatedGraph& graph,
                                              const DetectionParams& params,
                                              const LabelMap& labels = {});

/// "unknown-" followed by six hex digits derived from the address.
std::string unknown_label(const AccountId& main_address);

using Color = std::uint32_t;
inline constexpr Color kUserColor = 0;

/// Total map from graph nodes to colours, indexed by NodeId.
class Coloring {
 public:
  Coloring() = default;
  explicit Coloring(std::vector<Color> colors) : colors_(std::move(colors)) {}

  static Coloring uniform(std::size_t n, Color c = kUserColor) {
    return Coloring(std::vector<Color>(n, c));
  }

  Color operator[](NodeId v) const { return colors_[v]; }
  Color& operator[](NodeId v) { return colors_[v]; }
  std::size_t size() const noexcept { return colors_.size(); }
  const std::vector<Color>& colors() const noexcept { return colors_; }

  /// Distinct colours in ascending order.
  std::vector<Color> colors_in_use() const;

  bool operator==(const Coloring&) const = default;

 private:
  std::vector<Color> colors_;
};

/// Colour i for every member of cluster i, colour 0 elsewhere. Throws
/// Error(kClusterOverlap) on shared members or repeated/zero cluster ids and
/// Error(kUnknownAccount) for members missing from the graph.
Coloring build_coloring(const AggregatedGraph& graph,
                        const std::vector<ExchangeCluster>& clusters);

// File formats:
//   labels    address,label
//   clusters  cluster_id,label,address,role     role in {main, deposit}
//   coloring  address,color

LabelMap load_labels(const std::filesystem::path& path);
void save_clusters(const std::vector<ExchangeCluster>& clusters,
                   const std::filesystem::path& path);
std::vector<ExchangeCluster> load_clusters(const std::filesystem::path& path);

void save_coloring(const AggregatedGraph& graph, const Coloring& coloring,
                   const std::filesystem::path& path);
/// Accepts either an `address,color` file, which must cover every node, or
/// a cluster file, whose non-members get colour 0. Throws
/// Error(kPartialColoring) when an address,color file misses a node.
Coloring load_coloring(const AggregatedGraph& graph,
                       const std::filesystem::path& path);

}  // namespace txg
