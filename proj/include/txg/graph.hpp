#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "txg/amount.hpp"
#include "txg/ingest.hpp"

namespace txg {

using AccountId = std::string;
using NodeId = std::uint32_t;

struct EdgeAggregate {
  Flux flux = 0;
  std::uint64_t multiplicity = 0;

  EdgeAggregate& operator+=(const EdgeAggregate& o) {
    flux += o.flux;
    multiplicity += o.multiplicity;
    return *this;
  }
  bool operator==(const EdgeAggregate&) const = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeAggregate agg;
  // Only meaningful when the graph tracks block ranges.
  std::uint64_t first_block = 0;
  std::uint64_t last_block = 0;

  bool operator==(const Edge&) const = default;
};

/// Simple directed graph over accounts; each edge aggregates every transfer
/// from its sender to its recipient. Node ids follow lexicographic account
/// order and edges are sorted by (src, dst), so two graphs built from the
/// same transfers in any order compare equal.
class AggregatedGraph {
 public:
  AggregatedGraph() = default;

  /// `accounts` must be strictly increasing; edges reference valid ids and
  /// hold no duplicate pairs. Throws Error(kConsistency) otherwise.
  static AggregatedGraph from_parts(std::vector<AccountId> accounts,
                                    std::vector<Edge> edges,
                                    bool tracks_block_range = false);

  std::size_t order() const noexcept { return accounts_.size(); }
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return accounts_.empty(); }

  const std::vector<AccountId>& accounts() const noexcept { return accounts_; }
  const AccountId& account(NodeId v) const { return accounts_[v]; }
  std::optional<NodeId> find(std::string_view account) const;
  /// Like find() but throws Error(kUnknownAccount).
  NodeId require(std::string_view account) const;

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Edge> out_edges(NodeId v) const;
  /// Indices into edges() of the edges entering v, ordered by source.
  std::span<const std::uint32_t> in_edge_ids(NodeId v) const;
  const Edge* find_edge(NodeId src, NodeId dst) const;

  bool tracks_block_range() const noexcept { return tracks_block_range_; }
  std::uint64_t transaction_count() const noexcept { return transaction_count_; }
  Flux total_flux() const noexcept { return total_flux_; }

  bool operator==(const AggregatedGraph& o) const {
    return accounts_ == o.accounts_ && edges_ == o.edges_ &&
           tracks_block_range_ == o.tracks_block_range_;
  }

 private:
  void index();

  std::vector<AccountId> accounts_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> out_offsets_;
  std::vector<std::uint32_t> in_offsets_;
  std::vector<std::uint32_t> in_edges_;
  bool tracks_block_range_ = false;
  std::uint64_t transaction_count_ = 0;
  Flux total_flux_ = 0;
};

struct GraphBuildOptions {
  /// Keep first/last block seen per edge.
  bool track_block_range = false;
};

/// Accumulates transfers into per-pair aggregates. Builders over disjoint
/// parts of a stream can be merged in any order with identical results.
class GraphBuilder {
 public:
  explicit GraphBuilder(GraphBuildOptions options = {}) : options_(options) {}

  void add(const TransferRecord& transfer);
  void merge(const GraphBuilder& other);
  AggregatedGraph finish() const;

  std::size_t transfers_seen() const noexcept { return transfers_; }

 private:
  struct Pending {
    EdgeAggregate agg;
    std::uint64_t first_block = 0;
    std::uint64_t last_block = 0;
  };

  std::uint32_t intern(const std::string& account);
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  void accumulate(std::uint64_t k, const Pending& p);

  GraphBuildOptions options_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
  std::unordered_map<std::uint64_t, Pending> pairs_;
  std::size_t transfers_ = 0;
};

AggregatedGraph build_graph(std::span<const TransferRecord> transfers,
                            GraphBuildOptions options = {});

struct GraphStats {
  std::uint64_t order = 0;
  std::uint64_t aggregated_size = 0;
  std::uint64_t transaction_count = 0;
  Flux total_flux = 0;

  bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const AggregatedGraph& graph);

/// Transactions touching v: incoming plus outgoing multiplicity, with a
/// self-transfer counted once.
std::uint64_t transaction_degree(const AggregatedGraph& graph, NodeId v);

/// Number of distinct accounts adjacent to v in either direction, excluding v.
std::size_t neighbor_degree(const AggregatedGraph& graph, NodeId v);

/// Distinct in- and out-neighbours of v, excluding v itself, ascending.
std::vector<NodeId> neighbors(const AggregatedGraph& graph, NodeId v);

struct CentralityEntry {
  NodeId node = 0;
  AccountId account;
  std::uint64_t degree = 0;

  bool operator==(const CentralityEntry&) const = default;
};

/// Top-k nodes by transaction degree, ties broken by ascending account id.
std::vector<CentralityEntry> degree_centrality_ranking(
    const AggregatedGraph& graph, std::size_t k);

}  // namespace txg
