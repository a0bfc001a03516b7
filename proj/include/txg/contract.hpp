#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "txg/detect.hpp"
#include "txg/graph.hpp"

namespace txg {

using ClusterId = std::uint32_t;

/// One node of G/γ: a maximal connected set of same-coloured accounts.
struct ContractedNode {
  ClusterId cluster_id = 0;
  Color color = kUserColor;
  std::uint64_t member_count = 0;
  Flux intra_flux = 0;
  std::uint64_t intra_tx_count = 0;

  bool operator==(const ContractedNode&) const = default;
};

struct ContractedEdge {
  ClusterId src = 0;
  ClusterId dst = 0;
  EdgeAggregate agg;

  bool operator==(const ContractedEdge&) const = default;
};

struct ContractedGraph {
  /// nodes[i].cluster_id == i + 1.
  std::vector<ContractedNode> nodes;
  /// Sorted by (src, dst); never a self-edge, never multiplicity 0.
  std::vector<ContractedEdge> edges;

  const ContractedNode& node(ClusterId id) const { return nodes.at(id - 1); }
  std::size_t order() const noexcept { return nodes.size(); }
  std::size_t size() const noexcept { return edges.size(); }

  bool operator==(const ContractedGraph&) const = default;
};

/// Original account -> cluster id, aligned with the source graph's node order.
struct ClusterAssignment {
  std::vector<AccountId> accounts;
  std::vector<ClusterId> cluster_of;

  bool operator==(const ClusterAssignment&) const = default;
};

struct Contraction {
  ContractedGraph graph;
  ClusterAssignment assignment;
  /// Greedy merge passes performed; 0 when no monochromatic edge exists.
  std::size_t passes = 0;
};

struct ContractOptions {
  /// When set, nodes and edges are visited in a seeded random order
  /// instead of id order. The result must not depend on it.
  std::optional<std::uint64_t> order_seed;
};

/// γ-contraction by greedy iterative merging. Clusters are the connected
/// components of the monochromatic edges, direction ignored. Cluster ids:
/// non-zero colours first by (colour, size desc, smallest member), then
/// colour-0 clusters by (size desc, smallest member).
/// Throws Error(kPartialColoring) if the colouring does not cover the graph.
Contraction contract(const AggregatedGraph& graph, const Coloring& coloring,
                     const ContractOptions& options = {});

/// Same contract as contract(): disjoint-set union over every monochromatic
/// edge followed by a full rescan. Reference implementation for checks.
Contraction oracle_contract(const AggregatedGraph& graph, const Coloring& coloring);

/// No self-edge and no edge between two nodes of equal colour.
bool verify_contraction(const ContractedGraph& contracted);

/// Order-free serialization: clusters keyed by their sorted member sets,
/// cluster ids erased. Equal quotients give equal bytes.
std::string canonical_form(const ContractedGraph& contracted,
                           const ClusterAssignment& assignment);

/// Canonical form of an empty contraction.
std::string empty_canonical_form();

/// Treats `c.graph` as an ordinary coloured graph (intra statistics become
/// self-loops), contracts it again and composes the assignments, so the
/// result is directly comparable with `c`.
Contraction recontract(const Contraction& c);

struct ConservationCheck {
  bool nodes = false;         // Σ member_count == n
  bool transactions = false;  // Σ intra_tx + Σ multiplicity == m
  bool flux = false;          // Σ intra_flux + Σ edge flux == f
  bool ok() const noexcept { return nodes && transactions && flux; }
};

ConservationCheck check_conservation(const ContractedGraph& contracted,
                                     std::uint64_t order,
                                     std::uint64_t transaction_count,
                                     Flux total_flux);

}  // namespace txg
