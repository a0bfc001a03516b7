#include "txg/contract.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "txg/error.hpp"
#include "txg/rng.hpp"

namespace txg {

namespace {

struct MonoEdge {
  NodeId a;
  NodeId b;
};

void require_total(const AggregatedGraph& graph, const Coloring& coloring) {
  if (coloring.size() != graph.order()) {
    throw Error(ErrorKind::kPartialColoring,
                "coloring covers " + std::to_string(coloring.size()) + " of " +
                    std::to_string(graph.order()) + " nodes");
  }
}

NodeId find_root(std::vector<NodeId>& parent, NodeId v) {
  NodeId root = v;
  while (parent[root] != root) root = parent[root];
  while (parent[v] != root) {
    const NodeId next = parent[v];
    parent[v] = root;
    v = next;
  }
  return root;
}

}  // namespace

Contraction contract(const AggregatedGraph& graph, const Coloring& coloring,
                     const ContractOptions& options) {
  require_total(graph, coloring);
  const std::size_t n = graph.order();
  std::optional<Rng> rng;
  if (options.order_seed) rng.emplace(*options.order_seed);

  // rank[v]: position of v in the processing order. Each super-node is
  // represented by its lowest-ranked member.
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  if (rng) rng->shuffle(order);
  std::vector<NodeId> rank(n);
  for (NodeId i = 0; i < n; ++i) rank[order[i]] = i;

  std::vector<MonoEdge> mono;
  for (const Edge& e : graph.edges()) {
    if (e.src != e.dst && coloring[e.src] == coloring[e.dst]) {
      mono.push_back({e.src, e.dst});
    }
  }

  std::vector<NodeId> parent(n);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  std::vector<NodeId> best(n);
  std::iota(best.begin(), best.end(), NodeId{0});

  Contraction result;
  while (!mono.empty()) {
    ++result.passes;
    if (rng) rng->shuffle(mono);
    // Every super-node hooks onto its lowest-ranked monochromatic
    // neighbour. Hooks strictly decrease rank, so they form a forest.
    for (const auto& [a, b] : mono) {
      if (rank[b] < rank[best[a]]) best[a] = b;
      if (rank[a] < rank[best[b]]) best[b] = a;
    }
    for (const auto& [a, b] : mono) {
      parent[a] = best[a];
      parent[b] = best[b];
    }
    // Collapse the forest and keep only edges between distinct super-nodes.
    std::size_t kept = 0;
    for (const auto& [a, b] : mono) {
      const NodeId ra = find_root(parent, a);
      const NodeId rb = find_root(parent, b);
      if (ra != rb) mono[kept++] = {std::min(ra, rb), std::max(ra, rb)};
    }
    mono.resize(kept);
    std::sort(mono.begin(), mono.end(), [](const MonoEdge& x, const MonoEdge& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    mono.erase(std::unique(mono.begin(), mono.end(),
                           [](const MonoEdge& x, const MonoEdge& y) {
                             return x.a == y.a && x.b == y.b;
                           }),
               mono.end());
    for (const auto& [a, b] : mono) {
      best[a] = a;
      best[b] = b;
    }
  }

  // Per-root bookkeeping. Node ids follow account order, so the smallest
  // member id is the smallest member account.
  std::vector<NodeId> root(n);
  std::vector<std::uint64_t> members(n, 0);
  std::vector<NodeId> smallest(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    const NodeId r = find_root(parent, v);
    root[v] = r;
    if (members[r]++ == 0) smallest[r] = v;
  }
  std::vector<NodeId> roots;
  for (NodeId v = 0; v < n; ++v) {
    if (root[v] == v) roots.push_back(v);
  }
  std::sort(roots.begin(), roots.end(), [&](NodeId x, NodeId y) {
    const Color cx = coloring[x];
    const Color cy = coloring[y];
    const bool ux = cx == kUserColor;
    const bool uy = cy == kUserColor;
    if (ux != uy) return uy;
    if (cx != cy) return cx < cy;
    if (members[x] != members[y]) return members[x] > members[y];
    return smallest[x] < smallest[y];
  });

  std::vector<ClusterId> id_of_root(n, 0);
  auto& nodes = result.graph.nodes;
  nodes.reserve(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const auto id = static_cast<ClusterId>(i + 1);
    id_of_root[roots[i]] = id;
    nodes.push_back({id, coloring[roots[i]], members[roots[i]], 0, 0});
  }

  result.assignment.accounts = graph.accounts();
  result.assignment.cluster_of.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    result.assignment.cluster_of[v] = id_of_root[root[v]];
  }

  std::vector<std::uint32_t> edge_order(graph.size());
  std::iota(edge_order.begin(), edge_order.end(), 0u);
  if (rng) rng->shuffle(edge_order);
  std::unordered_map<std::uint64_t, EdgeAggregate> cross;
  for (std::uint32_t i : edge_order) {
    const Edge& e = graph.edges()[i];
    const ClusterId cu = result.assignment.cluster_of[e.src];
    const ClusterId cv = result.assignment.cluster_of[e.dst];
    if (cu == cv) {
      nodes[cu - 1].intra_flux += e.agg.flux;
      nodes[cu - 1].intra_tx_count += e.agg.multiplicity;
    } else {
      cross[(static_cast<std::uint64_t>(cu) << 32) | cv] += e.agg;
    }
  }
  auto& edges = result.graph.edges;
  edges.reserve(cross.size());
  for (const auto& [k, agg] : cross) {
    edges.push_back({static_cast<ClusterId>(k >> 32),
                     static_cast<ClusterId>(k & 0xffffffffu), agg});
  }
  std::sort(edges.begin(), edges.end(), [](const ContractedEdge& x, const ContractedEdge& y) {
    return x.src != y.src ? x.src < y.src : x.dst < y.dst;
  });
  return result;
}

bool verify_contraction(const ContractedGraph& contracted) {
  for (const auto& e : contracted.edges) {
    if (e.src == e.dst) return false;
    if (e.src == 0 || e.dst == 0 || e.src > contracted.order() ||
        e.dst > contracted.order()) {
      return false;
    }
    if (contracted.node(e.src).color == contracted.node(e.dst).color) return false;
  }
  return true;
}

std::string empty_canonical_form() { return "txg-canonical-v1\nN 0 E 0\n"; }

std::string canonical_form(const ContractedGraph& contracted,
                           const ClusterAssignment& assignment) {
  const std::size_t k = contracted.order();
  std::vector<std::vector<const AccountId*>> members(k);
  for (std::size_t i = 0; i < assignment.cluster_of.size(); ++i) {
    const ClusterId c = assignment.cluster_of[i];
    if (c >= 1 && c <= k) members[c - 1].push_back(&assignment.accounts[i]);
  }
  for (auto& m : members) {
    std::sort(m.begin(), m.end(),
              [](const AccountId* a, const AccountId* b) { return *a < *b; });
  }
  // Rank clusters by member set; the sets are disjoint so this is total
  // whenever every cluster has at least one member.
  std::vector<std::size_t> by_members(k);
  std::iota(by_members.begin(), by_members.end(), std::size_t{0});
  std::sort(by_members.begin(), by_members.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        members[a].begin(), members[a].end(), members[b].begin(), members[b].end(),
        [](const AccountId* x, const AccountId* y) { return *x < *y; });
  });
  std::vector<std::size_t> key(k);
  for (std::size_t i = 0; i < k; ++i) key[by_members[i]] = i;

  std::string out = "txg-canonical-v1\nN " + std::to_string(k) + " E " +
                    std::to_string(contracted.size()) + "\n";
  for (std::size_t i : by_members) {
    const ContractedNode& node = contracted.nodes[i];
    out += "C " + std::to_string(node.color) + ' ' + std::to_string(node.member_count) +
           ' ' + std::to_string(node.intra_tx_count) + ' ' + to_string(node.intra_flux);
    for (const AccountId* a : members[i]) {
      out += ' ' + std::to_string(a->size()) + ':' + *a;
    }
    out += '\n';
  }
  std::vector<std::string> lines;
  lines.reserve(contracted.size());
  char buf[48];
  for (const auto& e : contracted.edges) {
    const std::size_t s = e.src >= 1 && e.src <= k ? key[e.src - 1] : k;
    const std::size_t d = e.dst >= 1 && e.dst <= k ? key[e.dst - 1] : k;
    std::snprintf(buf, sizeof buf, "E %012zu %012zu ", s, d);
    lines.push_back(buf + to_string(e.agg.flux) + ' ' +
                    std::to_string(e.agg.multiplicity) + '\n');
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) out += l;
  return out;
}

Contraction recontract(const Contraction& c) {
  const std::size_t k = c.graph.order();
  char buf[24];
  std::vector<AccountId> names;
  names.reserve(k);
  for (std::size_t i = 1; i <= k; ++i) {
    std::snprintf(buf, sizeof buf, "c%010zu", i);
    names.emplace_back(buf);
  }
  std::vector<Edge> edges;
  for (const auto& e : c.graph.edges) edges.push_back({e.src - 1, e.dst - 1, e.agg, 0, 0});
  std::vector<Color> colors;
  for (const auto& node : c.graph.nodes) {
    colors.push_back(node.color);
    if (node.intra_tx_count > 0) {
      const NodeId v = node.cluster_id - 1;
      edges.push_back({v, v, {node.intra_flux, node.intra_tx_count}, 0, 0});
    }
  }
  const AggregatedGraph lifted = AggregatedGraph::from_parts(names, std::move(edges));
  Contraction outer = contract(lifted, Coloring(std::move(colors)));

  for (auto& node : outer.graph.nodes) node.member_count = 0;
  for (std::size_t i = 0; i < k; ++i) {
    outer.graph.nodes[outer.assignment.cluster_of[i] - 1].member_count +=
        c.graph.nodes[i].member_count;
  }
  ClusterAssignment composed;
  composed.accounts = c.assignment.accounts;
  composed.cluster_of.reserve(c.assignment.cluster_of.size());
  for (ClusterId inner : c.assignment.cluster_of) {
    composed.cluster_of.push_back(outer.assignment.cluster_of[inner - 1]);
  }
  outer.assignment = std::move(composed);
  return outer;
}

ConservationCheck check_conservation(const ContractedGraph& contracted,
                                     std::uint64_t order,
                                     std::uint64_t transaction_count,
                                     Flux total_flux) {
  std::uint64_t members = 0;
  std::uint64_t tx = 0;
  Flux flux = 0;
  for (const auto& node : contracted.nodes) {
    members += node.member_count;
    tx += node.intra_tx_count;
    flux += node.intra_flux;
  }
  for (const auto& e : contracted.edges) {
    tx += e.agg.multiplicity;
    flux += e.agg.flux;
  }
  return {members == order, tx == transaction_count, flux == total_flux};
}

}  // namespace txg
