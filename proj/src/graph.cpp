#include "txg/graph.hpp"

#include <algorithm>
#include <numeric>

#include "txg/error.hpp"

namespace txg {

AggregatedGraph AggregatedGraph::from_parts(std::vector<AccountId> accounts,
                                            std::vector<Edge> edges,
                                            bool tracks_block_range) {
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (accounts[i].empty()) {
      throw Error(ErrorKind::kConsistency, "empty account id");
    }
    if (i > 0 && !(accounts[i - 1] < accounts[i])) {
      throw Error(ErrorKind::kConsistency,
                  "accounts not strictly increasing at '" + accounts[i] + "'");
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.src >= accounts.size() || e.dst >= accounts.size()) {
      throw Error(ErrorKind::kConsistency, "edge endpoint out of range");
    }
    if (e.agg.multiplicity == 0 || e.agg.flux == 0) {
      throw Error(ErrorKind::kConsistency,
                  "edge " + accounts[e.src] + "->" + accounts[e.dst] +
                      " has zero multiplicity or flux");
    }
    if (i > 0 && edges[i - 1].src == e.src && edges[i - 1].dst == e.dst) {
      throw Error(ErrorKind::kConsistency, "duplicate edge " + accounts[e.src] +
                                               "->" + accounts[e.dst]);
    }
  }
  AggregatedGraph g;
  g.accounts_ = std::move(accounts);
  g.edges_ = std::move(edges);
  g.tracks_block_range_ = tracks_block_range;
  g.index();
  return g;
}

void AggregatedGraph::index() {
  const std::size_t n = accounts_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  transaction_count_ = 0;
  total_flux_ = 0;
  for (const Edge& e : edges_) {
    ++out_offsets_[e.src + 1];
    ++in_offsets_[e.dst + 1];
    transaction_count_ += e.agg.multiplicity;
    total_flux_ += e.agg.flux;
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  in_edges_.resize(edges_.size());
  std::vector<std::uint32_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
  // Edges are sorted by src, so each in-list comes out ordered by source.
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    in_edges_[cursor[edges_[i].dst]++] = i;
  }
}

std::optional<NodeId> AggregatedGraph::find(std::string_view account) const {
  const auto it = std::lower_bound(accounts_.begin(), accounts_.end(), account);
  if (it == accounts_.end() || *it != account) return std::nullopt;
  return static_cast<NodeId>(it - accounts_.begin());
}

NodeId AggregatedGraph::require(std::string_view account) const {
  const auto v = find(account);
  if (!v) {
    throw Error(ErrorKind::kUnknownAccount,
                "account not in graph: " + std::string(account));
  }
  return *v;
}

std::span<const Edge> AggregatedGraph::out_edges(NodeId v) const {
  return std::span<const Edge>(edges_).subspan(
      out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]);
}

std::span<const std::uint32_t> AggregatedGraph::in_edge_ids(NodeId v) const {
  return std::span<const std::uint32_t>(in_edges_).subspan(
      in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]);
}

const Edge* AggregatedGraph::find_edge(NodeId src, NodeId dst) const {
  const auto out = out_edges(src);
  const auto it = std::lower_bound(
      out.begin(), out.end(), dst,
      [](const Edge& e, NodeId d) { return e.dst < d; });
  if (it == out.end() || it->dst != dst) return nullptr;
  return &*it;
}

std::uint32_t GraphBuilder::intern(const std::string& account) {
  const auto [it, inserted] =
      ids_.try_emplace(account, static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.push_back(account);
  return it->second;
}

void GraphBuilder::accumulate(std::uint64_t k, const Pending& p) {
  const auto [it, inserted] = pairs_.try_emplace(k, p);
  if (inserted) return;
  Pending& cur = it->second;
  cur.agg += p.agg;
  cur.first_block = std::min(cur.first_block, p.first_block);
  cur.last_block = std::max(cur.last_block, p.last_block);
}

void GraphBuilder::add(const TransferRecord& t) {
  const std::uint32_t s = intern(t.sender);
  const std::uint32_t r = intern(t.recipient);
  accumulate(key(s, r), Pending{{t.amount_planck, 1}, t.block_number, t.block_number});
  ++transfers_;
}

void GraphBuilder::merge(const GraphBuilder& other) {
  std::vector<std::uint32_t> remap(other.names_.size());
  for (std::size_t i = 0; i < other.names_.size(); ++i) {
    remap[i] = intern(other.names_[i]);
  }
  for (const auto& [k, p] : other.pairs_) {
    accumulate(key(remap[k >> 32], remap[k & 0xffffffffu]), p);
  }
  transfers_ += other.transfers_;
}

AggregatedGraph GraphBuilder::finish() const {
  std::vector<std::uint32_t> order(names_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [this](std::uint32_t a, std::uint32_t b) {
    return names_[a] < names_[b];
  });
  std::vector<NodeId> rank(names_.size());
  std::vector<AccountId> accounts;
  accounts.reserve(names_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    rank[order[i]] = static_cast<NodeId>(i);
    accounts.push_back(names_[order[i]]);
  }
  std::vector<Edge> edges;
  edges.reserve(pairs_.size());
  for (const auto& [k, p] : pairs_) {
    Edge e{rank[k >> 32], rank[k & 0xffffffffu], p.agg, 0, 0};
    if (options_.track_block_range) {
      e.first_block = p.first_block;
      e.last_block = p.last_block;
    }
    edges.push_back(e);
  }
  return AggregatedGraph::from_parts(std::move(accounts), std::move(edges),
                                     options_.track_block_range);
}

AggregatedGraph build_graph(std::span<const TransferRecord> transfers,
                            GraphBuildOptions options) {
  GraphBuilder builder(options);
  for (const auto& t : transfers) builder.add(t);
  return builder.finish();
}

GraphStats graph_stats(const AggregatedGraph& graph) {
  return GraphStats{graph.order(), graph.size(), graph.transaction_count(),
                    graph.total_flux()};
}

std::uint64_t transaction_degree(const AggregatedGraph& graph, NodeId v) {
  std::uint64_t degree = 0;
  for (const Edge& e : graph.out_edges(v)) degree += e.agg.multiplicity;
  for (std::uint32_t id : graph.in_edge_ids(v)) {
    const Edge& e = graph.edges()[id];
    if (e.src != v) degree += e.agg.multiplicity;
  }
  return degree;
}

std::vector<NodeId> neighbors(const AggregatedGraph& graph, NodeId v) {
  std::vector<NodeId> out;
  for (const Edge& e : graph.out_edges(v)) {
    if (e.dst != v) out.push_back(e.dst);
  }
  const std::size_t mid = out.size();
  for (std::uint32_t id : graph.in_edge_ids(v)) {
    const NodeId u = graph.edges()[id].src;
    if (u != v) out.push_back(u);
  }
  // Both halves are already sorted.
  std::inplace_merge(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(mid),
                     out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t neighbor_degree(const AggregatedGraph& graph, NodeId v) {
  return neighbors(graph, v).size();
}

std::vector<CentralityEntry> degree_centrality_ranking(
    const AggregatedGraph& graph, std::size_t k) {
  const std::size_t n = graph.order();
  std::vector<std::uint64_t> degree(n, 0);
  for (const Edge& e : graph.edges()) {
    degree[e.src] += e.agg.multiplicity;
    if (e.dst != e.src) degree[e.dst] += e.agg.multiplicity;
  }
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  const std::size_t take = std::min(k, n);
  // Node ids follow account order, so the id is the lexicographic tie-break.
  std::partial_sort(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(take),
                    nodes.end(), [&degree](NodeId a, NodeId b) {
                      return degree[a] != degree[b] ? degree[a] > degree[b] : a < b;
                    });
  std::vector<CentralityEntry> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({nodes[i], graph.account(nodes[i]), degree[nodes[i]]});
  }
  return out;
}

}  // namespace txg
