// Reference γ-contraction: union-find over monochromatic edges, then one
// full rescan of the edge list. Kept deliberately separate from the greedy
// implementation in contract.cpp so the two can check each other.

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "txg/contract.hpp"
#include "txg/error.hpp"

namespace txg {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    if (parent_[x] != x) parent_[x] = find(parent_[x]);
    return parent_[x];
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

Contraction oracle_contract(const AggregatedGraph& graph, const Coloring& coloring) {
  if (coloring.size() != graph.order()) {
    throw Error(ErrorKind::kPartialColoring, "coloring does not cover the graph");
  }
  const std::size_t n = graph.order();
  UnionFind uf(n);
  for (const Edge& e : graph.edges()) {
    if (coloring[e.src] == coloring[e.dst]) uf.unite(e.src, e.dst);
  }

  std::map<std::size_t, std::vector<AccountId>> groups;
  for (NodeId v = 0; v < n; ++v) groups[uf.find(v)].push_back(graph.account(v));

  // (is_user, colour, -size, smallest member) -> root
  using Key = std::tuple<bool, Color, std::int64_t, AccountId>;
  std::map<Key, std::size_t> ordered;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    const Color c = coloring[static_cast<NodeId>(root)];
    ordered.emplace(Key{c == kUserColor, c, -static_cast<std::int64_t>(members.size()),
                        members.front()},
                    root);
  }

  Contraction result;
  std::map<std::size_t, ClusterId> id_of;
  for (const auto& [key, root] : ordered) {
    const auto id = static_cast<ClusterId>(result.graph.nodes.size() + 1);
    id_of[root] = id;
    result.graph.nodes.push_back(
        {id, std::get<1>(key), static_cast<std::uint64_t>(-std::get<2>(key)), 0, 0});
  }

  result.assignment.accounts = graph.accounts();
  for (NodeId v = 0; v < n; ++v) {
    result.assignment.cluster_of.push_back(id_of[uf.find(v)]);
  }

  std::map<std::pair<ClusterId, ClusterId>, EdgeAggregate> cross;
  for (const Edge& e : graph.edges()) {
    const ClusterId s = result.assignment.cluster_of[e.src];
    const ClusterId d = result.assignment.cluster_of[e.dst];
    if (s == d) {
      result.graph.nodes[s - 1].intra_flux += e.agg.flux;
      result.graph.nodes[s - 1].intra_tx_count += e.agg.multiplicity;
    } else {
      cross[{s, d}] += e.agg;
    }
  }
  for (const auto& [pair, agg] : cross) {
    result.graph.edges.push_back({pair.first, pair.second, agg});
  }
  return result;
}

}  // namespace txg
