#include "txg/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "txg/csv.hpp"
#include "txg/error.hpp"

namespace txg {

namespace {

constexpr std::uint64_t kPpm = 1'000'000;

std::uint64_t to_ppm(double fraction) {
  return static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(kPpm)));
}

bool valid_fraction(double f) { return f > 0.0 && f <= 1.0; }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

void DetectionParams::validate() const {
  if (top_k == 0 || min_neighbors == 0 || min_deposit_inflows == 0) {
    throw Error(ErrorKind::kConfig, "detection counts must be >= 1");
  }
  if (!valid_fraction(deposit_neighbor_threshold) ||
      !valid_fraction(deposit_forward_fraction)) {
    throw Error(ErrorKind::kConfig, "detection fractions must lie in (0, 1]");
  }
}

bool is_deposit_address(const AggregatedGraph& graph, NodeId candidate,
                        NodeId main, const DetectionParams& params) {
  if (candidate == main) return false;

  std::size_t inflows = 0;
  for (std::uint32_t id : graph.in_edge_ids(candidate)) {
    const NodeId src = graph.edges()[id].src;
    if (src != main && src != candidate) ++inflows;
  }
  if (inflows < params.min_deposit_inflows) return false;

  Flux out_total = 0;
  Flux to_main = 0;
  for (const Edge& e : graph.out_edges(candidate)) {
    if (e.dst == candidate) continue;
    out_total += e.agg.flux;
    if (e.dst == main) to_main = e.agg.flux;
  }
  if (out_total == 0) return false;

  const std::uint64_t forward_ppm = to_ppm(params.deposit_forward_fraction);
  if (to_main * kPpm < Flux{forward_ppm} * out_total) return false;

  const Flux leak_bound = Flux{kPpm - forward_ppm} * out_total;
  for (const Edge& e : graph.out_edges(candidate)) {
    if (e.dst == candidate || e.dst == main) continue;
    if (!(e.agg.flux * kPpm < leak_bound)) return false;
  }
  return true;
}

bool is_deposit_address(const AggregatedGraph& graph, const AccountId& candidate,
                        const AccountId& main, const DetectionParams& params) {
  return is_deposit_address(graph, graph.require(candidate), graph.require(main),
                            params);
}

namespace {

std::optional<ExchangeCluster> classify(const AggregatedGraph& graph, NodeId node,
                                        const DetectionParams& params) {
  const std::vector<NodeId> nbrs = neighbors(graph, node);
  if (nbrs.size() < params.min_neighbors) return std::nullopt;
  ExchangeCluster cluster;
  for (NodeId v : nbrs) {
    if (is_deposit_address(graph, v, node, params)) {
      cluster.deposit_addresses.push_back(graph.account(v));
    }
  }
  const Flux passing = cluster.deposit_addresses.size();
  if (!(passing * kPpm > Flux{to_ppm(params.deposit_neighbor_threshold)} * nbrs.size())) {
    return std::nullopt;
  }
  cluster.main_addresses.push_back(graph.account(node));
  cluster.deposit_owner.assign(cluster.deposit_addresses.size(), graph.account(node));
  return cluster;
}

}  // namespace

std::optional<ExchangeCluster> classify_exchange(const AggregatedGraph& graph,
                                                 const AccountId& node,
                                                 const DetectionParams& params) {
  return classify(graph, graph.require(node), params);
}

std::string unknown_label(const AccountId& main_address) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char c : main_address) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return "unknown-" + std::string(buf, 6);
}

std::vector<ExchangeCluster> detect_exchanges(const AggregatedGraph& graph,
                                              const DetectionParams& params,
                                              const LabelMap& labels) {
  params.validate();
  std::vector<ExchangeCluster> raw;
  for (const auto& entry : degree_centrality_ranking(graph, params.top_k)) {
    if (auto c = classify(graph, entry.node, params)) raw.push_back(std::move(*c));
  }

  DisjointSets groups(raw.size());
  std::unordered_map<AccountId, std::size_t> member_of;
  std::map<std::string, std::size_t> label_of;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (const auto* list : {&raw[i].main_addresses, &raw[i].deposit_addresses}) {
      for (const auto& a : *list) {
        const auto [it, inserted] = member_of.try_emplace(a, i);
        if (!inserted) groups.unite(it->second, i);
      }
    }
    const auto lit = labels.find(raw[i].main_addresses.front());
    if (lit != labels.end()) {
      const auto [it, inserted] = label_of.try_emplace(lit->second, i);
      if (!inserted) groups.unite(it->second, i);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < raw.size(); ++i) members[groups.find(i)].push_back(i);

  std::vector<ExchangeCluster> out;
  for (const auto& [root, parts] : members) {
    std::set<AccountId> mains;
    for (std::size_t i : parts) mains.insert(raw[i].main_addresses.front());

    // deposit -> candidate owners; the owner receiving the most flux wins.
    std::map<AccountId, std::vector<AccountId>> owners;
    for (std::size_t i : parts) {
      for (const auto& d : raw[i].deposit_addresses) {
        if (!mains.contains(d)) owners[d].push_back(raw[i].main_addresses.front());
      }
    }
    ExchangeCluster c;
    c.main_addresses.assign(mains.begin(), mains.end());
    for (auto& [deposit, candidates] : owners) {
      const NodeId d = *graph.find(deposit);
      std::sort(candidates.begin(), candidates.end());
      const AccountId* best = &candidates.front();
      Flux best_flux = 0;
      for (const auto& m : candidates) {
        const Edge* e = graph.find_edge(d, *graph.find(m));
        const Flux f = e ? e->agg.flux : 0;
        if (f > best_flux) {
          best_flux = f;
          best = &m;
        }
      }
      c.deposit_addresses.push_back(deposit);
      c.deposit_owner.push_back(*best);
    }

    std::set<std::string> names;
    for (const auto& m : c.main_addresses) {
      const auto it = labels.find(m);
      if (it != labels.end()) names.insert(it->second);
    }
    c.label = names.empty() ? unknown_label(c.main_addresses.front()) : *names.begin();
    out.push_back(std::move(c));
  }

  std::sort(out.begin(), out.end(), [](const ExchangeCluster& a, const ExchangeCluster& b) {
    if (a.node_count() != b.node_count()) return a.node_count() > b.node_count();
    if (a.label != b.label) return a.label < b.label;
    return a.main_addresses.front() < b.main_addresses.front();
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].cluster_id = static_cast<std::uint32_t>(i + 1);
  }
  return out;
}

std::vector<Color> Coloring::colors_in_use() const {
  std::vector<Color> used(colors_.begin(), colors_.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  return used;
}

Coloring build_coloring(const AggregatedGraph& graph,
                        const std::vector<ExchangeCluster>& clusters) {
  std::vector<Color> colors(graph.order(), kUserColor);
  std::vector<bool> assigned(graph.order(), false);
  std::set<std::uint32_t> ids;
  for (const auto& c : clusters) {
    if (c.cluster_id == kUserColor || !ids.insert(c.cluster_id).second) {
      throw Error(ErrorKind::kClusterOverlap,
                  "cluster id " + std::to_string(c.cluster_id) +
                      " is reserved or repeated");
    }
    for (const auto* list : {&c.main_addresses, &c.deposit_addresses}) {
      for (const auto& a : *list) {
        const NodeId v = graph.require(a);
        if (assigned[v]) {
          throw Error(ErrorKind::kClusterOverlap,
                      "account " + a + " belongs to more than one cluster");
        }
        assigned[v] = true;
        colors[v] = c.cluster_id;
      }
    }
  }
  return Coloring(std::move(colors));
}

LabelMap load_labels(const std::filesystem::path& path) {
  csv::Reader reader(path, {"address", "label"});
  LabelMap labels;
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row[0].empty() || row[1].empty()) reader.fail("empty address or label");
    const auto [it, inserted] = labels.emplace(row[0], row[1]);
    if (!inserted && it->second != row[1]) {
      reader.fail("conflicting labels for " + row[0]);
    }
  }
  return labels;
}

void save_clusters(const std::vector<ExchangeCluster>& clusters,
                   const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "cluster_id,label,address,role\n";
  for (const auto& c : clusters) {
    const std::string prefix =
        std::to_string(c.cluster_id) + "," + csv::escape(c.label) + ",";
    for (const auto& a : c.main_addresses) out << prefix << csv::escape(a) << ",main\n";
    for (const auto& a : c.deposit_addresses) {
      out << prefix << csv::escape(a) << ",deposit\n";
    }
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

std::vector<ExchangeCluster> load_clusters(const std::filesystem::path& path) {
  csv::Reader reader(path, {"cluster_id", "label", "address", "role"});
  std::map<std::uint32_t, ExchangeCluster> by_id;
  std::vector<std::string> row;
  while (reader.next(row)) {
    std::uint32_t id = 0;
    try {
      const Flux v = parse_flux(row[0]);
      if (v == 0 || v > 0xffffffffu) throw std::invalid_argument("cluster_id out of range");
      id = static_cast<std::uint32_t>(v);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    auto [it, inserted] = by_id.try_emplace(id);
    ExchangeCluster& c = it->second;
    if (inserted) {
      c.cluster_id = id;
      c.label = row[1];
    } else if (c.label != row[1]) {
      reader.fail("cluster " + row[0] + " has conflicting labels");
    }
    if (row[3] == "main") {
      c.main_addresses.push_back(row[2]);
    } else if (row[3] == "deposit") {
      c.deposit_addresses.push_back(row[2]);
    } else {
      reader.fail("role must be main or deposit, got '" + row[3] + "'");
    }
  }
  std::vector<ExchangeCluster> out;
  for (auto& [id, c] : by_id) {
    std::sort(c.main_addresses.begin(), c.main_addresses.end());
    std::sort(c.deposit_addresses.begin(), c.deposit_addresses.end());
    out.push_back(std::move(c));
  }
  return out;
}

void save_coloring(const AggregatedGraph& graph, const Coloring& coloring,
                   const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "address,color\n";
  for (NodeId v = 0; v < graph.order(); ++v) {
    out << csv::escape(graph.account(v)) << ',' << coloring[v] << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

Coloring load_coloring(const AggregatedGraph& graph,
                       const std::filesystem::path& path) {
  {
    std::ifstream probe(path);
    std::string header;
    if (probe && std::getline(probe, header) && header.rfind("cluster_id,", 0) == 0) {
      return build_coloring(graph, load_clusters(path));
    }
  }
  csv::Reader reader(path, {"address", "color"});
  std::vector<Color> colors(graph.order(), kUserColor);
  std::vector<bool> seen(graph.order(), false);
  std::vector<std::string> row;
  while (reader.next(row)) {
    const auto v = graph.find(row[0]);
    if (!v) {
      throw Error(ErrorKind::kUnknownAccount,
                  path.string() + ":" + std::to_string(reader.line()) +
                      ": account not in graph: " + row[0]);
    }
    try {
      const Flux c = parse_flux(row[1]);
      if (c > 0xffffffffu) throw std::invalid_argument("color out of range");
      colors[*v] = static_cast<Color>(c);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    seen[*v] = true;
  }
  for (NodeId v = 0; v < graph.order(); ++v) {
    if (!seen[v]) {
      throw Error(ErrorKind::kPartialColoring,
                  path.string() + ": no color for account " + graph.account(v));
    }
  }
  return Coloring(std::move(colors));
}

}  // namespace txg
