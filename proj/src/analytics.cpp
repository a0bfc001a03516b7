#include "txg/analytics.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "txg/csv.hpp"
#include "txg/error.hpp"

namespace txg {

using nlohmann::ordered_json;

FluxPartition flux_partition(const ContractedGraph& contracted) {
  FluxPartition p;
  for (const auto& n : contracted.nodes) {
    const EdgeAggregate agg{n.intra_flux, n.intra_tx_count};
    (n.color == kUserColor ? p.intra_user : p.intra_exchange) += agg;
  }
  for (const auto& e : contracted.edges) {
    const bool src_ex = contracted.node(e.src).color != kUserColor;
    const bool dst_ex = contracted.node(e.dst).color != kUserColor;
    if (src_ex && dst_ex) {
      p.inter_exchange += e.agg;
    } else if (src_ex || dst_ex) {
      p.user_exchange += e.agg;
      (src_ex ? p.exchange_to_user : p.user_to_exchange) += e.agg;
    } else {
      // Two distinct user clusters are never adjacent in a proper
      // contraction; account for it anyway so totals stay complete.
      p.intra_user += e.agg;
    }
  }
  for (const auto* c : {&p.intra_exchange, &p.inter_exchange, &p.user_exchange, &p.intra_user}) {
    p.total_tx += c->tx_count;
    p.total_flux += c->flux;
  }
  return p;
}

ExchangeTable exchange_table(const ContractedGraph& contracted,
                             const std::vector<ExchangeCluster>& clusters) {
  std::map<Color, ExchangeRow> rows;
  for (const auto& c : clusters) {
    auto& row = rows[c.cluster_id];
    row.color = c.cluster_id;
    row.label = c.label;
    row.main_address_count = c.main_addresses.size();
  }
  for (const auto& n : contracted.nodes) {
    if (n.color == kUserColor) continue;
    auto& row = rows[n.color];
    row.color = n.color;
    row.node_count += n.member_count;
  }
  for (const auto& e : contracted.edges) {
    const Color a = contracted.node(e.src).color;
    const Color b = contracted.node(e.dst).color;
    if (a == kUserColor || b == kUserColor || a == b) continue;
    rows[a].inter_exchange += e.agg;
    rows[b].inter_exchange += e.agg;
  }
  ExchangeTable table;
  for (auto& [color, row] : rows) {
    if (row.label.empty()) row.label = "color-" + std::to_string(color);
    table.total_nodes += row.node_count;
    table.total_inter_exchange.tx_count += row.inter_exchange.tx_count;
    table.total_inter_exchange.flux += row.inter_exchange.flux;
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ExchangeRow& x, const ExchangeRow& y) {
              if (x.node_count != y.node_count) return x.node_count > y.node_count;
              if (x.label != y.label) return x.label < y.label;
              return x.color < y.color;
            });
  return table;
}

std::string HistogramBucket::range_label() const {
  return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

std::optional<double> HistogramBucket::avg_intra_tx() const {
  if (cluster_count == 0) return std::nullopt;
  return static_cast<double>(intra_tx_sum) / static_cast<double>(cluster_count);
}

std::optional<long double> HistogramBucket::avg_intra_flux() const {
  if (cluster_count == 0) return std::nullopt;
  return static_cast<long double>(intra_flux_sum) / static_cast<long double>(cluster_count);
}

ClusterSizeHistogram cluster_size_histogram(const ClusterAssignment& assignment,
                                            const ContractedGraph& contracted,
                                            std::span<const std::uint64_t> bounds) {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i] == 0 || (i > 0 && bounds[i] <= bounds[i - 1])) {
      throw Error(ErrorKind::kConfig,
                  "bucket bounds must be positive and strictly increasing");
    }
  }
  std::vector<std::uint64_t> sizes(contracted.order(), 0);
  for (ClusterId c : assignment.cluster_of) {
    if (c == 0 || c > contracted.order()) {
      throw Error(ErrorKind::kConsistency, "assignment references unknown cluster");
    }
    ++sizes[c - 1];
  }

  ClusterSizeHistogram h;
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& n : contracted.nodes) {
    if (n.color != kUserColor) continue;
    const std::uint64_t s = sizes[n.cluster_id - 1];
    h.max_size = std::max(h.max_size, s);
    ++counts[s];
  }
  h.size_counts.assign(counts.begin(), counts.end());

  std::uint64_t lo = 1;
  const std::uint64_t cap = h.max_size == 0 ? ~std::uint64_t{0} : h.max_size - 1;
  for (std::uint64_t b : bounds) {
    const std::uint64_t hi = std::min(b, cap);
    if (lo <= hi) h.buckets.push_back({lo, hi});
    lo = b + 1;
  }
  if (h.max_size > 0) {
    if (lo <= h.max_size - 1) h.buckets.push_back({lo, h.max_size - 1});
    h.buckets.push_back({h.max_size, h.max_size});
  }

  for (const auto& n : contracted.nodes) {
    if (n.color != kUserColor) continue;
    const std::uint64_t s = sizes[n.cluster_id - 1];
    auto it = std::find_if(h.buckets.begin(), h.buckets.end(),
                           [s](const HistogramBucket& b) { return s >= b.lo && s <= b.hi; });
    if (it == h.buckets.end()) {
      throw Error(ErrorKind::kConsistency, "cluster size outside every bucket");
    }
    ++it->cluster_count;
    it->user_count += s;
    it->intra_tx_sum += n.intra_tx_count;
    it->intra_flux_sum += n.intra_flux;
    ++h.total_clusters;
    h.total_users += s;
  }
  return h;
}

NetworkReport build_report(const GraphStats& before, const ContractedGraph& contracted,
                           const std::vector<ExchangeCluster>& clusters,
                           FluxPartition partition, ExchangeTable table,
                           ClusterSizeHistogram histogram) {
  NetworkReport r;
  r.before = before;
  r.contracted_order = contracted.order();
  r.contracted_size = contracted.size();
  std::vector<Color> exchange_colors;
  for (const auto& n : contracted.nodes) {
    if (n.color == kUserColor) {
      r.user_nodes += n.member_count;
      ++r.user_clusters;
      r.largest_user_cluster = std::max(r.largest_user_cluster, n.member_count);
    } else {
      r.exchange_nodes += n.member_count;
      exchange_colors.push_back(n.color);
    }
  }
  std::sort(exchange_colors.begin(), exchange_colors.end());
  exchange_colors.erase(std::unique(exchange_colors.begin(), exchange_colors.end()),
                        exchange_colors.end());
  r.exchange_count = exchange_colors.size();

  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kConsistency, "report inconsistent: " + what);
  };
  const auto cons = check_conservation(contracted, before.order,
                                       before.transaction_count, before.total_flux);
  if (!cons.nodes) fail("node conservation violated");
  if (!cons.transactions) fail("transaction conservation violated");
  if (!cons.flux) fail("flux conservation violated");
  if (partition.total_tx != before.transaction_count ||
      partition.total_flux != before.total_flux) {
    fail("flux partition does not sum to the graph totals");
  }
  if (table.total_nodes != r.exchange_nodes) fail("exchange table node total");
  if (histogram.total_users != r.user_nodes) fail("histogram user total");
  if (histogram.total_clusters != r.user_clusters) fail("histogram cluster total");
  for (const auto& c : clusters) {
    const auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                 [&c](const ExchangeRow& row) { return row.color == c.cluster_id; });
    if (it == table.rows.end() || it->node_count != c.node_count()) {
      fail("exchange " + c.label + " node count differs from its cluster");
    }
  }

  r.partition = std::move(partition);
  r.exchanges = std::move(table);
  r.histogram = std::move(histogram);
  return r;
}

namespace {

ordered_json share(std::uint64_t num, std::uint64_t den) {
  return ordered_json{{"count", num}, {"pct", format_pct(num, den)}};
}

ordered_json category_json(const CategoryTotals& c, const FluxPartition& p) {
  return ordered_json{{"tx_count", c.tx_count},
                      {"tx_pct", format_pct(c.tx_count, p.total_tx)},
                      {"flux_planck", to_string(c.flux)},
                      {"flux_dot", format_dot(c.flux)},
                      {"flux_pct", format_pct(c.flux, p.total_flux)}};
}

std::string avg_flux_dot(const HistogramBucket& b) {
  if (b.cluster_count == 0) return "--";
  // Mean in Planck, rounded half up, then shown in DOT.
  const Flux mean = (2 * b.intra_flux_sum + b.cluster_count) / (2 * Flux{b.cluster_count});
  return format_dot(mean);
}

std::string avg_tx(const HistogramBucket& b) {
  if (b.cluster_count == 0) return "--";
  const Flux scaled =
      (2 * Flux{b.intra_tx_sum} * 100 + b.cluster_count) / (2 * Flux{b.cluster_count});
  std::string frac = to_string(scaled % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return to_string(scaled / 100) + "." + frac;
}

struct Category {
  const char* name;
  const CategoryTotals* totals;
};

std::vector<Category> categories(const FluxPartition& p, const ReportOptions& o) {
  std::vector<Category> out = {{"intra_exchange", &p.intra_exchange},
                               {"inter_exchange", &p.inter_exchange},
                               {"user_exchange", &p.user_exchange},
                               {"intra_user", &p.intra_user}};
  if (o.directional_user_exchange) {
    out.push_back({"user_to_exchange", &p.user_to_exchange});
    out.push_back({"exchange_to_user", &p.exchange_to_user});
  }
  return out;
}

}  // namespace

std::string report_json(const NetworkReport& r, const ReportOptions& options) {
  const std::uint64_t n = r.before.order;
  ordered_json j;
  j["original"] = {
      {"order", r.before.order},
      {"aggregated_size", r.before.aggregated_size},
      {"transaction_count", r.before.transaction_count},
      {"total_flux_planck", to_string(r.before.total_flux)},
      {"total_flux_dot", format_dot(r.before.total_flux)},
      {"exchange_nodes", share(r.exchange_nodes, n)},
      {"user_nodes", share(r.user_nodes, n)},
  };
  j["contracted"] = {
      {"order", share(r.contracted_order, n)},
      {"size", r.contracted_size},
      {"size_vs_transactions_pct", format_pct(r.contracted_size, r.before.transaction_count)},
      {"size_vs_aggregated_pct", format_pct(r.contracted_size, r.before.aggregated_size)},
      {"exchange_clusters", r.exchange_count},
      {"user_clusters", r.user_clusters},
      {"largest_user_cluster", share(r.largest_user_cluster, r.user_nodes)},
  };
  ordered_json part = ordered_json::object();
  for (const auto& c : categories(r.partition, options)) {
    part[c.name] = category_json(*c.totals, r.partition);
  }
  j["flux_partition"] = part;

  ordered_json rows = ordered_json::array();
  const auto& t = r.exchanges;
  for (const auto& row : t.rows) {
    rows.push_back({
        {"cluster_id", row.color},
        {"label", row.label},
        {"main_addresses", row.main_address_count},
        {"nodes", share(row.node_count, t.total_nodes)},
        {"inter_exchange_tx", share(row.inter_exchange.tx_count,
                                    t.total_inter_exchange.tx_count)},
        {"inter_exchange_flux_planck", to_string(row.inter_exchange.flux)},
        {"inter_exchange_flux_dot", format_dot(row.inter_exchange.flux)},
        {"inter_exchange_flux_pct",
         format_pct(row.inter_exchange.flux, t.total_inter_exchange.flux)},
    });
  }
  j["exchanges"] = rows;

  ordered_json buckets = ordered_json::array();
  for (const auto& b : r.histogram.buckets) {
    ordered_json entry = {
        {"size", b.range_label()},
        {"lo", b.lo},
        {"hi", b.hi},
        {"clusters", b.cluster_count},
        {"users", share(b.user_count, r.histogram.total_users)},
        {"intra_tx_sum", b.intra_tx_sum},
        {"intra_flux_sum_planck", to_string(b.intra_flux_sum)},
    };
    entry["avg_intra_tx"] = b.cluster_count ? ordered_json(avg_tx(b)) : ordered_json(nullptr);
    entry["avg_intra_flux_dot"] =
        b.cluster_count ? ordered_json(avg_flux_dot(b)) : ordered_json(nullptr);
    buckets.push_back(std::move(entry));
  }
  j["user_cluster_sizes"] = buckets;
  return j.dump(2) + "\n";
}

std::string report_text(const NetworkReport& r, const ReportOptions& options) {
  std::ostringstream out;
  const std::uint64_t n = r.before.order;
  auto num = [](std::uint64_t v) { return group_thousands(std::to_string(v)); };
  auto pct = [](Flux a, Flux b) { return "(" + format_pct(a, b) + "%)"; };

  out << "Network statistics\n"
      << "                        G                        G/gamma\n"
      << "accounts total          " << num(n) << "    " << num(r.contracted_order) << " "
      << pct(r.contracted_order, n) << "\n"
      << "accounts exchanges      " << num(r.exchange_nodes) << " " << pct(r.exchange_nodes, n)
      << "    " << num(r.exchange_count) << "\n"
      << "accounts users          " << num(r.user_nodes) << " " << pct(r.user_nodes, n)
      << "    " << num(r.user_clusters) << "\n"
      << "transactions number     " << num(r.before.transaction_count) << "    "
      << num(r.contracted_size) << " "
      << pct(r.contracted_size, r.before.transaction_count) << "\n"
      << "total flux (DOT)        " << format_dot(r.before.total_flux, 2, true) << "\n"
      << "largest user cluster    " << num(r.largest_user_cluster) << " "
      << pct(r.largest_user_cluster, r.user_nodes) << "\n\n";

  out << "Flux partition\n";
  for (const auto& c : categories(r.partition, options)) {
    out << "  " << c.name << ": " << num(c.totals->tx_count) << " tx "
        << pct(c.totals->tx_count, r.partition.total_tx) << ", "
        << format_dot(c.totals->flux, 2, true) << " DOT "
        << pct(c.totals->flux, r.partition.total_flux) << "\n";
  }

  const auto& t = r.exchanges;
  out << "\nExchanges (by number of nodes)\n"
      << "  label | main addresses | nodes | inter-exchange number | inter-exchange amount\n";
  for (const auto& row : t.rows) {
    out << "  " << row.label << " | " << row.main_address_count << " | "
        << row.node_count << " " << pct(row.node_count, t.total_nodes) << " | "
        << row.inter_exchange.tx_count << " "
        << pct(row.inter_exchange.tx_count, t.total_inter_exchange.tx_count) << " | "
        << format_dot(row.inter_exchange.flux) << " "
        << pct(row.inter_exchange.flux, t.total_inter_exchange.flux) << "\n";
  }

  out << "\nUsers distribution (by cluster size)\n"
      << "  size | clusters | users | avg intra tx | avg intra flux (DOT)\n";
  for (const auto& b : r.histogram.buckets) {
    out << "  " << b.range_label() << " | " << b.cluster_count << " | " << b.user_count
        << " " << pct(b.user_count, r.histogram.total_users) << " | " << avg_tx(b)
        << " | " << avg_flux_dot(b) << "\n";
  }
  return out.str();
}

void save_report(const NetworkReport& r, const ContractedGraph& contracted,
                 const ColorLabels& labels, const std::filesystem::path& dir,
                 const ReportOptions& options) {
  csv::open_output(dir / "report.json") << report_json(r, options);
  csv::open_output(dir / "report.txt") << report_text(r, options);

  const auto plots = dir / "plots";
  {
    auto out = csv::open_output(plots / "partition.csv");
    out << "category,tx_count,flux_planck,tx_pct,flux_pct\n";
    for (const auto& c : categories(r.partition, options)) {
      out << c.name << ',' << c.totals->tx_count << ',' << to_string(c.totals->flux) << ','
          << format_pct(c.totals->tx_count, r.partition.total_tx) << ','
          << format_pct(c.totals->flux, r.partition.total_flux) << '\n';
    }
  }
  {
    auto out = csv::open_output(plots / "exchanges.csv");
    out << "cluster_id,label,node_count,intra_tx_count,intra_flux_planck\n";
    for (const auto& node : contracted.nodes) {
      if (node.color == kUserColor) continue;
      out << node.cluster_id << ',' << csv::escape(label_for(labels, node.color)) << ','
          << node.member_count << ',' << node.intra_tx_count << ','
          << to_string(node.intra_flux) << '\n';
    }
  }
  {
    auto out = csv::open_output(plots / "exchange_edges.csv");
    out << "src_cluster,dst_cluster,src_label,dst_label,flux_planck,multiplicity\n";
    for (const auto& e : contracted.edges) {
      const Color a = contracted.node(e.src).color;
      const Color b = contracted.node(e.dst).color;
      if (a == kUserColor || b == kUserColor) continue;
      out << e.src << ',' << e.dst << ',' << csv::escape(label_for(labels, a)) << ','
          << csv::escape(label_for(labels, b)) << ',' << to_string(e.agg.flux) << ','
          << e.agg.multiplicity << '\n';
    }
  }
  {
    auto out = csv::open_output(plots / "user_cluster_sizes.csv");
    out << "size,cluster_count\n";
    for (const auto& [size, count] : r.histogram.size_counts) {
      out << size << ',' << count << '\n';
    }
  }
}

std::vector<std::uint64_t> parse_bucket_bounds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& field : csv::split(text)) {
    try {
      const Flux v = parse_flux(field);
      if (v > ~std::uint64_t{0}) throw std::invalid_argument("bound out of range");
      out.push_back(static_cast<std::uint64_t>(v));
    } catch (const std::invalid_argument& e) {
      throw Error(ErrorKind::kConfig, "bad bucket list '" + text + "': " + e.what());
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == 0 || (i > 0 && out[i] <= out[i - 1])) {
      throw Error(ErrorKind::kConfig,
                  "bucket bounds must be positive and strictly increasing");
    }
  }
  return out;
}

}  // namespace txg
