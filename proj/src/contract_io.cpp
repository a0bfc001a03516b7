#include "txg/contract_io.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "txg/csv.hpp"
#include "txg/error.hpp"

namespace txg {

namespace fs = std::filesystem;

ColorLabels color_labels(const std::vector<ExchangeCluster>& clusters) {
  ColorLabels labels;
  for (const auto& c : clusters) labels[c.cluster_id] = c.label;
  return labels;
}

std::string label_for(const ColorLabels& labels, Color color) {
  if (color == kUserColor) return "user";
  const auto it = labels.find(color);
  return it != labels.end() ? it->second : "color-" + std::to_string(color);
}

void save_assignment(const ClusterAssignment& assignment, const fs::path& path) {
  auto out = csv::open_output(path);
  out << "address,cluster_id\n";
  for (std::size_t i = 0; i < assignment.accounts.size(); ++i) {
    out << csv::escape(assignment.accounts[i]) << ',' << assignment.cluster_of[i] << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::uint64_t parse_u64(csv::Reader& reader, const std::string& text) {
  try {
    const Flux v = parse_flux(text);
    if (v > ~std::uint64_t{0}) throw std::invalid_argument("integer out of range");
    return static_cast<std::uint64_t>(v);
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }
}

Flux parse_big(csv::Reader& reader, const std::string& text) {
  try {
    return parse_flux(text);
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }
}

}  // namespace

void save_contraction(const Contraction& contraction, const ColorLabels& labels,
                      const GraphStats& source_stats, const fs::path& dir) {
  const ContractedGraph& g = contraction.graph;
  {
    auto out = csv::open_output(dir / "nodes.csv");
    out << "cluster_id,color,label,member_count,intra_flux_planck,intra_tx_count\n";
    for (const auto& n : g.nodes) {
      out << n.cluster_id << ',' << n.color << ',' << csv::escape(label_for(labels, n.color))
          << ',' << n.member_count << ',' << to_string(n.intra_flux) << ','
          << n.intra_tx_count << '\n';
    }
  }
  {
    auto out = csv::open_output(dir / "edges.csv");
    out << "src_cluster,dst_cluster,flux_planck,multiplicity\n";
    for (const auto& e : g.edges) {
      out << e.src << ',' << e.dst << ',' << to_string(e.agg.flux) << ','
          << e.agg.multiplicity << '\n';
    }
  }
  save_assignment(contraction.assignment, dir / "assignment.csv");
  {
    nlohmann::json stats = {
        {"order", source_stats.order},
        {"aggregated_size", source_stats.aggregated_size},
        {"transaction_count", source_stats.transaction_count},
        {"total_flux_planck", to_string(source_stats.total_flux)},
    };
    auto out = csv::open_output(dir / "source_stats.json");
    out << stats.dump(2) << '\n';
  }
  {
    auto out = csv::open_output(dir / "contracted.graphml");
    write_graphml(g, labels, out);
  }
  {
    auto out = csv::open_output(dir / "contracted.dot");
    write_dot(g, labels, out);
  }
}

ContractedArtifacts load_contraction(const fs::path& dir) {
  ContractedArtifacts art;
  ContractedGraph& g = art.contraction.graph;
  std::vector<std::string> row;
  {
    csv::Reader reader(dir / "nodes.csv",
                       {"cluster_id", "color", "label", "member_count",
                        "intra_flux_planck", "intra_tx_count"});
    while (reader.next(row)) {
      ContractedNode n;
      n.cluster_id = static_cast<ClusterId>(parse_u64(reader, row[0]));
      if (n.cluster_id != g.nodes.size() + 1) {
        reader.fail("cluster ids must be 1..K in order");
      }
      n.color = static_cast<Color>(parse_u64(reader, row[1]));
      n.member_count = parse_u64(reader, row[3]);
      n.intra_flux = parse_big(reader, row[4]);
      n.intra_tx_count = parse_u64(reader, row[5]);
      if (n.color != kUserColor) art.labels[n.color] = row[2];
      g.nodes.push_back(n);
    }
  }
  {
    csv::Reader reader(dir / "edges.csv",
                       {"src_cluster", "dst_cluster", "flux_planck", "multiplicity"});
    while (reader.next(row)) {
      ContractedEdge e;
      e.src = static_cast<ClusterId>(parse_u64(reader, row[0]));
      e.dst = static_cast<ClusterId>(parse_u64(reader, row[1]));
      if (e.src == 0 || e.dst == 0 || e.src > g.order() || e.dst > g.order()) {
        reader.fail("edge references unknown cluster");
      }
      e.agg.flux = parse_big(reader, row[2]);
      e.agg.multiplicity = parse_u64(reader, row[3]);
      g.edges.push_back(e);
    }
  }
  {
    csv::Reader reader(dir / "assignment.csv", {"address", "cluster_id"});
    while (reader.next(row)) {
      const auto id = static_cast<ClusterId>(parse_u64(reader, row[1]));
      if (id == 0 || id > g.order()) reader.fail("unknown cluster id");
      art.contraction.assignment.accounts.push_back(row[0]);
      art.contraction.assignment.cluster_of.push_back(id);
    }
  }
  {
    const fs::path path = dir / "source_stats.json";
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    try {
      const auto j = nlohmann::json::parse(in);
      art.source_stats.order = j.at("order").get<std::uint64_t>();
      art.source_stats.aggregated_size = j.at("aggregated_size").get<std::uint64_t>();
      art.source_stats.transaction_count = j.at("transaction_count").get<std::uint64_t>();
      art.source_stats.total_flux = parse_flux(j.at("total_flux_planck").get<std::string>());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kMalformedRecord, path.string() + ": " + e.what());
    }
  }
  return art;
}

void write_graphml(const ContractedGraph& graph, const ColorLabels& labels,
                   std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"int\"/>\n"
         "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
         "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"long\"/>\n"
         "  <key id=\"intra_tx\" for=\"node\" attr.name=\"intra_tx_count\" attr.type=\"long\"/>\n"
         "  <key id=\"intra_flux\" for=\"node\" attr.name=\"intra_flux_planck\" attr.type=\"string\"/>\n"
         "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
         "  <key id=\"flux\" for=\"edge\" attr.name=\"flux_planck\" attr.type=\"string\"/>\n"
         "  <key id=\"multiplicity\" for=\"edge\" attr.name=\"multiplicity\" attr.type=\"long\"/>\n"
         "  <graph id=\"contracted\" edgedefault=\"directed\">\n";
  for (const auto& n : graph.nodes) {
    out << "    <node id=\"n" << n.cluster_id << "\">"
        << "<data key=\"color\">" << n.color << "</data>"
        << "<data key=\"label\">" << xml_escape(label_for(labels, n.color)) << "</data>"
        << "<data key=\"size\">" << n.member_count << "</data>"
        << "<data key=\"intra_tx\">" << n.intra_tx_count << "</data>"
        << "<data key=\"intra_flux\">" << to_string(n.intra_flux) << "</data>"
        << "</node>\n";
  }
  for (const auto& e : graph.edges) {
    out << "    <edge source=\"n" << e.src << "\" target=\"n" << e.dst << "\">"
        << "<data key=\"weight\">" << format_dot(e.agg.flux, 10) << "</data>"
        << "<data key=\"flux\">" << to_string(e.agg.flux) << "</data>"
        << "<data key=\"multiplicity\">" << e.agg.multiplicity << "</data>"
        << "</edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(const ContractedGraph& graph, const ColorLabels& labels,
               std::ostream& out) {
  out << "digraph contracted {\n";
  for (const auto& n : graph.nodes) {
    out << "  n" << n.cluster_id << " [label=\"" << dot_escape(label_for(labels, n.color))
        << "\", color_id=" << n.color << ", size=" << n.member_count << "];\n";
  }
  for (const auto& e : graph.edges) {
    out << "  n" << e.src << " -> n" << e.dst << " [weight=" << format_dot(e.agg.flux, 10)
        << ", multiplicity=" << e.agg.multiplicity << "];\n";
  }
  out << "}\n";
}

}  // namespace txg
