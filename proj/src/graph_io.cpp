#include "txg/graph_io.hpp"

#include <algorithm>
#include <stdexcept>

#include "txg/csv.hpp"
#include "txg/error.hpp"

namespace txg {

namespace fs = std::filesystem;

void save_graph(const AggregatedGraph& graph, const fs::path& dir) {
  auto nodes = csv::open_output(dir / "nodes.csv");
  nodes << "address\n";
  for (const auto& a : graph.accounts()) nodes << csv::escape(a) << '\n';

  auto edges = csv::open_output(dir / "edges.csv");
  edges << "sender,recipient,flux_planck,multiplicity";
  if (graph.tracks_block_range()) edges << ",first_block,last_block";
  edges << '\n';
  for (const Edge& e : graph.edges()) {
    edges << csv::escape(graph.account(e.src)) << ','
          << csv::escape(graph.account(e.dst)) << ',' << to_string(e.agg.flux)
          << ',' << e.agg.multiplicity;
    if (graph.tracks_block_range()) {
      edges << ',' << e.first_block << ',' << e.last_block;
    }
    edges << '\n';
  }
  if (!nodes || !edges) throw Error(ErrorKind::kIo, "write failed in " + dir.string());
}

AggregatedGraph load_graph(const fs::path& dir) {
  std::vector<AccountId> accounts;
  {
    csv::Reader reader(dir / "nodes.csv", {"address"});
    std::vector<std::string> row;
    while (reader.next(row)) accounts.push_back(row[0]);
  }
  std::sort(accounts.begin(), accounts.end());
  if (std::adjacent_find(accounts.begin(), accounts.end()) != accounts.end()) {
    throw Error(ErrorKind::kMalformedRecord, "duplicate account in nodes.csv");
  }

  csv::Reader reader(dir / "edges.csv",
                     {"sender", "recipient", "flux_planck", "multiplicity"});
  const bool blocks = reader.columns().size() >= 6 &&
                      reader.columns()[4] == "first_block" &&
                      reader.columns()[5] == "last_block";
  auto lookup = [&](const std::string& a) {
    const auto it = std::lower_bound(accounts.begin(), accounts.end(), a);
    if (it == accounts.end() || *it != a) {
      reader.fail("edge endpoint '" + a + "' missing from nodes.csv");
    }
    return static_cast<NodeId>(it - accounts.begin());
  };
  std::vector<Edge> edges;
  std::vector<std::string> row;
  while (reader.next(row)) {
    Edge e;
    e.src = lookup(row[0]);
    e.dst = lookup(row[1]);
    try {
      e.agg.flux = parse_flux(row[2]);
      e.agg.multiplicity = static_cast<std::uint64_t>(parse_flux(row[3]));
      if (blocks) {
        e.first_block = static_cast<std::uint64_t>(parse_flux(row[4]));
        e.last_block = static_cast<std::uint64_t>(parse_flux(row[5]));
      }
    } catch (const std::invalid_argument& ex) {
      reader.fail(ex.what());
    }
    edges.push_back(e);
  }
  try {
    return AggregatedGraph::from_parts(std::move(accounts), std::move(edges), blocks);
  } catch (const Error& ex) {
    throw Error(ErrorKind::kMalformedRecord, dir.string() + ": " + ex.what());
  }
}

}  // namespace txg
