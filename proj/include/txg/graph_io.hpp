#pragma once

#include <filesystem>

#include "txg/graph.hpp"

namespace txg {

// A graph directory holds nodes.csv (`address`) and edges.csv
// (`sender,recipient,flux_planck,multiplicity`, plus `first_block,last_block`
// when block ranges are tracked).

void save_graph(const AggregatedGraph& graph, const std::filesystem::path& dir);
AggregatedGraph load_graph(const std::filesystem::path& dir);

}  // namespace txg
