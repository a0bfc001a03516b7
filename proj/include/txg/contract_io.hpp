#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "txg/contract.hpp"

namespace txg {

/// Display label per exchange colour.
using ColorLabels = std::map<Color, std::string>;

ColorLabels color_labels(const std::vector<ExchangeCluster>& clusters);
/// "user" for colour 0, the mapped label, else "color-<c>".
std::string label_for(const ColorLabels& labels, Color color);

// A contracted-graph directory holds:
//   nodes.csv          cluster_id,color,label,member_count,intra_flux_planck,intra_tx_count
//   edges.csv          src_cluster,dst_cluster,flux_planck,multiplicity
//   assignment.csv     address,cluster_id
//   source_stats.json  statistics of the graph that was contracted
//   contracted.graphml, contracted.dot

struct ContractedArtifacts {
  Contraction contraction;
  ColorLabels labels;
  GraphStats source_stats;
};

void save_contraction(const Contraction& contraction, const ColorLabels& labels,
                      const GraphStats& source_stats,
                      const std::filesystem::path& dir);
ContractedArtifacts load_contraction(const std::filesystem::path& dir);

void save_assignment(const ClusterAssignment& assignment,
                     const std::filesystem::path& path);

/// Node size = member_count; edge weight = flux in DOT.
void write_graphml(const ContractedGraph& graph, const ColorLabels& labels,
                   std::ostream& out);
void write_dot(const ContractedGraph& graph, const ColorLabels& labels,
               std::ostream& out);

}  // namespace txg
