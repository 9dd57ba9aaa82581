#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stinla/inference.hpp"
#include "stinla/simulate.hpp"

namespace stinla {

/// Graph file: first line n_nodes, then one line per node
/// "node_index neighbor_count neighbor_indices...", 1-based.
GraphSpec parse_graph_file(const std::string& path);
GraphSpec parse_graph(std::istream& in, const std::string& name = "<graph>");
void write_graph_file(const std::string& path, const GraphSpec& graph);

/// Data CSV with header "time,space,y,E[,z1..zK]" and 1-based indices.
struct DataTable {
  CountData data;
  Matrix covariates;  // d x K
  Index n = 0;        // max time index
  Index max_space = 0;
};

DataTable parse_data_csv(const std::string& path, const std::string& offset_column = "E");
DataTable parse_data(std::istream& in, const std::string& offset_column, const std::string& name = "<data>");
void write_data_csv(const std::string& path, const CountData& data);

/// One model block from the config grammar.
struct BlockConfig {
  std::string type;  // intercept | rw1 | rw2 | iid | besag | interaction1..4
  std::optional<Index> rankdef;
  std::string structure_file;
};

struct RunConfig {
  std::vector<BlockConfig> blocks;
  std::string likelihood = "poisson";
  std::string offset_column = "E";
  std::string strategy = "GA";
  PriorSpec prior;
  int threads = 1;
  std::uint64_t seed = 0;
  double intercept_prec = 0.001;
  double drop_threshold = 2.5;
  double z_step = 1.0;
  int max_newton_iter = 50;

  void validate() const;
  int interaction_type() const;  // 1..4
  int temporal_order() const;    // from the rw block
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config(std::istream& in, const std::string& name = "<config>");

/// Dense symmetric structure override: first line dim, then dim rows.
SymMatrix parse_structure_file(const std::string& path);

struct FitArtifacts {
  std::string marginals_csv;
  std::string hyper_csv;
  std::string criteria_json;
  std::string diagnostics_json;
};

FitArtifacts write_fit_artifacts(const std::string& out_dir, const LatentModel& model, const FitResult& result);
void write_truth_csv(const std::string& path, const LatentLayout& layout, const Vector& truth);

/// Tidy long-format posterior summaries of the temporal and spatial effects
/// extracted from a written marginals.csv.
void write_plot_csvs(const std::string& marginals_csv, const std::string& out_dir);

std::string format_double(double value);  // round-trip exact

}  // namespace stinla
