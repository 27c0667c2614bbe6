#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netobj/baselines.hpp"
#include "netobj/dataset.hpp"
#include "netobj/detect.hpp"
#include "netobj/infer.hpp"

namespace netobj {

/// Planted-subnetwork generator settings. The planted clique's edges are
/// drawn with a compound-symmetry correlation and a mean shift theta for
/// controls (controls sit higher, cases lower); all other edges are
/// independent noise. Node labels are shuffled so the subnetwork is latent.
struct SimConfig {
  int n = 100;
  int planted_nodes = 20;
  double theta = 1.0;
  double sigma = 0.5;
  double rho_cs = 0.3;
  int n_controls = 30;
  int n_cases = 30;
  double mu1 = 0.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct GeneratedDataset {
  ConnectomeDataset dataset;
  std::vector<long> truth_edges;  // packed ids of the planted clique edges
  std::vector<int> truth_nodes;   // 1-based
};

/// Per-method scores aggregated over replicates.
struct ScoreRow {
  std::string method;
  std::string setting;  // e.g. "30v30 sigma=0.5"
  double edge_fp_mean = 0.0, edge_fp_sd = 0.0;
  double edge_fn_mean = 0.0, edge_fn_sd = 0.0;
  double net_fp_mean = 0.0, net_fp_sd = 0.0;
  double net_fn_mean = 0.0, net_fn_sd = 0.0;
  int replicates = 0;
};

/// Shared analysis settings for the benchmark harnesses.
struct BenchOptions {
  EdgeTestMethod method = EdgeTestMethod::Wilcoxon;
  DetectConfig detect;   // k_max defaults to 8 for the harness
  InferConfig infer;     // M defaults to 199 for the harness
  double bh_q = 0.2;
  LfdrConfig lfdr;
  double nbs_tau = 4.0;
  int replicates = 100;

  BenchOptions() {
    detect.k_max = 8;
    infer.num_permutations = 199;
  }
};

GeneratedDataset generate_dataset(const SimConfig& cfg);

/// FP = |discovered \ truth|, FN = |truth \ discovered|.
std::pair<long, long> score_discovery(const std::vector<long>& discovered,
                                      const std::vector<long>& truth);

/// Union of the edges of the significant subnetworks of a report.
std::vector<long> significant_edges(const InferenceReport& report);

/// Runs every (config, method) cell of the benchmark grid. Methods:
/// "glp", "gep", "bh", "lfdr", "nbs".
std::vector<ScoreRow> run_table1(const std::vector<SimConfig>& grid,
                                 const std::vector<std::string>& methods,
                                 const BenchOptions& options);

struct Type1Result {
  double rate_glp = 0.0;
  double rate_gep = 0.0;
  std::vector<double> glp_global_p;  // per iteration: min subnetwork p (1 if none)
  std::vector<double> gep_global_p;
  int iterations = 0;
};

/// Network-level false positive rate under theta = 0.
Type1Result type1_experiment(const SimConfig& cfg, int iterations, const BenchOptions& options);

}  // namespace netobj
