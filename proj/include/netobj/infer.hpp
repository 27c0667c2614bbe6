#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "netobj/dataset.hpp"
#include "netobj/detect.hpp"
#include "netobj/edge_stats.hpp"
#include "netobj/subnetwork.hpp"

namespace netobj {

enum class StatisticKind { FisherChernoff, Scan };

struct InferConfig {
  int num_permutations = 1000;  // M
  double alpha = 0.05;
  StatisticKind statistic = StatisticKind::FisherChernoff;
  double p0 = 0.05;                           // suprathreshold cutoff for the scan statistic
  std::vector<int> omnibus_gammas = {1, 2, 3, 4, 5, 6, 7, 8};
  bool omnibus_gamma_inf = true;
  int omnibus_B = 1000;
  std::uint64_t seed = 20240915;

  void validate() const;
};

/// Max test statistics of the permutation iterations, in iteration order.
/// For the scan statistic values are stored on the log scale; iterations
/// with no qualifying subnetwork carry the kind's floor value.
struct NullDistribution {
  std::vector<double> values;
  StatisticKind kind = StatisticKind::FisherChernoff;
};

struct InferenceReport {
  DetectionResult detection;               // observed (unpermuted) detection
  std::vector<Subnetwork> subnetworks;     // observed, with statistic and p-value
  NullDistribution null;
  std::vector<std::size_t> significant;    // indices into subnetworks
  double alpha = 0.05;
  double null_quantile = 0.0;              // empirical (1 - alpha) quantile of the null
  bool gate_applied = false;               // GEP only
  bool gate_passed = true;
  double gate_p = 1.0;
};

/// Combined-evidence statistic of one subnetwork from its edge p-values:
/// xbar = mean(-log p); returns |E_k| * (xbar - 1 - log xbar) when
/// xbar >= 1, else 0. A closed-form lower bound on -log of the
/// chi-square upper tail at -2 sum log p with df = 2|E_k|.
double fisher_chernoff_stat(const std::vector<double>& p_values_of_subnetwork);

/// Suprathreshold concentration contrast
/// (N1in/Nin)^N1in * (N1out/Nout)^N1out, with 0^0 = 1, zero when the inside
/// proportion does not exceed the outside one. Requires at least one edge
/// outside the subnetwork.
double scan_stat(const std::vector<long>& subnetwork_edges, const Eigen::VectorXd& p_values,
                 double p0);

/// log(scan_stat); indicator-false maps to the scan floor value so that
/// stored statistics stay finite and ordered.
double log_scan_stat(const std::vector<long>& subnetwork_edges, const Eigen::VectorXd& p_values,
                     double p0);

/// Floor value stored when an iteration detects nothing (or the scan
/// indicator fails).
double statistic_floor(StatisticKind kind);

/// Add-one permutation p-value: (1 + #{null >= T0}) / (M + 1).
double permutation_pvalue(double t0, const NullDistribution& null);

/// Group-label permutation test: per iteration, shuffle labels, rerun
/// edge tests -> weights -> K selection, store the max statistic over the
/// detected subnetworks. Observed subnetworks are tested against that
/// null-max distribution, which adjusts for multiplicity and selection.
InferenceReport glp_test(const ConnectomeDataset& dataset, EdgeTestMethod method,
                         const DetectConfig& detect_cfg, const InferConfig& infer_cfg);

/// Adaptive sum-of-powered-score omnibus p-value for "any differential
/// edge at all". Scores are standardized mean group differences; one
/// label-permutation set is reused across all gamma.
double spu_omnibus(const ConnectomeDataset& dataset, const InferConfig& infer_cfg);

/// Graph-edge permutation test gated by the omnibus test: weights computed
/// once, each iteration shuffles the weight vector across edge positions
/// and reruns K selection.
InferenceReport gep_test(const ConnectomeDataset& dataset, EdgeTestMethod method,
                         const DetectConfig& detect_cfg, const InferConfig& infer_cfg);

/// Uniform random permutation of the packed weight vector (Fisher-Yates);
/// the multiset of weights is preserved exactly.
WeightMatrix edge_permute(const WeightMatrix& W, std::uint64_t seed, std::uint64_t stream);

}  // namespace netobj
