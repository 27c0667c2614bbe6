#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "netobj/dataset.hpp"

namespace netobj {

enum class EdgeTestMethod { Wilcoxon, WelchT };

/// Per-edge two-sample testing result: two-sided p-values in (0,1] and the
/// direction sign(median(case) - median(control)) per edge.
struct EdgeTestResult {
  Eigen::VectorXd p_values;
  Eigen::VectorXi signs;  // -1, 0, +1
  EdgeTestMethod method = EdgeTestMethod::Wilcoxon;
};

/// Symmetric edge-evidence matrix, stored once per unordered pair in
/// pack_edge order; w = -log(p) with a floor keeping every weight finite.
struct WeightMatrix {
  int n = 0;
  Eigen::VectorXd w;

  long n_edges() const { return static_cast<long>(n) * (n - 1) / 2; }

  /// Materializes the full symmetric n x n matrix (zero diagonal).
  Eigen::MatrixXd dense() const;

  /// Recovers the per-edge p-values, p = exp(-w).
  Eigen::VectorXd p_values() const { return (-w.array()).exp(); }
};

/// 0.5 * log((1+r)/(1-r)); |r| >= 1 is rejected.
double fisher_z(double r);

/// Two-sided Wilcoxon rank-sum p-value with mid-ranks. Exact enumeration
/// over all C(|x|+|y|, |x|) group assignments when |x|+|y| <= 20 (dynamic
/// program over rank sums); otherwise a normal approximation with
/// tie-corrected variance, continuity correction and an Edgeworth kurtosis
/// term that tightens the small-sample tail.
double wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y);

/// Exact-enumeration branch, any total size (cost grows with total and
/// rank-sum range).
double wilcoxon_exact(std::span<const double> x, std::span<const double> y);

/// Approximation branch, exposed for oracle comparisons.
double wilcoxon_normal_approx(std::span<const double> x, std::span<const double> y);

/// Two-sided Welch t-test p-value with Satterthwaite degrees of freedom.
/// Both variances zero: p = 1 if the means are equal, else the smallest
/// positive double.
double welch_t(std::span<const double> x, std::span<const double> y);

/// Welch t statistic (used by the suprathreshold-component baseline).
double welch_t_statistic(std::span<const double> x, std::span<const double> y);

/// One p-value and sign per edge; deterministic and parallel-safe, results
/// independent of worker count.
EdgeTestResult edgewise_tests(const ConnectomeDataset& dataset, EdgeTestMethod method);

/// Same, from a precomputed edge-major matrix and label vector (avoids
/// rebuilding the matrix inside permutation loops).
EdgeTestResult edgewise_tests(const Eigen::Ref<const Eigen::MatrixXd>& edges_by_subject,
                              const std::vector<int>& labels, EdgeTestMethod method);

/// w = -log(max(p, 1e-300)); a single infinite weight would dominate every
/// sum it enters, so p is floored.
WeightMatrix weights_from_pvalues(const EdgeTestResult& result, int n);

}  // namespace netobj
