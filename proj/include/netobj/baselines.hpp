#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "netobj/dataset.hpp"

namespace netobj {

enum class RejectionMethod { BhFdr, StoreyQ, LocalFdr, Nbs };

struct RejectionSet {
  std::vector<long> rejected;  // edge ids
  double threshold = 0.0;      // q or cutoff used
  RejectionMethod method = RejectionMethod::BhFdr;
};

struct LfdrConfig {
  int bins = 120;
  // degrees of freedom of the log-density basis (natural cubic spline with
  // this many basis functions; a global polynomial of this degree bleeds
  // the signal spike into the null shoulder and over-rejects)
  int poly_degree = 7;
  bool empirical_null = false;  // default: theoretical N(0,1) null
  double cutoff = 0.2;

  void validate() const;
};

struct LfdrResult {
  Eigen::VectorXd fdr;  // per input p-value, in [0,1]
  RejectionSet rejections;
  double pi0 = 1.0;
};

struct NbsComponent {
  std::vector<int> nodes;   // 1-based
  std::vector<long> edges;  // packed ids of suprathreshold edges
  double p_value = 1.0;
};

struct NbsResult {
  std::vector<NbsComponent> components;  // sorted by edge count, descending
  double tau = 0.0;
  long max_component_edges = 0;
};

/// Benjamini-Hochberg step-up at level q.
RejectionSet bh_fdr(const Eigen::VectorXd& p_values, double q);

/// Storey q-values with the lambda = 0.5 plug-in estimate of pi0.
Eigen::VectorXd storey_qvalues(const Eigen::VectorXd& p_values);

/// Efron-style local false discovery rate: p-values map to one-sided
/// z-scores, the marginal density comes from a Poisson regression of
/// histogram counts on a polynomial basis, the null is N(0,1) (or an
/// empirically recentred normal), and edges with fdr <= cutoff are
/// rejected.
LfdrResult local_fdr(const Eigen::VectorXd& p_values, const LfdrConfig& cfg);

/// Suprathreshold-component baseline: per-edge Welch t statistics,
/// components of the |t| >= tau graph, family-wise p-values from
/// group-label permutation of the maximum component edge count.
NbsResult nbs(const ConnectomeDataset& dataset, double tau, int num_permutations,
              std::uint64_t seed);

}  // namespace netobj
