#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "netobj/dataset.hpp"
#include "netobj/edge_stats.hpp"
#include "netobj/subnetwork.hpp"

namespace netobj {

struct DetectConfig {
  double lambda0 = 0.5;       // size-penalty exponent, in (0,1)
  int k_min = 1;
  int k_max = 0;              // 0 = min(n-1, 30)
  int min_cluster_nodes = 3;  // smaller clusters are not candidate subnetworks
  int kmeans_restarts = 20;
  int kmeans_max_iter = 100;
  int refine_passes = 10;     // greedy node-move polish of each K's partition
  int random_restarts = 10;   // extra random starting partitions per K
  double topo_p0 = 0.05;      // threshold for descriptive topology metrics
  std::uint64_t seed = 12345;

  void validate(int n) const;
  int resolved_k_max(int n) const;
};

/// Detection output: the node partition at the selected K, per-cluster mean
/// edge weight, the selection criterion value and the clusters that qualify
/// as candidate subnetworks.
struct DetectionResult {
  Partition partition;
  int k_selected = 1;
  double objective = 0.0;
  std::vector<double> per_cluster_quality;  // sum(w)/|E_k| per cluster, 0 if no edges
  std::vector<Subnetwork> subnetworks;
};

/// Criterion value of a partition: sum over clusters of
/// exp(log sum(w) - lambda0 * log |E_k|), where E_k is the set of all node
/// pairs within cluster k. Clusters with no edges, zero weight mass or
/// fewer than min_cluster_nodes nodes contribute 0; the size floor keeps
/// the two-node degenerate optimum (a single edge scoring its full weight
/// unpenalized) out of the selection objective.
double objective_value(const WeightMatrix& W, const Partition& partition, double lambda0,
                       int min_cluster_nodes = 1);

/// Spectral partition into K clusters: unnormalized Laplacian L = D - W,
/// rows of the K smallest-eigenvalue eigenvectors clustered by seeded
/// k-means. K = 1 returns the trivial partition. Under exact ties (e.g.
/// W = 0) the returned partition is one valid choice.
Partition ratio_cut_partition(const WeightMatrix& W, int K, const DetectConfig& config);

/// Grid search over K maximizing the criterion; ties break toward the
/// smaller K. Each K's spectral partition is polished by greedy node moves
/// against the criterion before scoring. Clusters below min_cluster_nodes
/// (or with zero weight mass) stay in the partition but are not returned
/// as subnetworks.
DetectionResult select_k(const WeightMatrix& W, const DetectConfig& config);

/// Greedy single-node moves between clusters while the criterion improves;
/// deterministic sweep order, at most max_passes sweeps. The criterion's
/// size floor steers the moves, so growing through and shrinking into
/// sub-minimum sizes happens only when it pays off overall.
Partition refine_partition(const WeightMatrix& W, Partition partition, double lambda0,
                           int max_passes, int min_cluster_nodes);

/// Full pipeline: edgewise tests -> weights -> select_k, with descriptive
/// topology metrics attached to each subnetwork.
DetectionResult extract_subnetworks(const ConnectomeDataset& dataset, EdgeTestMethod method,
                                    const DetectConfig& config);

/// Attaches suprathreshold density and rich-club profile computed from the
/// per-edge p-values at threshold p0.
void attach_topology_metrics(Subnetwork& sub, const Eigen::VectorXd& p_values, int n,
                             double p0);

namespace detail {

/// Seeded k-means++ with restarts; returns 0-based labels. Deterministic
/// for a fixed (points, k, restarts, seed).
std::vector<int> kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, int restarts,
                        int max_iter, std::uint64_t seed);

/// Converged labels of every restart (same seeding sequence as kmeans).
std::vector<std::vector<int>> kmeans_candidates(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                                int k, int restarts, int max_iter,
                                                std::uint64_t seed);

/// Eigenvectors of the K smallest eigenvalues of L = D - W as columns.
Eigen::MatrixXd spectral_embedding(const WeightMatrix& W, int k);

}  // namespace detail

}  // namespace netobj
