#pragma once

#include <optional>
#include <vector>

namespace netobj {

enum class TopologyKind { CliqueInduced, CustomEdgeSet };

/// Descriptive topology metrics attached to a detected subnetwork.
struct TopologyMetrics {
  /// Fraction of the subnetwork's edges with univariate p < p0.
  double suprathreshold_density = 0.0;
  /// Rich-club coefficients phi(k) of the suprathreshold subgraph,
  /// k = 0 .. max degree.
  std::vector<double> rich_club;
};

/// A detected network object: node set, edge set, topology descriptor and
/// (once tested) its statistic and permutation p-value.
struct Subnetwork {
  std::vector<int> nodes;   // 1-based, sorted
  std::vector<long> edges;  // packed edge ids, sorted
  TopologyKind kind = TopologyKind::CliqueInduced;
  TopologyMetrics topology;
  std::optional<double> statistic;
  std::optional<double> p_value;
};

/// Node partition: assignment[v-1] is the cluster id (1..K) of node v.
/// Clusters may be empty under exact ties; every node is assigned exactly
/// once by construction.
struct Partition {
  std::vector<int> assignment;
  int K = 1;

  int n() const { return static_cast<int>(assignment.size()); }

  std::vector<std::vector<int>> clusters() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(K));
    for (int v = 1; v <= n(); ++v) {
      int c = assignment[static_cast<std::size_t>(v - 1)];
      out[static_cast<std::size_t>(c - 1)].push_back(v);
    }
    return out;
  }
};

}  // namespace netobj
