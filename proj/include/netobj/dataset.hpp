#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace netobj {

/// One subject: id, binary group label (0 = control, 1 = case) and the
/// edge-vectorized connectivity values in pack_edge order.
struct Subject {
  std::string id;
  int label = 0;
  Eigen::VectorXd edges;
};

/// Group-level connectome data: n nodes, one edge vector of length
/// n(n-1)/2 per subject. Immutable after validate(); all operations on it
/// are pure.
struct ConnectomeDataset {
  int n = 0;
  std::vector<Subject> subjects;

  long n_edges() const { return static_cast<long>(n) * (n - 1) / 2; }

  /// Checks edge-vector lengths, finiteness, binary labels and that both
  /// groups are nonempty. Throws std::invalid_argument on violation.
  void validate() const;

  /// Edge-major matrix (n_edges x n_subjects); column s is subject s.
  Eigen::MatrixXd edges_matrix() const;

  /// Subject labels in subject order.
  std::vector<int> labels() const;

  int count_label(int label) const;
};

}  // namespace netobj
