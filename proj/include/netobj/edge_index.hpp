#pragma once

#include <utility>
#include <vector>

namespace netobj {

/// Bijection between node pairs (i, j), 1 <= i < j <= n, and linear edge
/// ids 0 .. n(n-1)/2 - 1, ordered lexicographically by (i, j). Node ids are
/// 1-based throughout the library; edge ids are 0-based.
class EdgeIndex {
 public:
  explicit EdgeIndex(int n);

  int n() const { return n_; }
  long n_edges() const { return static_cast<long>(n_) * (n_ - 1) / 2; }

  /// (i, j) -> edge id. Throws std::invalid_argument unless 1 <= i < j <= n.
  long pack(int i, int j) const;

  /// edge id -> (i, j) with i < j.
  std::pair<int, int> unpack(long edge) const;

  /// All pairs within the node set, packed. Fewer than 2 nodes yields an
  /// empty set. Throws if a node is out of range.
  std::vector<long> induced_edges(const std::vector<int>& nodes) const;

 private:
  int n_;
  std::vector<long> row_offset_;  // row_offset_[i-1] = id of edge (i, i+1)
};

/// Convenience wrappers matching the free-function style of the library.
long pack_edge(int i, int j, int n);
std::pair<int, int> unpack_edge(long edge, int n);

}  // namespace netobj
