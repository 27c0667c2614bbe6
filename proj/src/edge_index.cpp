#include "netobj/edge_index.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace netobj {

EdgeIndex::EdgeIndex(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("EdgeIndex: need at least 2 nodes");
  row_offset_.resize(static_cast<std::size_t>(n));
  long off = 0;
  for (int i = 1; i <= n; ++i) {
    row_offset_[static_cast<std::size_t>(i - 1)] = off;
    off += n - i;
  }
}

long EdgeIndex::pack(int i, int j) const {
  if (i < 1 || j <= i || j > n_)
    throw std::invalid_argument("pack: require 1 <= i < j <= n, got (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
  return row_offset_[static_cast<std::size_t>(i - 1)] + (j - i - 1);
}

std::pair<int, int> EdgeIndex::unpack(long edge) const {
  if (edge < 0 || edge >= n_edges())
    throw std::invalid_argument("unpack: edge id out of range");
  // Find the row via the offset table (monotone), then the column.
  auto it = std::upper_bound(row_offset_.begin(), row_offset_.end(), edge);
  int i = static_cast<int>(it - row_offset_.begin());  // 1-based row
  int j = i + 1 + static_cast<int>(edge - row_offset_[static_cast<std::size_t>(i - 1)]);
  return {i, j};
}

std::vector<long> EdgeIndex::induced_edges(const std::vector<int>& nodes) const {
  for (int v : nodes)
    if (v < 1 || v > n_)
      throw std::invalid_argument("induced_edges: node id out of range");
  std::vector<int> sorted(nodes);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<long> out;
  if (sorted.size() < 2) return out;
  out.reserve(sorted.size() * (sorted.size() - 1) / 2);
  for (std::size_t a = 0; a < sorted.size(); ++a)
    for (std::size_t b = a + 1; b < sorted.size(); ++b)
      out.push_back(pack(sorted[a], sorted[b]));
  std::sort(out.begin(), out.end());
  return out;
}

long pack_edge(int i, int j, int n) { return EdgeIndex(n).pack(i, j); }

std::pair<int, int> unpack_edge(long edge, int n) { return EdgeIndex(n).unpack(edge); }

}  // namespace netobj
