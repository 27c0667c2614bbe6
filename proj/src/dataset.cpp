#include "netobj/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace netobj {

void ConnectomeDataset::validate() const {
  if (n < 2) throw std::invalid_argument("dataset: need at least 2 nodes");
  if (subjects.empty()) throw std::invalid_argument("dataset: no subjects");
  const long m = n_edges();
  int zeros = 0, ones = 0;
  for (const auto& s : subjects) {
    if (s.label != 0 && s.label != 1)
      throw std::invalid_argument("dataset: subject '" + s.id + "' has non-binary label");
    (s.label == 0 ? zeros : ones)++;
    if (s.edges.size() != m)
      throw std::invalid_argument("dataset: subject '" + s.id + "' edge vector length " +
                                  std::to_string(s.edges.size()) + ", expected " +
                                  std::to_string(m));
    for (long e = 0; e < m; ++e)
      if (!std::isfinite(s.edges[e]))
        throw std::invalid_argument("dataset: subject '" + s.id + "' has non-finite edge value");
  }
  if (zeros == 0 || ones == 0)
    throw std::invalid_argument("dataset: both groups must be nonempty");
}

Eigen::MatrixXd ConnectomeDataset::edges_matrix() const {
  Eigen::MatrixXd m(n_edges(), static_cast<long>(subjects.size()));
  for (std::size_t s = 0; s < subjects.size(); ++s) m.col(static_cast<long>(s)) = subjects[s].edges;
  return m;
}

std::vector<int> ConnectomeDataset::labels() const {
  std::vector<int> out;
  out.reserve(subjects.size());
  for (const auto& s : subjects) out.push_back(s.label);
  return out;
}

int ConnectomeDataset::count_label(int label) const {
  int c = 0;
  for (const auto& s : subjects) c += (s.label == label);
  return c;
}

}  // namespace netobj
