#pragma once

#include <Eigen/Core>
#include <vector>

namespace netobj {

/// Rich-club coefficient phi(k): density of edges among nodes with degree
/// strictly greater than k. Returns 1.0 when at most one node survives the
/// threshold, so downstream reports never see NaN. Adjacency must be a
/// binary symmetric matrix with zero diagonal.
double rich_club_coefficient(const Eigen::Ref<const Eigen::MatrixXd>& adjacency, int k);

/// phi(k) for k = 0 .. max degree.
std::vector<double> rich_club_profile(const Eigen::Ref<const Eigen::MatrixXd>& adjacency);

/// Exact binomial upper tail P(X >= m), X ~ Binomial(trials, p), summed in
/// log space.
double binomial_tail(int trials, double p, int m);

/// Dice-style agreement 2|A∩B| / (|A| + |B|) between two edge sets; 0 when
/// both are empty.
double positive_agreement(const std::vector<long>& a, const std::vector<long>& b);

}  // namespace netobj
