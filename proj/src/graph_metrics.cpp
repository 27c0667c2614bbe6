#include "netobj/graph_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "netobj/special.hpp"

namespace netobj {

namespace {

std::vector<int> degrees_of(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  const long n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("rich_club: adjacency must be square");
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (long i = 0; i < n; ++i) {
    if (a(i, i) != 0.0)
      throw std::invalid_argument("rich_club: adjacency diagonal must be zero");
    for (long j = i + 1; j < n; ++j) {
      const double v = a(i, j);
      if (v != a(j, i))
        throw std::invalid_argument("rich_club: adjacency must be symmetric");
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("rich_club: adjacency must be binary");
      if (v != 0.0) {
        deg[static_cast<std::size_t>(i)]++;
        deg[static_cast<std::size_t>(j)]++;
      }
    }
  }
  return deg;
}

double phi_for(const Eigen::Ref<const Eigen::MatrixXd>& a, const std::vector<int>& deg, int k) {
  const long n = a.rows();
  std::vector<long> keep;
  for (long i = 0; i < n; ++i)
    if (deg[static_cast<std::size_t>(i)] > k) keep.push_back(i);
  const long nk = static_cast<long>(keep.size());
  if (nk <= 1) return 1.0;
  long edges = 0;
  for (std::size_t x = 0; x < keep.size(); ++x)
    for (std::size_t y = x + 1; y < keep.size(); ++y)
      if (a(keep[x], keep[y]) != 0.0) ++edges;
  return 2.0 * static_cast<double>(edges) / (static_cast<double>(nk) * (nk - 1));
}

}  // namespace

double rich_club_coefficient(const Eigen::Ref<const Eigen::MatrixXd>& adjacency, int k) {
  if (k < 0) throw std::invalid_argument("rich_club: k must be >= 0");
  return phi_for(adjacency, degrees_of(adjacency), k);
}

std::vector<double> rich_club_profile(const Eigen::Ref<const Eigen::MatrixXd>& adjacency) {
  const auto deg = degrees_of(adjacency);
  int dmax = 0;
  for (int d : deg) dmax = std::max(dmax, d);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(dmax) + 1);
  for (int k = 0; k <= dmax; ++k) out.push_back(phi_for(adjacency, deg, k));
  return out;
}

double binomial_tail(int trials, double p, int m) {
  if (trials < 0 || m < 0 || m > trials)
    throw std::invalid_argument("binomial_tail: require 0 <= m <= trials");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial_tail: p must be in [0,1]");
  if (m == 0) return 1.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // log-sum-exp over k = m .. trials
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(trials - m + 1));
  for (int k = m; k <= trials; ++k) {
    const double t = log_choose(trials, k) + k * lp + (trials - k) * lq;
    terms.push_back(t);
    lmax = std::max(lmax, t);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - lmax);
  const double v = std::exp(lmax + std::log(s));
  return std::min(v, 1.0);
}

double positive_agreement(const std::vector<long>& a, const std::vector<long>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::set<long> sa(a.begin(), a.end());
  std::set<long> sb(b.begin(), b.end());
  long common = 0;
  for (long e : sa) common += sb.count(e);
  return 2.0 * static_cast<double>(common) /
         (static_cast<double>(sa.size()) + static_cast<double>(sb.size()));
}

}  // namespace netobj
