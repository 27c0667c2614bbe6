#include "netobj/edge_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "netobj/parallel.hpp"
#include "netobj/special.hpp"

namespace netobj {

namespace {

constexpr double kPFloor = 1e-300;

struct RankSummary {
  std::vector<double> midranks;  // pooled order
  std::vector<int> doubled;      // 2 * midrank, exact integers
  double w_x = 0.0;              // rank sum of the x sample
  int m = 0, n = 0, total = 0;
};

// Pools x and y, assigns mid-ranks, accumulates the x rank sum.
RankSummary rank_pooled(std::span<const double> x, std::span<const double> y) {
  RankSummary rs;
  rs.m = static_cast<int>(x.size());
  rs.n = static_cast<int>(y.size());
  rs.total = rs.m + rs.n;
  std::vector<std::pair<double, int>> pooled;  // value, 1 if from x
  pooled.reserve(static_cast<std::size_t>(rs.total));
  for (double v : x) pooled.emplace_back(v, 1);
  for (double v : y) pooled.emplace_back(v, 0);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  rs.midranks.resize(static_cast<std::size_t>(rs.total));
  rs.doubled.resize(static_cast<std::size_t>(rs.total));
  int i = 0;
  while (i < rs.total) {
    int j = i;
    while (j + 1 < rs.total && pooled[static_cast<std::size_t>(j + 1)].first ==
                                   pooled[static_cast<std::size_t>(i)].first)
      ++j;
    const double mid = 0.5 * (i + j) + 1.0;  // average of 1-based ranks i+1..j+1
    for (int k = i; k <= j; ++k) {
      rs.midranks[static_cast<std::size_t>(k)] = mid;
      rs.doubled[static_cast<std::size_t>(k)] = i + j + 2;
      if (pooled[static_cast<std::size_t>(k)].second) rs.w_x += mid;
    }
    i = j + 1;
  }
  return rs;
}

// Lower tail of the standardized rank sum with the Edgeworth kurtosis term
// applied as an exponential tilt: second-order equal to the additive form
// but positive everywhere (the additive form goes negative in far tails).
double edgeworth_cdf(double z, double gamma2) {
  const double base = normal_cdf(z);
  if (base <= kPFloor || base >= 1.0) return std::clamp(base, kPFloor, 1.0);
  const double corr = -normal_pdf(z) * (gamma2 / 24.0) * (z * z * z - 3.0 * z);
  const double tilt = std::clamp(corr / base, -40.0, 40.0);
  return std::clamp(base * std::exp(tilt), kPFloor, 1.0);
}

double clamp_p(double p) { return std::clamp(p, kPFloor, 1.0); }

double median_of(std::vector<double>& v) {
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  double hi = v[k];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(k));
  return 0.5 * (lo + hi);
}

}  // namespace

double fisher_z(double r) {
  if (!(std::fabs(r) < 1.0))
    throw std::invalid_argument("fisher_z: |r| must be < 1");
  return 0.5 * std::log((1.0 + r) / (1.0 - r));
}

double wilcoxon_exact(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: samples must be nonempty");
  const RankSummary rs = rank_pooled(x, y);
  const int m = rs.m, total = rs.total;
  // Count subsets of size m by doubled-rank sum. Counts stay far below
  // 2^64 for the sizes this branch is used at.
  int smax = 0;
  for (int d : rs.doubled) smax += d;
  std::vector<std::vector<unsigned long long>> ways(
      static_cast<std::size_t>(m + 1),
      std::vector<unsigned long long>(static_cast<std::size_t>(smax + 1), 0));
  ways[0][0] = 1;
  for (int it = 0; it < total; ++it) {
    const int d = rs.doubled[static_cast<std::size_t>(it)];
    for (int j = std::min(it + 1, m); j >= 1; --j) {
      auto& row = ways[static_cast<std::size_t>(j)];
      const auto& prev = ways[static_cast<std::size_t>(j - 1)];
      for (int s = smax; s >= d; --s) row[static_cast<std::size_t>(s)] += prev[static_cast<std::size_t>(s - d)];
    }
  }
  const long long w2 = std::llround(2.0 * rs.w_x);
  unsigned long long below = 0, above = 0, totalways = 0;
  for (int s = 0; s <= smax; ++s) {
    const unsigned long long c = ways[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
    totalways += c;
    if (s <= w2) below += c;
    if (s >= w2) above += c;
  }
  const double tail = static_cast<double>(std::min(below, above)) / static_cast<double>(totalways);
  return clamp_p(std::min(1.0, 2.0 * tail));
}

double wilcoxon_normal_approx(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: samples must be nonempty");
  const RankSummary rs = rank_pooled(x, y);
  const double m = rs.m, n = rs.n, N = rs.total;
  const double mu = m * (N + 1.0) / 2.0;
  // Finite-population variance of the rank sum; exact under ties and equal
  // to mn(N+1)/12 without them.
  double rbar = (N + 1.0) / 2.0;
  double popvar = 0.0;
  for (double r : rs.midranks) popvar += (r - rbar) * (r - rbar);
  popvar /= N;
  const double var = (N > 1.0) ? m * n / (N - 1.0) * popvar : 0.0;
  if (var <= 0.0) return 1.0;
  const double sd = std::sqrt(var);
  const double gamma2 =
      -1.2 * (m * m + n * n + m * n + m + n) / (m * n * (N + 1.0));
  const double p_lo = edgeworth_cdf((rs.w_x + 0.5 - mu) / sd, gamma2);
  // upper tail via the mirrored lower tail (distribution symmetric up to ties)
  const double p_hi = edgeworth_cdf(-(rs.w_x - 0.5 - mu) / sd, gamma2);
  return clamp_p(std::min(1.0, 2.0 * std::min(p_lo, p_hi)));
}

double wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: samples must be nonempty");
  if (x.size() + y.size() <= 20) return wilcoxon_exact(x, y);
  return wilcoxon_normal_approx(x, y);
}

double welch_t_statistic(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2)
    throw std::invalid_argument("welch_t: need at least 2 observations per sample");
  const double m = static_cast<double>(x.size()), n = static_cast<double>(y.size());
  double mx = 0.0, my = 0.0;
  for (double v : x) mx += v;
  for (double v : y) my += v;
  mx /= m;
  my /= n;
  double vx = 0.0, vy = 0.0;
  for (double v : x) vx += (v - mx) * (v - mx);
  for (double v : y) vy += (v - my) * (v - my);
  vx /= (m - 1.0);
  vy /= (n - 1.0);
  const double se2 = vx / m + vy / n;
  if (se2 <= 0.0) {
    if (mx == my) return 0.0;
    return mx > my ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
  }
  return (mx - my) / std::sqrt(se2);
}

double welch_t(std::span<const double> x, std::span<const double> y) {
  const double t = welch_t_statistic(x, y);
  if (!std::isfinite(t))
    return std::numeric_limits<double>::min();  // zero variance, unequal means
  if (t == 0.0) return 1.0;
  const double m = static_cast<double>(x.size()), n = static_cast<double>(y.size());
  double vx = 0.0, vy = 0.0, mx = 0.0, my = 0.0;
  for (double v : x) mx += v;
  for (double v : y) my += v;
  mx /= m;
  my /= n;
  for (double v : x) vx += (v - mx) * (v - mx);
  for (double v : y) vy += (v - my) * (v - my);
  vx /= (m - 1.0);
  vy /= (n - 1.0);
  const double a = vx / m, b = vy / n;
  const double nu = (a + b) * (a + b) /
                    (a * a / (m - 1.0) + b * b / (n - 1.0));
  return clamp_p(student_t_two_sided(t, nu));
}

EdgeTestResult edgewise_tests(const Eigen::Ref<const Eigen::MatrixXd>& edges_by_subject,
                              const std::vector<int>& labels, EdgeTestMethod method) {
  const long n_edges = edges_by_subject.rows();
  const long n_subj = edges_by_subject.cols();
  if (static_cast<long>(labels.size()) != n_subj)
    throw std::invalid_argument("edgewise_tests: label count mismatch");
  long n_case = 0;
  for (int l : labels) n_case += (l == 1);
  const long n_ctrl = n_subj - n_case;
  if (n_case == 0 || n_ctrl == 0)
    throw std::invalid_argument("edgewise_tests: both groups must be nonempty");

  EdgeTestResult out;
  out.method = method;
  out.p_values.resize(n_edges);
  out.signs.resize(n_edges);

  parallel_for(n_edges, [&](std::int64_t e) {
    std::vector<double> cs, ct;
    cs.reserve(static_cast<std::size_t>(n_case));
    ct.reserve(static_cast<std::size_t>(n_ctrl));
    for (long s = 0; s < n_subj; ++s)
      (labels[static_cast<std::size_t>(s)] == 1 ? cs : ct).push_back(edges_by_subject(e, s));
    double p = method == EdgeTestMethod::Wilcoxon ? wilcoxon_rank_sum(cs, ct)
                                                  : welch_t(cs, ct);
    out.p_values[e] = p;
    const double d = median_of(cs) - median_of(ct);
    out.signs[e] = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
  });
  return out;
}

EdgeTestResult edgewise_tests(const ConnectomeDataset& dataset, EdgeTestMethod method) {
  dataset.validate();
  return edgewise_tests(dataset.edges_matrix(), dataset.labels(), method);
}

Eigen::MatrixXd WeightMatrix::dense() const {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, n);
  long e = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++e) {
      full(i, j) = w[e];
      full(j, i) = w[e];
    }
  return full;
}

WeightMatrix weights_from_pvalues(const EdgeTestResult& result, int n) {
  const long m = static_cast<long>(n) * (n - 1) / 2;
  if (result.p_values.size() != m)
    throw std::invalid_argument("weights_from_pvalues: p-value count does not match n");
  WeightMatrix wm;
  wm.n = n;
  wm.w = -result.p_values.array().max(kPFloor).log();
  return wm;
}

}  // namespace netobj
