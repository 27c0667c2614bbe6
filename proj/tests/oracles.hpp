#pragma once

// Independent reference implementations used only by tests. Each one takes
// a different algorithmic route from the library code it checks.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

using BigFloat = boost::multiprecision::cpp_bin_float_50;
using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline BigInt choose_exact(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt num = 1, den = 1;
  for (int i = 0; i < k; ++i) {
    num *= (n - i);
    den *= (i + 1);
  }
  return num / den;
}

// Exact rational binomial upper tail; p is taken as the exact rational
// value of the double.
inline double binomial_tail_rational(int trials, double p, int m) {
  const BigRat pr(p);
  const BigRat qr = BigRat(1) - pr;
  BigRat total = 0;
  for (int k = m; k <= trials; ++k) {
    BigRat term(choose_exact(trials, k));
    for (int i = 0; i < k; ++i) term *= pr;
    for (int i = 0; i < trials - k; ++i) term *= qr;
    total += term;
  }
  return static_cast<double>(BigFloat(total));
}

// Chi-square upper tail for even df via the closed form
// exp(-x/2) * sum_{i<df/2} (x/2)^i / i!, evaluated in 50-digit floats.
inline BigFloat chisq_upper_tail_even_df(double x, int df) {
  const BigFloat half_x = BigFloat(x) / 2;
  BigFloat term = 1, sum = 1;
  const int k = df / 2;
  for (int i = 1; i < k; ++i) {
    term *= half_x / i;
    sum += term;
  }
  return exp(-half_x) * sum;
}

inline double neg_log_chisq_upper_tail_even_df(double x, int df) {
  return static_cast<double>(-log(chisq_upper_tail_even_df(x, df)));
}

// Two-sided rank-sum p-value by direct enumeration of all C(N, m) group
// assignments of the pooled mid-ranks.
inline double wilcoxon_enumeration(std::span<const double> x, std::span<const double> y) {
  const int m = static_cast<int>(x.size());
  const int N = m + static_cast<int>(y.size());
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<int> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pooled[static_cast<std::size_t>(a)] < pooled[static_cast<std::size_t>(b)]; });
  std::vector<double> midrank(pooled.size());
  int i = 0;
  while (i < N) {
    int j = i;
    while (j + 1 < N && pooled[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])] ==
                            pooled[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])
      ++j;
    const double mr = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) midrank[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = mr;
    i = j + 1;
  }
  double w_obs = 0.0;
  for (int k = 0; k < m; ++k) w_obs += midrank[static_cast<std::size_t>(k)];

  // enumerate combinations of positions
  std::vector<int> comb(static_cast<std::size_t>(m));
  std::iota(comb.begin(), comb.end(), 0);
  long long below = 0, above = 0, total = 0;
  const double eps = 1e-9;
  while (true) {
    double w = 0.0;
    for (int c : comb) w += midrank[static_cast<std::size_t>(c)];
    ++total;
    if (w <= w_obs + eps) ++below;
    if (w >= w_obs - eps) ++above;
    // next combination
    int pos = m - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] == N - m + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < m; ++q)
      comb[static_cast<std::size_t>(q)] = comb[static_cast<std::size_t>(q - 1)] + 1;
  }
  const double tail = static_cast<double>(std::min(below, above)) / static_cast<double>(total);
  return std::min(1.0, 2.0 * tail);
}

}  // namespace oracle
