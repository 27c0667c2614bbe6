#include "netobj/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "netobj/edge_index.hpp"
#include "netobj/edge_stats.hpp"
#include "netobj/errors.hpp"
#include "netobj/rng.hpp"
#include "netobj/special.hpp"

namespace netobj {

void LfdrConfig::validate() const {
  if (bins < 20) throw std::invalid_argument("LfdrConfig: bins must be >= 20");
  if (poly_degree < 2) throw std::invalid_argument("LfdrConfig: poly_degree must be >= 2");
  if (!(cutoff > 0.0 && cutoff < 1.0))
    throw std::invalid_argument("LfdrConfig: cutoff must be in (0,1)");
}

RejectionSet bh_fdr(const Eigen::VectorXd& p_values, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("bh_fdr: q must be in (0,1)");
  const long m = p_values.size();
  std::vector<long> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(),
            [&](long a, long b) { return p_values[a] < p_values[b]; });
  long cut = -1;
  for (long i = 0; i < m; ++i) {
    const double thresh = q * static_cast<double>(i + 1) / static_cast<double>(m);
    if (p_values[order[static_cast<std::size_t>(i)]] <= thresh) cut = i;
  }
  RejectionSet out;
  out.method = RejectionMethod::BhFdr;
  out.threshold = q;
  for (long i = 0; i <= cut; ++i) out.rejected.push_back(order[static_cast<std::size_t>(i)]);
  std::sort(out.rejected.begin(), out.rejected.end());
  return out;
}

Eigen::VectorXd storey_qvalues(const Eigen::VectorXd& p_values) {
  const long m = p_values.size();
  if (m == 0) return Eigen::VectorXd();
  long above = 0;
  for (long i = 0; i < m; ++i) above += (p_values[i] > 0.5);
  const double pi0 =
      std::min(1.0, static_cast<double>(above) / (0.5 * static_cast<double>(m)));
  std::vector<long> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(),
            [&](long a, long b) { return p_values[a] < p_values[b]; });
  Eigen::VectorXd q(m);
  double running = 1.0;
  for (long i = m - 1; i >= 0; --i) {
    const double v =
        pi0 * static_cast<double>(m) * p_values[order[static_cast<std::size_t>(i)]] /
        static_cast<double>(i + 1);
    running = std::min(running, v);
    q[order[static_cast<std::size_t>(i)]] = running;
  }
  return q;
}

namespace {

// Natural cubic spline basis: intercept, linear term and df - 2 truncated
// cubics constrained to be linear beyond the boundary knots.
Eigen::MatrixXd natural_spline_basis(const Eigen::VectorXd& x, const std::vector<double>& knots) {
  const int m = static_cast<int>(knots.size());
  auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const double km = knots[static_cast<std::size_t>(m - 1)];
  auto dj = [&](int j, double xv) {
    const double kj = knots[static_cast<std::size_t>(j)];
    return (cube(xv - kj) - cube(xv - km)) / (km - kj);
  };
  Eigen::MatrixXd B(x.size(), m);
  for (long i = 0; i < x.size(); ++i) {
    B(i, 0) = 1.0;
    B(i, 1) = x[i];
    for (int j = 0; j + 2 < m; ++j) B(i, j + 2) = dj(j, x[i]) - dj(m - 2, x[i]);
  }
  return B;
}

// Knots at equally spaced quantiles of the z sample.
std::vector<double> spline_knots(Eigen::VectorXd z, int df) {
  std::sort(z.data(), z.data() + z.size());
  std::vector<double> knots;
  for (int j = 1; j <= df; ++j) {
    const double q = static_cast<double>(j) / (df + 1);
    long idx = static_cast<long>(q * static_cast<double>(z.size() - 1));
    knots.push_back(z[idx]);
  }
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  if (knots.size() < 3)
    throw NumericalError("local_fdr: degenerate z histogram (all mass in one bin)");
  return knots;
}

// Poisson regression of histogram counts on the basis (Lindsey's method).
Eigen::VectorXd lindsey_fit(const Eigen::VectorXd& counts, const Eigen::MatrixXd& X) {
  const long b = counts.size();
  Eigen::VectorXd eta = (counts.array() + 0.5).log().matrix();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  double prev_dev = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::VectorXd mu = eta.array().exp().matrix();
    for (long i = 0; i < b; ++i) mu[i] = std::max(mu[i], 1e-10);
    Eigen::VectorXd z = eta + (counts - mu).cwiseQuotient(mu);
    Eigen::VectorXd wsqrt = mu.cwiseSqrt();
    Eigen::MatrixXd Xw = wsqrt.asDiagonal() * X;
    Eigen::VectorXd zw = wsqrt.cwiseProduct(z);
    beta = Xw.colPivHouseholderQr().solve(zw);
    eta = X * beta;
    for (long i = 0; i < b; ++i) eta[i] = std::min(eta[i], 35.0);
    double dev = 0.0;
    for (long i = 0; i < b; ++i) {
      const double mui = std::exp(eta[i]);
      if (counts[i] > 0.0) dev += 2.0 * (counts[i] * std::log(counts[i] / mui) - (counts[i] - mui));
      else dev += 2.0 * mui;
    }
    if (std::fabs(prev_dev - dev) < 1e-8 * (1.0 + std::fabs(dev))) break;
    prev_dev = dev;
  }
  return beta;
}

}  // namespace

LfdrResult local_fdr(const Eigen::VectorXd& p_values, const LfdrConfig& cfg) {
  cfg.validate();
  const long m = p_values.size();
  if (m < 2) throw std::invalid_argument("local_fdr: need at least 2 p-values");

  // One-sided mapping: small p (suprathreshold tail) -> large z.
  Eigen::VectorXd z(m);
  for (long i = 0; i < m; ++i) {
    double p = std::clamp(p_values[i], 1e-15, 1.0 - 1e-15);
    z[i] = std::clamp(normal_quantile(1.0 - p), -10.0, 10.0);
  }
  const double zmin = z.minCoeff(), zmax = z.maxCoeff();
  if (!(zmax > zmin))
    throw NumericalError("local_fdr: degenerate z histogram (all mass in one bin)");
  const double lo = zmin - 1e-9, hi = zmax + 1e-9;
  const double width = (hi - lo) / cfg.bins;

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(cfg.bins);
  for (long i = 0; i < m; ++i) {
    int b = static_cast<int>((z[i] - lo) / width);
    b = std::clamp(b, 0, cfg.bins - 1);
    counts[b] += 1.0;
  }
  long occupied = 0;
  for (int b = 0; b < cfg.bins; ++b) occupied += (counts[b] > 0.0);
  if (occupied < 2)
    throw NumericalError("local_fdr: degenerate z histogram (all mass in one bin)");

  Eigen::VectorXd mids(cfg.bins);
  for (int b = 0; b < cfg.bins; ++b) mids[b] = lo + (b + 0.5) * width;
  const std::vector<double> knots = spline_knots(z, cfg.poly_degree);
  const Eigen::VectorXd beta = lindsey_fit(counts, natural_spline_basis(mids, knots));

  auto log_f = [&](double zv) {
    // log marginal density from the fitted log-intensity
    Eigen::VectorXd one(1);
    one[0] = zv;
    const double eta = (natural_spline_basis(one, knots) * beta)(0);
    return eta - std::log(static_cast<double>(m) * width);
  };

  // Null density and pi0.
  double delta = 0.0, sigma0 = 1.0;
  if (cfg.empirical_null) {
    // Central matching: quadratic fit of log f on the central z window.
    std::vector<double> xs, ys;
    for (int b = 0; b < cfg.bins; ++b)
      if (std::fabs(mids[b]) <= 1.5 && counts[b] > 0.0) {
        xs.push_back(mids[b]);
        ys.push_back(log_f(mids[b]));
      }
    if (xs.size() >= 5) {
      Eigen::MatrixXd X(static_cast<long>(xs.size()), 3);
      Eigen::VectorXd Y(static_cast<long>(xs.size()));
      for (std::size_t i = 0; i < xs.size(); ++i) {
        X(static_cast<long>(i), 0) = 1.0;
        X(static_cast<long>(i), 1) = xs[i];
        X(static_cast<long>(i), 2) = xs[i] * xs[i];
        Y[static_cast<long>(i)] = ys[i];
      }
      Eigen::Vector3d q = X.colPivHouseholderQr().solve(Y);
      if (q[2] < -1e-8) {
        sigma0 = std::sqrt(-0.5 / q[2]);
        delta = q[1] * sigma0 * sigma0;
      }
    }
  }
  auto log_f0 = [&](double zv) {
    const double t = (zv - delta) / sigma0;
    return -0.5 * t * t - 0.91893853320467274 - std::log(sigma0);
  };

  long above = 0;
  for (long i = 0; i < m; ++i) above += (p_values[i] > 0.5);
  const double pi0 =
      std::min(1.0, static_cast<double>(above) / (0.5 * static_cast<double>(m)));

  LfdrResult out;
  out.pi0 = pi0;
  out.fdr.resize(m);
  out.rejections.method = RejectionMethod::LocalFdr;
  out.rejections.threshold = cfg.cutoff;
  const double log_pi0 = std::log(std::max(pi0, 1e-12));
  for (long i = 0; i < m; ++i) {
    const double lf = log_pi0 + log_f0(z[i]) - log_f(z[i]);
    out.fdr[i] = std::min(1.0, std::exp(lf));
    // Only the suprathreshold direction counts as evidence: two-sided rank
    // tests put an atom at p = 1 whose z lands far left and would otherwise
    // be "rejected" for being unusually insignificant.
    if (out.fdr[i] <= cfg.cutoff && z[i] > 0.0) out.rejections.rejected.push_back(i);
  }
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// Welch |t| per edge from group sums; shared by the observed pass and the
// label permutations.
Eigen::VectorXd welch_abs_t(const Eigen::MatrixXd& edges, const Eigen::MatrixXd& edges_sq,
                            const Eigen::VectorXd& case_ind, double n1, double n0) {
  const Eigen::VectorXd s1 = edges * case_ind;
  const Eigen::VectorXd q1 = edges_sq * case_ind;
  const Eigen::VectorXd tot = edges.rowwise().sum();
  const Eigen::VectorXd tot_sq = edges_sq.rowwise().sum();
  const long ne = edges.rows();
  Eigen::VectorXd t(ne);
  for (long e = 0; e < ne; ++e) {
    const double mean1 = s1[e] / n1;
    const double mean0 = (tot[e] - s1[e]) / n0;
    const double var1 = std::max(0.0, (q1[e] - n1 * mean1 * mean1) / (n1 - 1.0));
    const double var0 =
        std::max(0.0, ((tot_sq[e] - q1[e]) - n0 * mean0 * mean0) / (n0 - 1.0));
    const double se2 = var1 / n1 + var0 / n0;
    t[e] = se2 > 0.0 ? std::fabs(mean1 - mean0) / std::sqrt(se2)
                     : (mean1 == mean0 ? 0.0 : std::numeric_limits<double>::infinity());
  }
  return t;
}

long max_component_edges(const Eigen::VectorXd& abs_t, double tau, const EdgeIndex& idx) {
  UnionFind uf(idx.n());
  const long ne = abs_t.size();
  for (long e = 0; e < ne; ++e) {
    if (abs_t[e] >= tau) {
      auto [i, j] = idx.unpack(e);
      uf.unite(i - 1, j - 1);
    }
  }
  std::vector<long> count(static_cast<std::size_t>(idx.n()), 0);
  long best = 0;
  for (long e = 0; e < ne; ++e) {
    if (abs_t[e] >= tau) {
      auto [i, j] = idx.unpack(e);
      const int root = uf.find(i - 1);
      best = std::max(best, ++count[static_cast<std::size_t>(root)]);
    }
  }
  return best;
}

}  // namespace

NbsResult nbs(const ConnectomeDataset& dataset, double tau, int num_permutations,
              std::uint64_t seed) {
  dataset.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("nbs: tau must be > 0");
  if (num_permutations < 19) throw std::invalid_argument("nbs: need at least 19 permutations");
  if (dataset.count_label(0) < 2 || dataset.count_label(1) < 2)
    throw std::invalid_argument("nbs: each group needs at least 2 subjects");

  const Eigen::MatrixXd edges = dataset.edges_matrix();
  const Eigen::MatrixXd edges_sq = edges.cwiseProduct(edges);
  const std::vector<int> labels = dataset.labels();
  const long n_subj = edges.cols();
  const double n1 = dataset.count_label(1), n0 = dataset.count_label(0);
  const EdgeIndex idx(dataset.n);

  Eigen::VectorXd case_ind = Eigen::VectorXd::Zero(n_subj);
  for (long s = 0; s < n_subj; ++s)
    if (labels[static_cast<std::size_t>(s)] == 1) case_ind[s] = 1.0;
  const Eigen::VectorXd observed_t = welch_abs_t(edges, edges_sq, case_ind, n1, n0);

  NbsResult out;
  out.tau = tau;

  // Observed components of the suprathreshold graph.
  UnionFind uf(dataset.n);
  for (long e = 0; e < observed_t.size(); ++e)
    if (observed_t[e] >= tau) {
      auto [i, j] = idx.unpack(e);
      uf.unite(i - 1, j - 1);
    }
  std::vector<std::vector<long>> comp_edges(static_cast<std::size_t>(dataset.n));
  for (long e = 0; e < observed_t.size(); ++e)
    if (observed_t[e] >= tau) {
      auto [i, j] = idx.unpack(e);
      comp_edges[static_cast<std::size_t>(uf.find(i - 1))].push_back(e);
    }

  // Null distribution of the maximum component edge count.
  std::vector<long> null_max(static_cast<std::size_t>(num_permutations), 0);
  std::vector<int> perm(labels);
  for (int m = 0; m < num_permutations; ++m) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(m) + 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(n_subj);
    for (long s = 0; s < n_subj; ++s)
      if (perm[static_cast<std::size_t>(s)] == 1) ind[s] = 1.0;
    null_max[static_cast<std::size_t>(m)] =
        max_component_edges(welch_abs_t(edges, edges_sq, ind, n1, n0), tau, idx);
  }

  for (std::size_t root = 0; root < comp_edges.size(); ++root) {
    if (comp_edges[root].empty()) continue;
    NbsComponent comp;
    comp.edges = comp_edges[root];
    std::vector<char> innode(static_cast<std::size_t>(dataset.n), 0);
    for (long e : comp.edges) {
      auto [i, j] = idx.unpack(e);
      innode[static_cast<std::size_t>(i - 1)] = 1;
      innode[static_cast<std::size_t>(j - 1)] = 1;
    }
    for (int v = 1; v <= dataset.n; ++v)
      if (innode[static_cast<std::size_t>(v - 1)]) comp.nodes.push_back(v);
    long count = 0;
    for (long nm : null_max) count += (nm >= static_cast<long>(comp.edges.size()));
    comp.p_value = static_cast<double>(1 + count) / static_cast<double>(num_permutations + 1);
    out.max_component_edges =
        std::max(out.max_component_edges, static_cast<long>(comp.edges.size()));
    out.components.push_back(std::move(comp));
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const NbsComponent& a, const NbsComponent& b) {
              if (a.edges.size() != b.edges.size()) return a.edges.size() > b.edges.size();
              return a.nodes < b.nodes;
            });
  return out;
}

}  // namespace netobj
