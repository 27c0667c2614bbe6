#include "netobj/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "netobj/parallel.hpp"
#include "netobj/rng.hpp"

namespace netobj {

namespace {

constexpr double kScanFloor = -1e300;  // log-scale sentinel, sorts below any real value

double subnetwork_statistic(const Subnetwork& sub, const Eigen::VectorXd& p_values,
                            const InferConfig& cfg) {
  if (cfg.statistic == StatisticKind::FisherChernoff) {
    std::vector<double> ps;
    ps.reserve(sub.edges.size());
    for (long e : sub.edges) ps.push_back(p_values[e]);
    return fisher_chernoff_stat(ps);
  }
  return log_scan_stat(sub.edges, p_values, cfg.p0);
}

// Max statistic over the qualifying subnetworks of one detection run.
double max_statistic(const DetectionResult& det, const Eigen::VectorXd& p_values,
                     const InferConfig& cfg) {
  double best = statistic_floor(cfg.statistic);
  for (const auto& sub : det.subnetworks)
    best = std::max(best, subnetwork_statistic(sub, p_values, cfg));
  return best;
}

InferenceReport assemble_report(DetectionResult observed, const Eigen::VectorXd& p_values,
                                NullDistribution null, const InferConfig& cfg) {
  InferenceReport rep;
  rep.alpha = cfg.alpha;
  rep.null = std::move(null);
  rep.subnetworks = observed.subnetworks;
  rep.detection = std::move(observed);
  for (auto& sub : rep.subnetworks) {
    const double t = subnetwork_statistic(sub, p_values, cfg);
    sub.statistic = t;
    sub.p_value = permutation_pvalue(t, rep.null);
  }
  for (std::size_t i = 0; i < rep.subnetworks.size(); ++i)
    if (*rep.subnetworks[i].p_value <= cfg.alpha) rep.significant.push_back(i);
  // Empirical (1 - alpha) quantile of the null, reported for reference.
  std::vector<double> sorted = rep.null.values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  if (m > 0) {
    std::size_t idx = static_cast<std::size_t>(
        std::ceil((1.0 - cfg.alpha) * static_cast<double>(m)));
    idx = std::min(std::max<std::size_t>(idx, 1), m);
    rep.null_quantile = sorted[idx - 1];
  }
  return rep;
}

}  // namespace

void InferConfig::validate() const {
  if (num_permutations < 19)
    throw std::invalid_argument("InferConfig: need at least 19 permutations");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("InferConfig: alpha must be in (0,1)");
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("InferConfig: p0 must be in (0,1)");
  if (omnibus_B < 19)
    throw std::invalid_argument("InferConfig: omnibus_B must be >= 19");
  if (omnibus_gammas.empty() && !omnibus_gamma_inf)
    throw std::invalid_argument("InferConfig: empty omnibus gamma set");
}

double statistic_floor(StatisticKind kind) {
  return kind == StatisticKind::FisherChernoff ? 0.0 : kScanFloor;
}

double fisher_chernoff_stat(const std::vector<double>& p_values_of_subnetwork) {
  if (p_values_of_subnetwork.empty())
    throw std::invalid_argument("fisher_chernoff_stat: empty p-value vector");
  double sum = 0.0;
  for (double p : p_values_of_subnetwork) {
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("fisher_chernoff_stat: p-values must be in (0,1]");
    sum -= std::log(p);
  }
  const double m = static_cast<double>(p_values_of_subnetwork.size());
  const double xbar = sum / m;
  if (xbar < 1.0) return 0.0;  // under the uniform null E[-log p] = 1
  return m * (xbar - 1.0 - std::log(xbar));
}

double log_scan_stat(const std::vector<long>& subnetwork_edges, const Eigen::VectorXd& p_values,
                     double p0) {
  const long total = p_values.size();
  const long n_in = static_cast<long>(subnetwork_edges.size());
  if (n_in == 0) throw std::invalid_argument("scan_stat: empty subnetwork");
  const long n_out = total - n_in;
  if (n_out <= 0)
    throw std::invalid_argument("scan_stat: subnetwork must be a strict subset of all edges");
  std::vector<char> inside(static_cast<std::size_t>(total), 0);
  for (long e : subnetwork_edges) {
    if (e < 0 || e >= total) throw std::invalid_argument("scan_stat: edge id out of range");
    inside[static_cast<std::size_t>(e)] = 1;
  }
  long supra_in = 0, supra_out = 0;
  for (long e = 0; e < total; ++e) {
    if (p_values[e] < p0) (inside[static_cast<std::size_t>(e)] ? supra_in : supra_out)++;
  }
  const double rate_in = static_cast<double>(supra_in) / static_cast<double>(n_in);
  const double rate_out = static_cast<double>(supra_out) / static_cast<double>(n_out);
  if (!(rate_in > rate_out)) return kScanFloor;
  double lg = 0.0;  // 0 * log 0 = 0
  if (supra_in > 0) lg += static_cast<double>(supra_in) * std::log(rate_in);
  if (supra_out > 0) lg += static_cast<double>(supra_out) * std::log(rate_out);
  return lg;
}

double scan_stat(const std::vector<long>& subnetwork_edges, const Eigen::VectorXd& p_values,
                 double p0) {
  const double lg = log_scan_stat(subnetwork_edges, p_values, p0);
  return lg <= kScanFloor ? 0.0 : std::exp(lg);
}

double permutation_pvalue(double t0, const NullDistribution& null) {
  if (null.values.empty()) throw std::invalid_argument("permutation_pvalue: empty null");
  long count = 0;
  for (double t : null.values) count += (t >= t0);
  return static_cast<double>(1 + count) / static_cast<double>(null.values.size() + 1);
}

InferenceReport glp_test(const ConnectomeDataset& dataset, EdgeTestMethod method,
                         const DetectConfig& detect_cfg, const InferConfig& infer_cfg) {
  dataset.validate();
  infer_cfg.validate();
  if (dataset.count_label(0) < 2 || dataset.count_label(1) < 2)
    throw std::invalid_argument("glp_test: each group needs at least 2 subjects");

  const Eigen::MatrixXd edges = dataset.edges_matrix();
  const std::vector<int> labels = dataset.labels();

  const EdgeTestResult observed_tests = edgewise_tests(edges, labels, method);
  const WeightMatrix observed_W = weights_from_pvalues(observed_tests, dataset.n);
  DetectionResult observed = select_k(observed_W, detect_cfg);
  for (auto& sub : observed.subnetworks)
    attach_topology_metrics(sub, observed_tests.p_values, dataset.n, detect_cfg.topo_p0);

  NullDistribution null;
  null.kind = infer_cfg.statistic;
  null.values.assign(static_cast<std::size_t>(infer_cfg.num_permutations), 0.0);
  parallel_for(infer_cfg.num_permutations, [&](std::int64_t m) {
    auto rng = make_stream(infer_cfg.seed, static_cast<std::uint64_t>(m) + 1);
    std::vector<int> shuffled = labels;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const EdgeTestResult tests = edgewise_tests(edges, shuffled, method);
    const WeightMatrix W = weights_from_pvalues(tests, dataset.n);
    const DetectionResult det = select_k(W, detect_cfg);
    null.values[static_cast<std::size_t>(m)] = max_statistic(det, tests.p_values, infer_cfg);
  });

  return assemble_report(std::move(observed), observed_tests.p_values, std::move(null), infer_cfg);
}

double spu_omnibus(const ConnectomeDataset& dataset, const InferConfig& infer_cfg) {
  dataset.validate();
  infer_cfg.validate();
  const Eigen::MatrixXd edges = dataset.edges_matrix();
  const long n_edges = edges.rows();
  const long n_subj = edges.cols();
  const std::vector<int> labels = dataset.labels();
  long n_case = 0;
  for (int l : labels) n_case += (l == 1);
  const long n_ctrl = n_subj - n_case;

  // Label-invariant scaling: per-edge overall SD. Constant edges score 0.
  const Eigen::VectorXd row_sum = edges.rowwise().sum();
  const Eigen::VectorXd row_mean = row_sum / static_cast<double>(n_subj);
  Eigen::VectorXd sd(n_edges);
  for (long e = 0; e < n_edges; ++e) {
    const double ss = (edges.row(e).array() - row_mean[e]).square().sum();
    sd[e] = std::sqrt(ss / static_cast<double>(n_subj - 1));
  }
  const double se_factor =
      std::sqrt(1.0 / static_cast<double>(n_case) + 1.0 / static_cast<double>(n_ctrl));
  Eigen::VectorXd denom = sd * se_factor;
  for (long e = 0; e < n_edges; ++e)
    if (denom[e] <= 0.0) denom[e] = std::numeric_limits<double>::infinity();

  const int B = infer_cfg.omnibus_B;
  // Indicator matrices of group membership: column 0 observed, 1..B
  // permuted. Control sums get their own product rather than
  // row_sum - case_sum so exact ties (identical groups) stay exact.
  Eigen::MatrixXd cases = Eigen::MatrixXd::Zero(n_subj, B + 1);
  Eigen::MatrixXd ctrls = Eigen::MatrixXd::Zero(n_subj, B + 1);
  for (long s = 0; s < n_subj; ++s)
    (labels[static_cast<std::size_t>(s)] == 1 ? cases : ctrls)(s, 0) = 1.0;
  std::vector<int> perm(labels);
  for (int b = 1; b <= B; ++b) {
    auto rng = make_stream(infer_cfg.seed ^ 0xA5A5A5A5ULL, static_cast<std::uint64_t>(b));
    std::shuffle(perm.begin(), perm.end(), rng);
    for (long s = 0; s < n_subj; ++s)
      (perm[static_cast<std::size_t>(s)] == 1 ? cases : ctrls)(s, b) = 1.0;
  }

  // U(e, b) = standardized mean difference of edge e under labeling b.
  Eigen::MatrixXd case_sums = edges * cases;  // n_edges x (B+1)
  Eigen::MatrixXd ctrl_sums = edges * ctrls;
  Eigen::MatrixXd U(n_edges, B + 1);
  for (long b = 0; b <= B; ++b) {
    U.col(b) = (case_sums.col(b) / static_cast<double>(n_case) -
                ctrl_sums.col(b) / static_cast<double>(n_ctrl))
                   .cwiseQuotient(denom);
  }

  // SPU(gamma) statistics for every labeling.
  std::vector<Eigen::VectorXd> stats;  // per gamma, length B+1, absolute value
  Eigen::MatrixXd powers = U;
  int cur_pow = 1;
  for (int gamma : infer_cfg.omnibus_gammas) {
    while (cur_pow < gamma) {
      powers = powers.cwiseProduct(U);
      ++cur_pow;
    }
    stats.push_back(powers.colwise().sum().cwiseAbs().transpose());
  }
  if (infer_cfg.omnibus_gamma_inf)
    stats.push_back(U.cwiseAbs().colwise().maxCoeff().transpose());

  // Per-gamma p-values for each labeling (leave-one-out within the shared
  // permutation set), then the adaptive minimum.
  const std::size_t n_gamma = stats.size();
  Eigen::VectorXd t_min = Eigen::VectorXd::Constant(B + 1, 2.0);
  for (std::size_t g = 0; g < n_gamma; ++g) {
    const Eigen::VectorXd& s = stats[g];
    for (long b = 0; b <= B; ++b) {
      long count = 0;
      for (long b2 = 1; b2 <= B; ++b2)
        if (b2 != b && s[b2] >= s[b]) ++count;
      const double denom_b = (b == 0) ? static_cast<double>(B + 1) : static_cast<double>(B);
      const double p_g = static_cast<double>(1 + count) / denom_b;
      t_min[b] = std::min(t_min[b], p_g);
    }
  }
  long count = 0;
  for (long b = 1; b <= B; ++b) count += (t_min[b] <= t_min[0]);
  return static_cast<double>(1 + count) / static_cast<double>(B + 1);
}

WeightMatrix edge_permute(const WeightMatrix& W, std::uint64_t seed, std::uint64_t stream) {
  auto rng = make_stream(seed, stream);
  WeightMatrix out = W;
  std::shuffle(out.w.data(), out.w.data() + out.w.size(), rng);
  return out;
}

InferenceReport gep_test(const ConnectomeDataset& dataset, EdgeTestMethod method,
                         const DetectConfig& detect_cfg, const InferConfig& infer_cfg) {
  dataset.validate();
  infer_cfg.validate();

  InferenceReport rep;
  rep.alpha = infer_cfg.alpha;
  rep.gate_applied = true;
  rep.gate_p = spu_omnibus(dataset, infer_cfg);
  if (rep.gate_p > infer_cfg.alpha) {
    rep.gate_passed = false;
    rep.null.kind = infer_cfg.statistic;
    return rep;
  }
  rep.gate_passed = true;

  const EdgeTestResult observed_tests = edgewise_tests(dataset, method);
  const WeightMatrix observed_W = weights_from_pvalues(observed_tests, dataset.n);
  DetectionResult observed = select_k(observed_W, detect_cfg);
  for (auto& sub : observed.subnetworks)
    attach_topology_metrics(sub, observed_tests.p_values, dataset.n, detect_cfg.topo_p0);

  NullDistribution null;
  null.kind = infer_cfg.statistic;
  null.values.assign(static_cast<std::size_t>(infer_cfg.num_permutations), 0.0);
  parallel_for(infer_cfg.num_permutations, [&](std::int64_t m) {
    // One index permutation applied to both the weights and the p-values
    // keeps the pair (w, p) attached to its new edge position.
    auto rng = make_stream(infer_cfg.seed, static_cast<std::uint64_t>(m) + 1);
    const long ne = observed_W.n_edges();
    std::vector<long> order(static_cast<std::size_t>(ne));
    std::iota(order.begin(), order.end(), 0L);
    std::shuffle(order.begin(), order.end(), rng);
    WeightMatrix W;
    W.n = observed_W.n;
    W.w.resize(ne);
    Eigen::VectorXd p(ne);
    for (long e = 0; e < ne; ++e) {
      W.w[e] = observed_W.w[order[static_cast<std::size_t>(e)]];
      p[e] = observed_tests.p_values[order[static_cast<std::size_t>(e)]];
    }
    const DetectionResult det = select_k(W, detect_cfg);
    null.values[static_cast<std::size_t>(m)] = max_statistic(det, p, infer_cfg);
  });

  InferenceReport full =
      assemble_report(std::move(observed), observed_tests.p_values, std::move(null), infer_cfg);
  full.gate_applied = true;
  full.gate_passed = true;
  full.gate_p = rep.gate_p;
  return full;
}

}  // namespace netobj
