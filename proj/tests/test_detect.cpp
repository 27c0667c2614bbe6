#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "netobj/detect.hpp"
#include "netobj/edge_index.hpp"
#include "netobj/sim.hpp"

using namespace netobj;

namespace {

WeightMatrix make_weights(int n, double value) {
  WeightMatrix w;
  w.n = n;
  w.w = Eigen::VectorXd::Constant(static_cast<long>(n) * (n - 1) / 2, value);
  return w;
}

Partition all_singletons(int n) {
  Partition p;
  p.K = n;
  p.assignment.resize(static_cast<std::size_t>(n));
  for (int v = 1; v <= n; ++v) p.assignment[static_cast<std::size_t>(v - 1)] = v;
  return p;
}

Partition one_cluster(int n) {
  Partition p;
  p.K = 1;
  p.assignment.assign(static_cast<std::size_t>(n), 1);
  return p;
}

// two-block weight matrix: weight 1 within each block, 0 between
WeightMatrix two_blocks(int n, int split) {
  WeightMatrix w = make_weights(n, 0.0);
  EdgeIndex idx(n);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if ((i <= split) == (j <= split)) w.w[idx.pack(i, j)] = 1.0;
  return w;
}

double brute_force_best(const WeightMatrix& W, int max_k, double lambda0,
                        int min_cluster_nodes) {
  const int n = W.n;
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  double best = -1.0;
  // all assignments into max_k labeled cells; duplicates only revisit
  // the same set partition
  const long total = static_cast<long>(std::pow(max_k, n));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int v = 0; v < n; ++v) {
      assign[static_cast<std::size_t>(v)] = static_cast<int>(c % max_k) + 1;
      c /= max_k;
    }
    Partition p;
    p.K = max_k;
    p.assignment = assign;
    best = std::max(best, objective_value(W, p, lambda0, min_cluster_nodes));
  }
  return best;
}

}  // namespace

TEST_CASE("objective value conventions") {
  const int n = 6;
  WeightMatrix w = make_weights(n, 0.7);
  // all singletons: no within-cluster edges
  CHECK(objective_value(w, all_singletons(n), 0.5) == doctest::Approx(0.0));
  // one cluster with e edges of equal weight: (e*w)/sqrt(e) = w*sqrt(e)
  const double e = static_cast<double>(w.n_edges());
  CHECK(objective_value(w, one_cluster(n), 0.5) == doctest::Approx(0.7 * std::sqrt(e)));
  // generic lambda0: sum * |E|^-lambda
  CHECK(objective_value(w, one_cluster(n), 0.3) ==
        doctest::Approx(0.7 * e * std::pow(e, -0.3)));
  // zero weights contribute nothing
  CHECK(objective_value(make_weights(n, 0.0), one_cluster(n), 0.5) == doctest::Approx(0.0));
}

TEST_CASE("objective value invariant under joint relabeling") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  const int n = 9;
  WeightMatrix w = make_weights(n, 0.0);
  for (long e = 0; e < w.n_edges(); ++e) w.w[e] = unif(rng);
  Partition p;
  p.K = 3;
  p.assignment = {1, 1, 2, 2, 2, 3, 3, 1, 3};
  const double before = objective_value(w, p, 0.5);

  // relabel nodes by a permutation applied jointly to W and the partition
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  std::shuffle(perm.begin(), perm.end(), rng);
  EdgeIndex idx(n);
  WeightMatrix w2 = make_weights(n, 0.0);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      const int pi = perm[static_cast<std::size_t>(i - 1)], pj = perm[static_cast<std::size_t>(j - 1)];
      w2.w[idx.pack(std::min(pi, pj), std::max(pi, pj))] = w.w[idx.pack(i, j)];
    }
  Partition p2;
  p2.K = 3;
  p2.assignment.resize(static_cast<std::size_t>(n));
  for (int v = 1; v <= n; ++v)
    p2.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(v - 1)] - 1)] =
        p.assignment[static_cast<std::size_t>(v - 1)];
  CHECK(objective_value(w2, p2, 0.5) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("ratio cut recovers two disconnected blocks exactly") {
  for (int n : {6, 8}) {
    const int split = n / 2;
    WeightMatrix w = two_blocks(n, split);
    DetectConfig cfg;
    const Partition p = ratio_cut_partition(w, 2, cfg);
    CHECK(p.K == 2);
    // all nodes in block 1 share a label, block 2 has the other
    for (int v = 2; v <= split; ++v)
      CHECK(p.assignment[static_cast<std::size_t>(v - 1)] == p.assignment[0]);
    for (int v = split + 2; v <= n; ++v)
      CHECK(p.assignment[static_cast<std::size_t>(v - 1)] ==
            p.assignment[static_cast<std::size_t>(split)]);
    CHECK(p.assignment[0] != p.assignment[static_cast<std::size_t>(split)]);
  }
}

TEST_CASE("ratio cut on an all-zero matrix returns a valid partition") {
  WeightMatrix w = make_weights(7, 0.0);
  DetectConfig cfg;
  for (int k : {1, 2, 3, 7}) {
    const Partition p = ratio_cut_partition(w, k, cfg);
    CHECK(p.K == k);
    CHECK(p.n() == 7);
    for (int v = 0; v < 7; ++v) {
      CHECK(p.assignment[static_cast<std::size_t>(v)] >= 1);
      CHECK(p.assignment[static_cast<std::size_t>(v)] <= k);
    }
  }
  CHECK_THROWS_AS(ratio_cut_partition(w, 0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(ratio_cut_partition(w, 8, cfg), std::invalid_argument);
}

TEST_CASE("planted clique isolated at K=2 and selected by the grid search") {
  SimConfig scfg;
  scfg.n = 100;
  scfg.planted_nodes = 20;
  scfg.theta = 1.0;
  scfg.sigma = 0.5;  // theta/sigma = 2
  scfg.n_controls = 60;
  scfg.n_cases = 60;
  scfg.seed = 4242;
  const GeneratedDataset gen = generate_dataset(scfg);
  const EdgeTestResult tests = edgewise_tests(gen.dataset, EdgeTestMethod::Wilcoxon);
  const WeightMatrix w = weights_from_pvalues(tests, scfg.n);

  DetectConfig cfg;
  cfg.k_max = 8;
  // The raw spectral cut keeps the planted block together (its internal
  // weight dwarfs any split), though background nodes may ride along.
  const Partition p2 = ratio_cut_partition(w, 2, cfg);
  const int planted_label = p2.assignment[static_cast<std::size_t>(gen.truth_nodes[0] - 1)];
  for (int v : gen.truth_nodes)
    CHECK(p2.assignment[static_cast<std::size_t>(v - 1)] == planted_label);

  const DetectionResult det = select_k(w, cfg);
  CHECK(det.k_selected >= 2);
  REQUIRE(!det.subnetworks.empty());
  // the highest-quality subnetwork is exactly the planted node set
  std::size_t best = 0;
  double best_q = -1.0;
  for (std::size_t s = 0; s < det.subnetworks.size(); ++s) {
    double q = 0.0;
    for (long e : det.subnetworks[s].edges) q += w.w[e];
    q /= static_cast<double>(det.subnetworks[s].edges.size());
    if (q > best_q) {
      best_q = q;
      best = s;
    }
  }
  CHECK(det.subnetworks[best].nodes == gen.truth_nodes);
  CHECK(det.subnetworks[best].edges.size() == 190);
}

TEST_CASE("identical groups give an empty subnetwork list") {
  ConnectomeDataset ds;
  ds.n = 12;
  std::mt19937_64 rng(47);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> base;
  for (int s = 0; s < 5; ++s) {
    Eigen::VectorXd v(ds.n_edges());
    for (long e = 0; e < v.size(); ++e) v[e] = gauss(rng);
    base.push_back(v);
  }
  for (int s = 0; s < 10; ++s) {
    Subject subj;
    subj.id = "s" + std::to_string(s);
    subj.label = s < 5 ? 0 : 1;
    subj.edges = base[static_cast<std::size_t>(s % 5)];  // groups are identical copies
    ds.subjects.push_back(subj);
  }
  DetectConfig cfg;
  const DetectionResult det = extract_subnetworks(ds, EdgeTestMethod::Wilcoxon, cfg);
  CHECK(det.subnetworks.empty());
  CHECK(det.objective == doctest::Approx(0.0));
}

TEST_CASE("criterion ties break toward the smaller K") {
  WeightMatrix w = make_weights(10, 0.0);  // every partition scores 0
  DetectConfig cfg;
  cfg.k_max = 5;
  const DetectionResult det = select_k(w, cfg);
  CHECK(det.k_selected == 1);
  CHECK(det.objective == doctest::Approx(0.0));
}

TEST_CASE("scaling weights by a power of two leaves the selection unchanged") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  WeightMatrix w = make_weights(14, 0.0);
  for (long e = 0; e < w.n_edges(); ++e) w.w[e] = unif(rng);
  DetectConfig cfg;
  cfg.k_max = 5;
  const DetectionResult a = select_k(w, cfg);
  WeightMatrix w4 = w;
  w4.w *= 4.0;
  const DetectionResult b = select_k(w4, cfg);
  CHECK(a.k_selected == b.k_selected);
  CHECK(a.partition.assignment == b.partition.assignment);
  CHECK(b.objective == doctest::Approx(4.0 * a.objective).epsilon(1e-12));
}

TEST_CASE("select_k is deterministic for a fixed seed") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  WeightMatrix w = make_weights(20, 0.0);
  for (long e = 0; e < w.n_edges(); ++e) w.w[e] = unif(rng);
  DetectConfig cfg;
  cfg.k_max = 6;
  cfg.seed = 777;
  const DetectionResult a = select_k(w, cfg);
  const DetectionResult b = select_k(w, cfg);
  CHECK(a.partition.assignment == b.partition.assignment);
  CHECK(a.k_selected == b.k_selected);
  CHECK(a.objective == b.objective);
}

TEST_CASE("grid search stays near the brute-force optimum on small graphs") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    WeightMatrix w = make_weights(8, 0.0);
    for (long e = 0; e < w.n_edges(); ++e) w.w[e] = unif(rng);
    DetectConfig cfg;
    cfg.k_max = 3;
    const DetectionResult det = select_k(w, cfg);
    const double best = brute_force_best(w, 3, cfg.lambda0, cfg.min_cluster_nodes);
    CHECK(det.objective >= 0.9 * best);
    CHECK(det.objective <= best + 1e-9);
  }
}

TEST_CASE("higher lambda0 yields denser subnetworks on planted data") {
  double q_low = 0.0, q_high = 0.0;
  int reps = 12;
  for (int rep = 0; rep < reps; ++rep) {
    SimConfig scfg;
    scfg.n = 40;
    scfg.planted_nodes = 10;
    scfg.theta = 1.0;
    scfg.sigma = 0.7;
    scfg.n_controls = 20;
    scfg.n_cases = 20;
    scfg.seed = 1000 + static_cast<std::uint64_t>(rep);
    const GeneratedDataset gen = generate_dataset(scfg);
    const EdgeTestResult tests = edgewise_tests(gen.dataset, EdgeTestMethod::Wilcoxon);
    const WeightMatrix w = weights_from_pvalues(tests, scfg.n);
    for (double lambda : {0.4, 0.7}) {
      DetectConfig cfg;
      cfg.lambda0 = lambda;
      cfg.k_max = 6;
      const DetectionResult det = select_k(w, cfg);
      // mean per-subnetwork edge-weight density
      double q = 0.0;
      for (const auto& sub : det.subnetworks) {
        double s = 0.0;
        for (long e : sub.edges) s += w.w[e];
        q += s / static_cast<double>(sub.edges.size());
      }
      if (!det.subnetworks.empty()) q /= static_cast<double>(det.subnetworks.size());
      (lambda == 0.4 ? q_low : q_high) += q;
    }
  }
  CHECK(q_high >= q_low);
}

TEST_CASE("subnetworks below the minimum size are reported only in the partition") {
  // a hot 2-node pair plus background: pair cluster must not become a
  // subnetwork
  const int n = 10;
  WeightMatrix w = make_weights(n, 0.01);
  EdgeIndex idx(n);
  w.w[idx.pack(1, 2)] = 50.0;
  DetectConfig cfg;
  cfg.k_max = 4;
  const DetectionResult det = select_k(w, cfg);
  for (const auto& sub : det.subnetworks)
    CHECK(sub.nodes.size() >= static_cast<std::size_t>(cfg.min_cluster_nodes));
}
