#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>

#include "netobj/edge_index.hpp"
#include "netobj/infer.hpp"
#include "netobj/sim.hpp"
#include "oracles.hpp"

using namespace netobj;

TEST_CASE("combined-evidence statistic examples") {
  // 10 edges, all p = e^-2: xbar = 2, T = 10 (1 - ln 2)
  std::vector<double> p(10, std::exp(-2.0));
  CHECK(fisher_chernoff_stat(p) == doctest::Approx(10.0 * (1.0 - std::log(2.0))).epsilon(1e-12));
  CHECK(fisher_chernoff_stat(p) == doctest::Approx(3.0685).epsilon(1e-4));

  // xbar = 1 exactly: T = 0
  std::vector<double> unit(5, std::exp(-1.0));
  CHECK(fisher_chernoff_stat(unit) == doctest::Approx(0.0));

  // xbar < 1 clamps to 0
  std::vector<double> weak(5, 0.9);
  CHECK(fisher_chernoff_stat(weak) == doctest::Approx(0.0));

  // 10 edges at p = 0.05
  std::vector<double> p05(10, 0.05);
  const double t = fisher_chernoff_stat(p05);
  CHECK(t == doctest::Approx(8.986).epsilon(1e-3));
  // bounded by -log of the exact chi-square tail at x = -2 sum log p, df 20
  const double x = -2.0 * 10.0 * std::log(0.05);
  CHECK(x == doctest::Approx(59.915).epsilon(1e-4));
  CHECK(t <= oracle::neg_log_chisq_upper_tail_even_df(x, 20));

  CHECK_THROWS_AS(fisher_chernoff_stat({}), std::invalid_argument);
  CHECK_THROWS_AS(fisher_chernoff_stat({0.0}), std::invalid_argument);
}

TEST_CASE("statistic never exceeds -log of the exact tail") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unif(0.001, 1.0);
  std::uniform_int_distribution<int> edges(1, 40);
  int checked = 0;
  while (checked < 1000) {
    const int m = edges(rng);
    std::vector<double> p;
    for (int i = 0; i < m; ++i) p.push_back(unif(rng));
    double xbar = 0.0;
    for (double v : p) xbar -= std::log(v);
    xbar /= m;
    if (xbar <= 1.0) continue;
    ++checked;
    const double t = fisher_chernoff_stat(p);
    const double exact = oracle::neg_log_chisq_upper_tail_even_df(2.0 * m * xbar, 2 * m);
    CHECK(t <= exact + 1e-9);
  }
}

TEST_CASE("statistic is permutation invariant and increasing in evidence") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> unif(0.001, 0.3);
  std::vector<double> p;
  for (int i = 0; i < 12; ++i) p.push_back(unif(rng));
  const double base = fisher_chernoff_stat(p);
  std::vector<double> shuffled = p;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(fisher_chernoff_stat(shuffled) == doctest::Approx(base).epsilon(1e-12));
  // decreasing any single p (increasing its -log p) increases T when xbar > 1
  std::vector<double> stronger = p;
  stronger[3] *= 0.5;
  CHECK(fisher_chernoff_stat(stronger) > base);
}

TEST_CASE("scan statistic examples") {
  // 100 edges total; subnetwork of 10
  Eigen::VectorXd p(100);
  SUBCASE("all suprathreshold inside, none outside") {
    for (int e = 0; e < 100; ++e) p[e] = e < 10 ? 0.01 : 0.5;
    std::vector<long> sub;
    for (long e = 0; e < 10; ++e) sub.push_back(e);
    CHECK(scan_stat(sub, p, 0.05) == doctest::Approx(1.0));
  }
  SUBCASE("half inside, 10% outside") {
    for (int e = 0; e < 100; ++e) p[e] = (e < 5 || (e >= 10 && e < 19)) ? 0.01 : 0.5;
    std::vector<long> sub;
    for (long e = 0; e < 10; ++e) sub.push_back(e);
    // (5/10)^5 * (9/90)^9
    CHECK(scan_stat(sub, p, 0.05) == doctest::Approx(3.125e-11).epsilon(1e-6));
  }
  SUBCASE("equal proportions fail the indicator") {
    // 1/10 inside vs 9/90 outside: equal rates
    for (int e = 0; e < 100; ++e) p[e] = (e == 0 || (e >= 10 && e < 19)) ? 0.01 : 0.5;
    std::vector<long> sub;
    for (long e = 0; e < 10; ++e) sub.push_back(e);
    CHECK(scan_stat(sub, p, 0.05) == doctest::Approx(0.0));
  }
  SUBCASE("subnetwork covering everything is rejected") {
    std::vector<long> all;
    for (long e = 0; e < 100; ++e) all.push_back(e);
    p.setConstant(0.5);
    CHECK_THROWS_AS(scan_stat(all, p, 0.05), std::invalid_argument);
  }
}

TEST_CASE("permutation p-value conventions") {
  NullDistribution null;
  null.kind = StatisticKind::FisherChernoff;
  null.values.assign(19, 1.0);
  CHECK(permutation_pvalue(2.0, null) == doctest::Approx(0.05));
  CHECK(permutation_pvalue(0.0, null) == doctest::Approx(1.0));
  CHECK(permutation_pvalue(1.0, null) == doctest::Approx(1.0));  // ties count

  null.values.clear();
  for (int i = 1; i <= 999; ++i) null.values.push_back(static_cast<double>(i));
  CHECK(permutation_pvalue(500.0, null) == doctest::Approx(0.501));
}

namespace {

ConnectomeDataset identical_groups_dataset(int n, int per_group, std::uint64_t seed) {
  ConnectomeDataset ds;
  ds.n = n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> base;
  for (int s = 0; s < per_group; ++s) {
    Eigen::VectorXd v(ds.n_edges());
    for (long e = 0; e < v.size(); ++e) v[e] = gauss(rng);
    base.push_back(v);
  }
  for (int g = 0; g < 2; ++g)
    for (int s = 0; s < per_group; ++s) {
      Subject subj;
      subj.id = (g ? "case" : "ctrl") + std::to_string(s);
      subj.label = g;
      subj.edges = base[static_cast<std::size_t>(s)];
      ds.subjects.push_back(subj);
    }
  return ds;
}

}  // namespace

TEST_CASE("group-label permutation on identical groups finds nothing") {
  const ConnectomeDataset ds = identical_groups_dataset(10, 6, 83);
  DetectConfig dcfg;
  dcfg.k_max = 4;
  InferConfig icfg;
  icfg.num_permutations = 49;
  icfg.seed = 11;
  const InferenceReport rep = glp_test(ds, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  CHECK(rep.significant.empty());
  CHECK(rep.subnetworks.empty());  // W = 0 gives no qualifying cluster
  CHECK(rep.null.values.size() == 49);
}

TEST_CASE("group-label permutation recovers a planted subnetwork") {
  SimConfig scfg;
  scfg.n = 30;
  scfg.planted_nodes = 8;
  scfg.theta = 1.0;
  scfg.sigma = 0.5;
  scfg.n_controls = 30;
  scfg.n_cases = 30;
  scfg.seed = 2222;
  const GeneratedDataset gen = generate_dataset(scfg);
  DetectConfig dcfg;
  dcfg.k_max = 6;
  InferConfig icfg;
  icfg.num_permutations = 99;
  icfg.seed = 31;
  const InferenceReport rep = glp_test(gen.dataset, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  REQUIRE(!rep.significant.empty());
  // the significant subnetworks jointly cover the planted edges
  std::set<long> covered;
  for (std::size_t i : rep.significant)
    for (long e : rep.subnetworks[i].edges) covered.insert(e);
  long missing = 0;
  for (long e : gen.truth_edges) missing += (covered.count(e) == 0);
  CHECK(missing == 0);
  for (std::size_t i : rep.significant) CHECK(*rep.subnetworks[i].p_value <= 0.05);
}

TEST_CASE("glp requires two subjects per group") {
  ConnectomeDataset ds = identical_groups_dataset(5, 3, 7);
  ds.subjects.erase(ds.subjects.begin());  // one control left... still 2+
  ds.subjects.erase(ds.subjects.begin());
  DetectConfig dcfg;
  InferConfig icfg;
  icfg.num_permutations = 19;
  CHECK_THROWS_AS(glp_test(ds, EdgeTestMethod::Wilcoxon, dcfg, icfg), std::invalid_argument);
}

TEST_CASE("edge permutation preserves the weight multiset") {
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> unif(0.0, 5.0);
  WeightMatrix w;
  w.n = 12;
  w.w.resize(66);
  for (long e = 0; e < 66; ++e) w.w[e] = unif(rng);
  const WeightMatrix shuffled = edge_permute(w, 42, 1);
  std::multiset<double> a(w.w.data(), w.w.data() + 66);
  std::multiset<double> b(shuffled.w.data(), shuffled.w.data() + 66);
  CHECK(a == b);
  CHECK(w.w != shuffled.w);  // astronomically unlikely to be identity
}

TEST_CASE("edge permutation places suprathreshold edges uniformly") {
  // binarized W with 12 of 66 hot edges: after permutation each position is
  // hot with probability 12/66, independent of where it started
  WeightMatrix w;
  w.n = 12;
  w.w = Eigen::VectorXd::Zero(66);
  for (long e = 0; e < 12; ++e) w.w[e] = 1.0;
  const int trials = 10000;
  std::vector<int> hits(66, 0);
  for (int t = 0; t < trials; ++t) {
    const WeightMatrix s = edge_permute(w, 1234, static_cast<std::uint64_t>(t));
    for (long e = 0; e < 66; ++e)
      if (s.w[e] > 0.5) hits[static_cast<std::size_t>(e)]++;
  }
  const double expect = trials * 12.0 / 66.0;
  const double sigma = std::sqrt(trials * (12.0 / 66.0) * (1.0 - 12.0 / 66.0));
  for (long e = 0; e < 66; ++e) {
    CHECK(hits[static_cast<std::size_t>(e)] > expect - 4.5 * sigma);
    CHECK(hits[static_cast<std::size_t>(e)] < expect + 4.5 * sigma);
  }
}

TEST_CASE("omnibus gate p-value conventions") {
  InferConfig icfg;
  icfg.omnibus_B = 99;
  icfg.seed = 5;
  SUBCASE("identical groups score zero everywhere") {
    const ConnectomeDataset ds = identical_groups_dataset(8, 5, 17);
    CHECK(spu_omnibus(ds, icfg) == doctest::Approx(1.0));
  }
  SUBCASE("strong planted signal is maximally significant") {
    SimConfig scfg;
    scfg.n = 15;
    scfg.planted_nodes = 6;
    scfg.theta = 2.0;
    scfg.sigma = 0.5;
    scfg.n_controls = 20;
    scfg.n_cases = 20;
    scfg.seed = 3003;
    const GeneratedDataset gen = generate_dataset(scfg);
    CHECK(spu_omnibus(gen.dataset, icfg) == doctest::Approx(1.0 / 100.0));
  }
}

TEST_CASE("graph-edge permutation with constant weights is never significant") {
  // every edge carries the same group difference: the omnibus gate passes
  // but the shuffled weight vector is identical to the observed one
  ConnectomeDataset ds;
  ds.n = 6;
  std::mt19937_64 rng(97);
  std::normal_distribution<double> gauss(0.0, 0.05);
  for (int s = 0; s < 24; ++s) {
    Subject subj;
    subj.label = s < 12 ? 0 : 1;
    subj.id = "s" + std::to_string(s);
    const double level = (subj.label ? 1.0 : 0.0) + gauss(rng);
    subj.edges = Eigen::VectorXd::Constant(15, level);
    ds.subjects.push_back(subj);
  }
  DetectConfig dcfg;
  dcfg.k_max = 3;
  InferConfig icfg;
  icfg.num_permutations = 49;
  icfg.omnibus_B = 49;
  icfg.seed = 3;
  const InferenceReport rep = gep_test(ds, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  CHECK(rep.gate_applied);
  CHECK(rep.gate_passed);
  for (const auto& sub : rep.subnetworks) CHECK(*sub.p_value == doctest::Approx(1.0));
  CHECK(rep.significant.empty());
}

TEST_CASE("graph-edge permutation gate fails on identical groups") {
  const ConnectomeDataset ds = identical_groups_dataset(8, 6, 19);
  DetectConfig dcfg;
  InferConfig icfg;
  icfg.num_permutations = 19;
  icfg.omnibus_B = 49;
  const InferenceReport rep = gep_test(ds, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  CHECK(rep.gate_applied);
  CHECK(!rep.gate_passed);
  CHECK(rep.subnetworks.empty());
  CHECK(rep.gate_p == doctest::Approx(1.0));
}

TEST_CASE("graph-edge permutation recovers a planted subnetwork") {
  SimConfig scfg;
  scfg.n = 30;
  scfg.planted_nodes = 8;
  scfg.theta = 1.0;
  scfg.sigma = 0.5;
  scfg.n_controls = 30;
  scfg.n_cases = 30;
  scfg.seed = 2323;
  const GeneratedDataset gen = generate_dataset(scfg);
  DetectConfig dcfg;
  dcfg.k_max = 6;
  InferConfig icfg;
  icfg.num_permutations = 99;
  icfg.omnibus_B = 99;
  icfg.seed = 37;
  const InferenceReport rep = gep_test(gen.dataset, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  CHECK(rep.gate_passed);
  REQUIRE(!rep.significant.empty());
  std::set<long> covered;
  for (std::size_t i : rep.significant)
    for (long e : rep.subnetworks[i].edges) covered.insert(e);
  long missing = 0;
  for (long e : gen.truth_edges) missing += (covered.count(e) == 0);
  CHECK(missing == 0);
}

TEST_CASE("reports are identical across worker counts") {
  SimConfig scfg;
  scfg.n = 20;
  scfg.planted_nodes = 6;
  scfg.theta = 1.0;
  scfg.sigma = 1.0;
  scfg.n_controls = 15;
  scfg.n_cases = 15;
  scfg.seed = 808;
  const GeneratedDataset gen = generate_dataset(scfg);
  DetectConfig dcfg;
  dcfg.k_max = 4;
  InferConfig icfg;
  icfg.num_permutations = 39;
  icfg.seed = 999;

  setenv("NETOBJ_THREADS", "1", 1);
  const InferenceReport r1 = glp_test(gen.dataset, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  setenv("NETOBJ_THREADS", "2", 1);
  const InferenceReport r2 = glp_test(gen.dataset, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  unsetenv("NETOBJ_THREADS");

  CHECK(r1.null.values == r2.null.values);
  CHECK(r1.subnetworks.size() == r2.subnetworks.size());
  for (std::size_t i = 0; i < r1.subnetworks.size(); ++i) {
    CHECK(r1.subnetworks[i].nodes == r2.subnetworks[i].nodes);
    CHECK(*r1.subnetworks[i].p_value == *r2.subnetworks[i].p_value);
  }
  CHECK(r1.significant == r2.significant);
}

TEST_CASE("node relabeling maps the detected subnetwork") {
  SimConfig scfg;
  scfg.n = 24;
  scfg.planted_nodes = 8;
  scfg.theta = 2.0;
  scfg.sigma = 0.5;
  scfg.n_controls = 20;
  scfg.n_cases = 20;
  scfg.seed = 515;
  const GeneratedDataset gen = generate_dataset(scfg);

  // relabel nodes by a fixed permutation
  std::vector<int> perm(static_cast<std::size_t>(scfg.n));
  std::iota(perm.begin(), perm.end(), 1);
  std::mt19937_64 rng(313);
  std::shuffle(perm.begin(), perm.end(), rng);
  EdgeIndex idx(scfg.n);
  ConnectomeDataset relabeled = gen.dataset;
  for (auto& subj : relabeled.subjects) {
    Eigen::VectorXd moved(subj.edges.size());
    for (int i = 1; i <= scfg.n; ++i)
      for (int j = i + 1; j <= scfg.n; ++j) {
        const int pi = perm[static_cast<std::size_t>(i - 1)], pj = perm[static_cast<std::size_t>(j - 1)];
        moved[idx.pack(std::min(pi, pj), std::max(pi, pj))] = subj.edges[idx.pack(i, j)];
      }
    subj.edges = moved;
  }

  DetectConfig dcfg;
  dcfg.k_max = 5;
  InferConfig icfg;
  icfg.num_permutations = 49;
  icfg.seed = 404;
  const InferenceReport a = glp_test(gen.dataset, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  const InferenceReport b = glp_test(relabeled, EdgeTestMethod::Wilcoxon, dcfg, icfg);
  REQUIRE(!a.significant.empty());
  REQUIRE(!b.significant.empty());
  // strongest subnetwork's node set maps through the permutation
  auto strongest = [](const InferenceReport& r) {
    std::size_t best = r.significant[0];
    for (std::size_t i : r.significant)
      if (*r.subnetworks[i].statistic > *r.subnetworks[best].statistic) best = i;
    return r.subnetworks[best].nodes;
  };
  std::vector<int> mapped;
  for (int v : strongest(a)) mapped.push_back(perm[static_cast<std::size_t>(v - 1)]);
  std::sort(mapped.begin(), mapped.end());
  CHECK(mapped == strongest(b));
}
