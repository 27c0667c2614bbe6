#include "netobj/detect.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "netobj/edge_index.hpp"
#include "netobj/errors.hpp"
#include "netobj/graph_metrics.hpp"
#include "netobj/rng.hpp"

namespace netobj {

void DetectConfig::validate(int n) const {
  if (!(lambda0 > 0.0 && lambda0 < 1.0))
    throw std::invalid_argument("DetectConfig: lambda0 must be in (0,1)");
  if (k_min < 1 || k_min > resolved_k_max(n))
    throw std::invalid_argument("DetectConfig: empty K range");
  if (kmeans_restarts < 1) throw std::invalid_argument("DetectConfig: kmeans_restarts < 1");
}

int DetectConfig::resolved_k_max(int n) const {
  int k = k_max > 0 ? k_max : std::min(n - 1, 30);
  return std::min(k, n);
}

namespace {

// Relabels clusters by first appearance so equal partitions compare equal.
Partition canonical_partition(const std::vector<int>& labels0, int K) {
  Partition p;
  p.K = K;
  p.assignment.resize(labels0.size(), 0);
  std::vector<int> remap(static_cast<std::size_t>(K), 0);
  int next = 1;
  for (std::size_t v = 0; v < labels0.size(); ++v) {
    int c = labels0[v];
    if (remap[static_cast<std::size_t>(c)] == 0) remap[static_cast<std::size_t>(c)] = next++;
    p.assignment[v] = remap[static_cast<std::size_t>(c)];
  }
  return p;
}

struct ClusterMass {
  std::vector<double> weight_sum;  // per cluster
  std::vector<long> edge_count;    // all node pairs within the cluster
  std::vector<int> node_count;
};

ClusterMass cluster_mass(const WeightMatrix& W, const Partition& partition) {
  ClusterMass cm;
  cm.weight_sum.assign(static_cast<std::size_t>(partition.K), 0.0);
  cm.edge_count.assign(static_cast<std::size_t>(partition.K), 0);
  cm.node_count.assign(static_cast<std::size_t>(partition.K), 0);
  for (int v = 0; v < partition.n(); ++v)
    cm.node_count[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(v)] - 1)]++;
  long e = 0;
  for (int i = 0; i < W.n; ++i) {
    const int ci = partition.assignment[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < W.n; ++j, ++e) {
      if (ci == partition.assignment[static_cast<std::size_t>(j)]) {
        cm.weight_sum[static_cast<std::size_t>(ci - 1)] += W.w[e];
        cm.edge_count[static_cast<std::size_t>(ci - 1)]++;
      }
    }
  }
  return cm;
}

double criterion_from_mass(const ClusterMass& cm, double lambda0, int min_cluster_nodes) {
  double total = 0.0;
  for (std::size_t k = 0; k < cm.weight_sum.size(); ++k) {
    if (cm.node_count[k] < min_cluster_nodes) continue;
    if (cm.edge_count[k] < 1 || cm.weight_sum[k] <= 0.0) continue;
    total += cm.weight_sum[k] * std::pow(static_cast<double>(cm.edge_count[k]), -lambda0);
  }
  return total;
}

}  // namespace

double objective_value(const WeightMatrix& W, const Partition& partition, double lambda0,
                       int min_cluster_nodes) {
  if (partition.n() != W.n)
    throw std::invalid_argument("objective_value: partition size does not match W");
  return criterion_from_mass(cluster_mass(W, partition), lambda0, min_cluster_nodes);
}

Partition refine_partition(const WeightMatrix& W, Partition partition, double lambda0,
                           int max_passes, int min_cluster_nodes) {
  if (partition.K < 2 || max_passes < 1) return partition;
  const int n = W.n;
  const int K = partition.K;
  const Eigen::MatrixXd dense = W.dense();

  ClusterMass cm = cluster_mass(W, partition);
  auto term_of = [&](double sum, long cnt, int nodes) {
    if (nodes < min_cluster_nodes || cnt < 1 || sum <= 0.0) return 0.0;
    return sum * std::pow(static_cast<double>(cnt), -lambda0);
  };
  auto pairs = [](long sz) { return sz * (sz - 1) / 2; };

  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;

    // Merge phase: single-node moves cannot walk a cluster across into
    // another (the intermediate states score worse), so profitable whole-
    // cluster merges are taken directly.
    bool merged = true;
    while (merged) {
      merged = false;
      Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(K, K);
      for (int i = 0; i < n; ++i) {
        const int ci = partition.assignment[static_cast<std::size_t>(i)] - 1;
        for (int j = i + 1; j < n; ++j) {
          const int cj = partition.assignment[static_cast<std::size_t>(j)] - 1;
          if (ci != cj) cross(std::min(ci, cj), std::max(ci, cj)) += dense(i, j);
        }
      }
      int best_a = -1, best_b = -1;
      double best_delta = 1e-12;
      for (int a = 0; a < K; ++a) {
        const auto au = static_cast<std::size_t>(a);
        if (cm.node_count[au] == 0) continue;
        for (int b = a + 1; b < K; ++b) {
          const auto bu = static_cast<std::size_t>(b);
          if (cm.node_count[bu] == 0) continue;
          const int nodes = cm.node_count[au] + cm.node_count[bu];
          const double sum = cm.weight_sum[au] + cm.weight_sum[bu] + cross(a, b);
          const double delta = term_of(sum, pairs(nodes), nodes) -
                               term_of(cm.weight_sum[au], cm.edge_count[au], cm.node_count[au]) -
                               term_of(cm.weight_sum[bu], cm.edge_count[bu], cm.node_count[bu]);
          if (delta > best_delta) {
            best_delta = delta;
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best_a >= 0) {
        const auto au = static_cast<std::size_t>(best_a);
        const auto bu = static_cast<std::size_t>(best_b);
        for (int v = 0; v < n; ++v)
          if (partition.assignment[static_cast<std::size_t>(v)] - 1 == best_b)
            partition.assignment[static_cast<std::size_t>(v)] = best_a + 1;
        cm.weight_sum[au] += cm.weight_sum[bu] + cross(best_a, best_b);
        cm.node_count[au] += cm.node_count[bu];
        cm.edge_count[au] = pairs(cm.node_count[au]);
        cm.weight_sum[bu] = 0.0;
        cm.node_count[bu] = 0;
        cm.edge_count[bu] = 0;
        merged = true;
        moved = true;
      }
    }

    for (int v = 0; v < n; ++v) {
      const int from = partition.assignment[static_cast<std::size_t>(v)] - 1;
      const auto fu = static_cast<std::size_t>(from);

      // weight from v into each cluster
      Eigen::VectorXd link = Eigen::VectorXd::Zero(K);
      for (int u = 0; u < n; ++u)
        if (u != v) link[partition.assignment[static_cast<std::size_t>(u)] - 1] += dense(v, u);

      const double from_term = term_of(cm.weight_sum[fu], cm.edge_count[fu], cm.node_count[fu]);
      const double from_term_new = term_of(cm.weight_sum[fu] - link[from],
                                           pairs(cm.node_count[fu] - 1), cm.node_count[fu] - 1);

      int best_to = -1;
      double best_delta = 1e-12;  // strict improvement keeps the sweep deterministic
      for (int to = 0; to < K; ++to) {
        if (to == from) continue;
        const auto tu = static_cast<std::size_t>(to);
        const double to_term = term_of(cm.weight_sum[tu], cm.edge_count[tu], cm.node_count[tu]);
        const double to_term_new = term_of(cm.weight_sum[tu] + link[to],
                                           pairs(cm.node_count[tu] + 1), cm.node_count[tu] + 1);
        const double delta = (from_term_new + to_term_new) - (from_term + to_term);
        if (delta > best_delta) {
          best_delta = delta;
          best_to = to;
        }
      }
      if (best_to >= 0) {
        const auto tu = static_cast<std::size_t>(best_to);
        cm.weight_sum[fu] -= link[from];
        cm.edge_count[fu] = pairs(cm.node_count[fu] - 1);
        cm.node_count[fu] -= 1;
        cm.weight_sum[tu] += link[best_to];
        cm.edge_count[tu] = pairs(cm.node_count[tu] + 1);
        cm.node_count[tu] += 1;
        partition.assignment[static_cast<std::size_t>(v)] = best_to + 1;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return partition;
}

namespace detail {

Eigen::MatrixXd spectral_embedding(const WeightMatrix& W, int k) {
  const Eigen::MatrixXd dense = W.dense();
  Eigen::MatrixXd lap = -dense;
  lap.diagonal() = dense.rowwise().sum();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectral_embedding: eigen-solver failed on the graph Laplacian (n=" +
                         std::to_string(W.n) + ")");
  // Eigenvalues come back sorted ascending; smallest-K eigenvectors.
  return solver.eigenvectors().leftCols(k);
}

namespace {

std::pair<std::vector<int>, double> kmeans_single(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                                  int k, int max_iter, std::mt19937_64& rng) {
  const long n = points.rows();
  const long d = points.cols();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // k-means++ seeding
  Eigen::MatrixXd centers(k, d);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  long first = static_cast<long>(unif(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    long pick = -1;
    if (total > 0.0) {
      double target = unif(rng) * total;
      double acc = 0.0;
      for (long i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) { pick = i; break; }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // All remaining points coincide with a center; take the first
      // unchosen index so the run stays deterministic.
      for (long i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) { pick = i; break; }
      if (pick < 0) pick = 0;
    }
    centers.row(c) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd sums(k, d);
  Eigen::VectorXi counts(k);
  double inertia = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    bool moved = false;
    inertia = 0.0;
    for (long i = 0; i < n; ++i) {
      int arg = 0;
      double best = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dist = (points.row(i) - centers.row(c)).squaredNorm();
        if (dist < best) { best = dist; arg = c; }
      }
      inertia += best;
      if (labels[static_cast<std::size_t>(i)] != arg) {
        labels[static_cast<std::size_t>(i)] = arg;
        moved = true;
      }
    }
    sums.setZero();
    counts.setZero();
    for (long i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts[labels[static_cast<std::size_t>(i)]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        // Re-seed an empty cluster with the point farthest from its
        // centroid (lowest index on ties).
        long far_i = 0;
        double far_d = -1.0;
        for (long i = 0; i < n; ++i) {
          const double dist =
              (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
          if (dist > far_d) { far_d = dist; far_i = i; }
        }
        centers.row(c) = points.row(far_i);
        moved = true;
      }
    }
    if (!moved && iter > 0) break;
  }
  return {labels, inertia};
}

}  // namespace

std::vector<int> kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, int restarts,
                        int max_iter, std::uint64_t seed) {
  const long n = points.rows();
  if (k < 1 || n < 1) throw std::invalid_argument("kmeans: bad inputs");
  if (k == 1) return std::vector<int>(static_cast<std::size_t>(n), 0);
  std::vector<int> best_labels(static_cast<std::size_t>(n), 0);
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(r) + 1);
    auto [labels, inertia] = kmeans_single(points, k, max_iter, rng);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = std::move(labels);
    }
  }
  return best_labels;
}

std::vector<std::vector<int>> kmeans_candidates(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                                int k, int restarts, int max_iter,
                                                std::uint64_t seed) {
  const long n = points.rows();
  if (k < 1 || n < 1) throw std::invalid_argument("kmeans: bad inputs");
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(restarts));
  if (k == 1) {
    out.emplace_back(static_cast<std::size_t>(n), 0);
    return out;
  }
  for (int r = 0; r < restarts; ++r) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(r) + 1);
    out.push_back(kmeans_single(points, k, max_iter, rng).first);
  }
  return out;
}

}  // namespace detail

Partition ratio_cut_partition(const WeightMatrix& W, int K, const DetectConfig& config) {
  if (K < 1 || K > W.n)
    throw std::invalid_argument("ratio_cut_partition: require 1 <= K <= n");
  if (K == 1) {
    Partition p;
    p.K = 1;
    p.assignment.assign(static_cast<std::size_t>(W.n), 1);
    return p;
  }
  const Eigen::MatrixXd embed = detail::spectral_embedding(W, K);
  auto labels = detail::kmeans(embed, K, config.kmeans_restarts, config.kmeans_max_iter,
                               config.seed ^ (0x9E3779B9ULL * static_cast<std::uint64_t>(K)));
  return canonical_partition(labels, K);
}

DetectionResult select_k(const WeightMatrix& W, const DetectConfig& config) {
  config.validate(W.n);
  const int kmax = config.resolved_k_max(W.n);
  const int kmin = config.k_min;

  // One decomposition serves the whole grid: the K-column embedding is the
  // left block of the kmax-column one.
  Eigen::MatrixXd embed;
  if (kmax > 1) embed = detail::spectral_embedding(W, kmax);

  DetectionResult best;
  double best_value = -1.0;
  for (int K = kmin; K <= kmax; ++K) {
    Partition part;
    double value = -1.0;
    if (K == 1) {
      part.K = 1;
      part.assignment.assign(static_cast<std::size_t>(W.n), 1);
      value = objective_value(W, part, config.lambda0, config.min_cluster_nodes);
    } else {
      // Every restart is polished against the criterion; the spectral
      // embedding provides the main starting points, a few random
      // partitions add diversity.
      auto candidates =
          detail::kmeans_candidates(embed.leftCols(K), K, config.kmeans_restarts,
                                    config.kmeans_max_iter,
                                    config.seed ^ (0x9E3779B9ULL * static_cast<std::uint64_t>(K)));
      for (int r = 0; r < config.random_restarts; ++r) {
        auto rng = make_stream(config.seed ^ 0x5D588B65ULL,
                               static_cast<std::uint64_t>(K) * 1024 + static_cast<std::uint64_t>(r));
        std::uniform_int_distribution<int> pick(0, K - 1);
        std::vector<int> labels(static_cast<std::size_t>(W.n));
        for (auto& l : labels) l = pick(rng);
        candidates.push_back(std::move(labels));
      }
      for (const auto& labels : candidates) {
        Partition cand = canonical_partition(labels, K);
        cand = refine_partition(W, std::move(cand), config.lambda0, config.refine_passes,
                                config.min_cluster_nodes);
        const double v = objective_value(W, cand, config.lambda0, config.min_cluster_nodes);
        if (v > value) {
          value = v;
          part = std::move(cand);
        }
      }
    }
    if (value > best_value) {  // strict: ties keep the smaller K
      best_value = value;
      best.partition = std::move(part);
      best.k_selected = K;
    }
  }
  best.objective = best_value;

  const ClusterMass cm = cluster_mass(W, best.partition);
  best.per_cluster_quality.resize(static_cast<std::size_t>(best.partition.K), 0.0);
  for (int k = 0; k < best.partition.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (cm.edge_count[ku] > 0)
      best.per_cluster_quality[ku] = cm.weight_sum[ku] / static_cast<double>(cm.edge_count[ku]);
  }

  EdgeIndex idx(W.n);
  auto clusters = best.partition.clusters();
  for (int k = 0; k < best.partition.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (cm.node_count[ku] < config.min_cluster_nodes) continue;
    if (cm.weight_sum[ku] <= 0.0) continue;
    Subnetwork sub;
    sub.nodes = clusters[ku];
    sub.edges = idx.induced_edges(sub.nodes);
    sub.kind = TopologyKind::CliqueInduced;
    best.subnetworks.push_back(std::move(sub));
  }
  return best;
}

void attach_topology_metrics(Subnetwork& sub, const Eigen::VectorXd& p_values, int n, double p0) {
  if (sub.edges.empty()) return;
  long supra = 0;
  for (long e : sub.edges) supra += (p_values[e] < p0);
  sub.topology.suprathreshold_density =
      static_cast<double>(supra) / static_cast<double>(sub.edges.size());
  // Rich-club profile of the suprathreshold subgraph on the subnetwork's
  // nodes.
  const int ns = static_cast<int>(sub.nodes.size());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(ns, ns);
  EdgeIndex idx(n);
  for (int a = 0; a < ns; ++a)
    for (int b = a + 1; b < ns; ++b) {
      const long e = idx.pack(sub.nodes[static_cast<std::size_t>(a)],
                              sub.nodes[static_cast<std::size_t>(b)]);
      if (p_values[e] < p0) {
        adj(a, b) = 1.0;
        adj(b, a) = 1.0;
      }
    }
  sub.topology.rich_club = rich_club_profile(adj);
}

DetectionResult extract_subnetworks(const ConnectomeDataset& dataset, EdgeTestMethod method,
                                    const DetectConfig& config) {
  dataset.validate();
  const EdgeTestResult tests = edgewise_tests(dataset, method);
  const WeightMatrix W = weights_from_pvalues(tests, dataset.n);
  DetectionResult result = select_k(W, config);
  for (auto& sub : result.subnetworks)
    attach_topology_metrics(sub, tests.p_values, dataset.n, config.topo_p0);
  return result;
}

}  // namespace netobj
