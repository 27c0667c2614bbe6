#include "netobj/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "netobj/edge_index.hpp"
#include "netobj/parallel.hpp"
#include "netobj/rng.hpp"

namespace netobj {

void SimConfig::validate() const {
  if (n < 3) throw std::invalid_argument("SimConfig: n must be >= 3");
  if (planted_nodes < 2 || planted_nodes > n)
    throw std::invalid_argument("SimConfig: planted_nodes must be in [2, n]");
  if (!(sigma > 0.0)) throw std::invalid_argument("SimConfig: sigma must be > 0");
  if (!(rho_cs >= 0.0 && rho_cs < 1.0))
    throw std::invalid_argument("SimConfig: rho_cs must be in [0,1)");
  if (n_controls < 2 || n_cases < 2)
    throw std::invalid_argument("SimConfig: need at least 2 subjects per group");
}

GeneratedDataset generate_dataset(const SimConfig& cfg) {
  cfg.validate();
  const EdgeIndex idx(cfg.n);
  const long n_edges = idx.n_edges();

  auto rng = make_stream(cfg.seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Latent subnetwork: a random node subset plays the planted clique.
  std::vector<int> nodes(static_cast<std::size_t>(cfg.n));
  std::iota(nodes.begin(), nodes.end(), 1);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  std::vector<int> planted(nodes.begin(), nodes.begin() + cfg.planted_nodes);
  std::sort(planted.begin(), planted.end());
  std::vector<long> truth = idx.induced_edges(planted);
  std::vector<char> is_planted(static_cast<std::size_t>(n_edges), 0);
  for (long e : truth) is_planted[static_cast<std::size_t>(e)] = 1;

  GeneratedDataset out;
  out.truth_edges = truth;
  out.truth_nodes = planted;
  out.dataset.n = cfg.n;

  const double sq_rho = std::sqrt(cfg.rho_cs);
  const double sq_rest = std::sqrt(1.0 - cfg.rho_cs);
  const int total_subjects = cfg.n_controls + cfg.n_cases;
  out.dataset.subjects.reserve(static_cast<std::size_t>(total_subjects));
  for (int s = 0; s < total_subjects; ++s) {
    Subject subj;
    const bool is_control = s < cfg.n_controls;
    subj.label = is_control ? 0 : 1;
    subj.id = (is_control ? "ctrl" : "case") + std::to_string(is_control ? s : s - cfg.n_controls);
    subj.edges.resize(n_edges);
    const double planted_mean = cfg.mu1 + (is_control ? cfg.theta : 0.0);
    const double shared = gauss(rng);  // one factor gives the exact CS covariance
    for (long e = 0; e < n_edges; ++e) {
      if (is_planted[static_cast<std::size_t>(e)])
        subj.edges[e] = planted_mean + cfg.sigma * (sq_rho * shared + sq_rest * gauss(rng));
      else
        subj.edges[e] = cfg.mu1 + cfg.sigma * gauss(rng);
    }
    out.dataset.subjects.push_back(std::move(subj));
  }
  return out;
}

std::pair<long, long> score_discovery(const std::vector<long>& discovered,
                                      const std::vector<long>& truth) {
  std::set<long> t(truth.begin(), truth.end());
  std::set<long> d(discovered.begin(), discovered.end());
  long fp = 0, fn = 0;
  for (long e : d) fp += (t.count(e) == 0);
  for (long e : t) fn += (d.count(e) == 0);
  return {fp, fn};
}

std::vector<long> significant_edges(const InferenceReport& report) {
  std::set<long> edges;
  for (std::size_t i : report.significant)
    for (long e : report.subnetworks[i].edges) edges.insert(e);
  return std::vector<long>(edges.begin(), edges.end());
}

namespace {

struct CellScores {
  std::vector<double> edge_fp, edge_fn, net_fp, net_fn;
};

void push_net_counts(const InferenceReport& rep, const std::vector<long>& truth,
                     CellScores& cell) {
  // A significant subnetwork counts as a true detection when it covers any
  // planted edge; the planted network is missed when no significant
  // subnetwork touches it.
  std::set<long> t(truth.begin(), truth.end());
  int false_nets = 0;
  bool hit = false;
  for (std::size_t i : rep.significant) {
    bool overlaps = false;
    for (long e : rep.subnetworks[i].edges)
      if (t.count(e)) { overlaps = true; break; }
    if (overlaps) hit = true;
    else ++false_nets;
  }
  cell.net_fp.push_back(false_nets);
  cell.net_fn.push_back(hit ? 0.0 : 1.0);
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

std::string setting_name(const SimConfig& cfg) {
  return std::to_string(cfg.n_controls) + "v" + std::to_string(cfg.n_cases) +
         " sigma=" + std::to_string(cfg.sigma).substr(0, 4) +
         " theta=" + std::to_string(cfg.theta).substr(0, 4);
}

}  // namespace

std::vector<ScoreRow> run_table1(const std::vector<SimConfig>& grid,
                                 const std::vector<std::string>& methods,
                                 const BenchOptions& options) {
  if (grid.empty()) throw std::invalid_argument("run_table1: empty grid");
  std::vector<ScoreRow> rows;
  for (const auto& cfg : grid) {
    cfg.validate();
    std::vector<CellScores> cells(methods.size());
    const int R = options.replicates;

    for (int r = 0; r < R; ++r) {
      SimConfig rep_cfg = cfg;
      rep_cfg.seed = splitmix_seed(cfg.seed, static_cast<std::uint64_t>(r));
      const GeneratedDataset gen = generate_dataset(rep_cfg);

      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const std::string& method = methods[mi];
        InferConfig icfg = options.infer;
        icfg.seed = splitmix_seed(rep_cfg.seed, 0x1000 + mi);
        std::vector<long> discovered;
        if (method == "glp" || method == "gep") {
          const InferenceReport rep =
              method == "glp" ? glp_test(gen.dataset, options.method, options.detect, icfg)
                              : gep_test(gen.dataset, options.method, options.detect, icfg);
          discovered = significant_edges(rep);
          push_net_counts(rep, gen.truth_edges, cells[mi]);
        } else if (method == "bh") {
          const EdgeTestResult tests = edgewise_tests(gen.dataset, options.method);
          const RejectionSet rej = bh_fdr(tests.p_values, options.bh_q);
          discovered = rej.rejected;
        } else if (method == "lfdr") {
          const EdgeTestResult tests = edgewise_tests(gen.dataset, options.method);
          const LfdrResult res = local_fdr(tests.p_values, options.lfdr);
          discovered = res.rejections.rejected;
        } else if (method == "nbs") {
          const NbsResult res = nbs(gen.dataset, options.nbs_tau, options.infer.num_permutations,
                                    icfg.seed);
          for (const auto& comp : res.components)
            if (comp.p_value <= options.infer.alpha)
              discovered.insert(discovered.end(), comp.edges.begin(), comp.edges.end());
        } else {
          throw std::invalid_argument("run_table1: unknown method '" + method + "'");
        }
        auto [fp, fn] = score_discovery(discovered, gen.truth_edges);
        cells[mi].edge_fp.push_back(static_cast<double>(fp));
        cells[mi].edge_fn.push_back(static_cast<double>(fn));
      }
    }

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      ScoreRow row;
      row.method = methods[mi];
      row.setting = setting_name(cfg);
      row.replicates = R;
      std::tie(row.edge_fp_mean, row.edge_fp_sd) = mean_sd(cells[mi].edge_fp);
      std::tie(row.edge_fn_mean, row.edge_fn_sd) = mean_sd(cells[mi].edge_fn);
      std::tie(row.net_fp_mean, row.net_fp_sd) = mean_sd(cells[mi].net_fp);
      std::tie(row.net_fn_mean, row.net_fn_sd) = mean_sd(cells[mi].net_fn);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Type1Result type1_experiment(const SimConfig& cfg, int iterations, const BenchOptions& options) {
  if (iterations < 1) throw std::invalid_argument("type1_experiment: iterations must be >= 1");
  if (cfg.theta != 0.0)
    throw std::invalid_argument("type1_experiment: requires theta = 0");
  cfg.validate();

  Type1Result out;
  out.iterations = iterations;
  out.glp_global_p.assign(static_cast<std::size_t>(iterations), 1.0);
  out.gep_global_p.assign(static_cast<std::size_t>(iterations), 1.0);
  std::vector<char> glp_hit(static_cast<std::size_t>(iterations), 0);
  std::vector<char> gep_hit(static_cast<std::size_t>(iterations), 0);

  parallel_for(iterations, [&](std::int64_t it) {
    SimConfig rep_cfg = cfg;
    rep_cfg.seed = splitmix_seed(cfg.seed, static_cast<std::uint64_t>(it));
    const GeneratedDataset gen = generate_dataset(rep_cfg);
    InferConfig icfg = options.infer;
    icfg.seed = splitmix_seed(rep_cfg.seed, 0x2000);

    const InferenceReport glp = glp_test(gen.dataset, options.method, options.detect, icfg);
    glp_hit[static_cast<std::size_t>(it)] = !glp.significant.empty();
    double pmin = 1.0;
    for (const auto& sub : glp.subnetworks) pmin = std::min(pmin, sub.p_value.value_or(1.0));
    out.glp_global_p[static_cast<std::size_t>(it)] = pmin;

    icfg.seed = splitmix_seed(rep_cfg.seed, 0x3000);
    const InferenceReport gep = gep_test(gen.dataset, options.method, options.detect, icfg);
    gep_hit[static_cast<std::size_t>(it)] = !gep.significant.empty();
    pmin = gep.gate_passed ? 1.0 : std::max(gep.gate_p, options.infer.alpha + 1e-12);
    if (gep.gate_passed) {
      for (const auto& sub : gep.subnetworks) pmin = std::min(pmin, sub.p_value.value_or(1.0));
    }
    out.gep_global_p[static_cast<std::size_t>(it)] = pmin;
  });

  long gl = 0, ge = 0;
  for (char h : glp_hit) gl += h;
  for (char h : gep_hit) ge += h;
  out.rate_glp = static_cast<double>(gl) / static_cast<double>(iterations);
  out.rate_gep = static_cast<double>(ge) / static_cast<double>(iterations);
  return out;
}

}  // namespace netobj
