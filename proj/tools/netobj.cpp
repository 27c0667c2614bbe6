// Command-line front end: subnetwork detection and permutation testing on
// connectome datasets, plus baselines and the simulation harnesses.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "netobj/baselines.hpp"
#include "netobj/detect.hpp"
#include "netobj/edge_stats.hpp"
#include "netobj/errors.hpp"
#include "netobj/infer.hpp"
#include "netobj/io.hpp"
#include "netobj/sim.hpp"
#include "netobj/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct CommonFlags {
  std::string manifest;
  std::string method = "wilcoxon";
  std::string statistic = "fisher";
  std::string perm = "glp";
  int M = 1000;
  double alpha = 0.05;
  double lambda0 = 0.5;
  int kmax = 0;
  double p0 = 0.05;
  std::uint64_t seed = 20240915;
  std::string out_dir = ".";
  bool emit_heatmap = false;
};

netobj::EdgeTestMethod parse_method(const std::string& m) {
  if (m == "wilcoxon") return netobj::EdgeTestMethod::Wilcoxon;
  if (m == "welch-t") return netobj::EdgeTestMethod::WelchT;
  throw CLI::ValidationError("--method", "must be wilcoxon or welch-t");
}

netobj::DetectConfig detect_config(const CommonFlags& f) {
  netobj::DetectConfig cfg;
  cfg.lambda0 = f.lambda0;
  cfg.k_max = f.kmax;
  cfg.topo_p0 = f.p0;
  cfg.seed = f.seed;
  return cfg;
}

netobj::InferConfig infer_config(const CommonFlags& f) {
  netobj::InferConfig cfg;
  cfg.num_permutations = f.M;
  cfg.alpha = f.alpha;
  cfg.statistic = f.statistic == "scan" ? netobj::StatisticKind::Scan
                                        : netobj::StatisticKind::FisherChernoff;
  cfg.p0 = f.p0;
  cfg.seed = f.seed;
  return cfg;
}

json edge_summary(const netobj::EdgeTestResult& tests, double p0) {
  long below = 0;
  for (long e = 0; e < tests.p_values.size(); ++e) below += (tests.p_values[e] < p0);
  return json{{"method", tests.method == netobj::EdgeTestMethod::Wilcoxon ? "wilcoxon" : "welch-t"},
              {"n_edges", tests.p_values.size()},
              {"min_p", tests.p_values.minCoeff()},
              {"n_below_p0", below},
              {"p0", p0}};
}

netobj::ResultDocument make_document(const std::string& command, const json& config,
                                     std::uint64_t seed) {
  netobj::ResultDocument doc;
  doc.command = command;
  doc.config = config;
  doc.seed = seed;
  doc.tool_version = netobj::kVersion;
  doc.timestamp = iso_timestamp();
  return doc;
}

void write_outputs(const netobj::ResultDocument& doc, const CommonFlags& flags,
                   const netobj::EdgeTestResult* tests, const netobj::WeightMatrix* weights,
                   const std::vector<netobj::Subnetwork>* subnetworks, int n) {
  fs::create_directories(flags.out_dir);
  netobj::atomic_write_text((fs::path(flags.out_dir) / "results.json").string(),
                            doc.to_json().dump(2) + "\n");
  if (tests && weights) {
    static const std::vector<netobj::Subnetwork> none;
    const auto& subs = subnetworks ? *subnetworks : none;
    netobj::atomic_write_text((fs::path(flags.out_dir) / "edges.csv").string(),
                              netobj::edge_csv(n, *tests, *weights, subs));
    if (flags.emit_heatmap)
      netobj::atomic_write_text((fs::path(flags.out_dir) / "heatmap.svg").string(),
                                netobj::svg_heatmap(n, tests->p_values, subs));
  }
}

json flags_json(const CommonFlags& f) {
  return json{{"manifest", f.manifest}, {"method", f.method},   {"statistic", f.statistic},
              {"perm", f.perm},         {"M", f.M},             {"alpha", f.alpha},
              {"lambda0", f.lambda0},   {"kmax", f.kmax},       {"p0", f.p0},
              {"out_dir", f.out_dir},   {"emit_heatmap", f.emit_heatmap}};
}

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_manifest) {
  if (needs_manifest)
    cmd->add_option("--manifest", f.manifest, "dataset manifest (JSON)")->required();
  cmd->add_option("--method", f.method, "edge test: wilcoxon | welch-t")
      ->check(CLI::IsMember({"wilcoxon", "welch-t"}));
  cmd->add_option("--statistic", f.statistic, "subnetwork statistic: fisher | scan")
      ->check(CLI::IsMember({"fisher", "scan"}));
  cmd->add_option("--M", f.M, "permutation count");
  cmd->add_option("--alpha", f.alpha, "significance level");
  cmd->add_option("--lambda0", f.lambda0, "size-penalty exponent");
  cmd->add_option("--kmax", f.kmax, "largest K in the grid search (0 = auto)");
  cmd->add_option("--p0", f.p0, "suprathreshold p cutoff");
  cmd->add_option("--seed", f.seed, "master RNG seed");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_flag("--emit-heatmap", f.emit_heatmap, "write an SVG heatmap of -log(p)");
}

int run(int argc, char** argv) {
  CLI::App app{"latent differential subnetwork detection and permutation inference"};
  app.require_subcommand(1);
  CommonFlags f;

  auto* cmd_edge = app.add_subcommand("edge-tests", "per-edge two-sample tests only");
  add_common(cmd_edge, f, true);

  auto* cmd_detect = app.add_subcommand("detect", "edge tests + subnetwork detection");
  add_common(cmd_detect, f, true);

  auto* cmd_test = app.add_subcommand("test", "detection plus permutation inference");
  add_common(cmd_test, f, true);
  cmd_test->add_option("--perm", f.perm, "null generation: glp | gep")
      ->check(CLI::IsMember({"glp", "gep"}));

  auto* cmd_base = app.add_subcommand("baseline", "multiple-testing baselines");
  add_common(cmd_base, f, true);
  double bh_q = 0.2, lfdr_cutoff = 0.2, nbs_tau = 4.0;
  cmd_base->add_option("--q", bh_q, "BH / q-value threshold");
  cmd_base->add_option("--cutoff", lfdr_cutoff, "local fdr cutoff");
  cmd_base->add_option("--tau", nbs_tau, "component t-statistic threshold");

  auto* cmd_sim = app.add_subcommand("simulate", "generate a planted-subnetwork dataset");
  add_common(cmd_sim, f, false);
  netobj::SimConfig sim_cfg;
  cmd_sim->add_option("--n", sim_cfg.n, "node count");
  cmd_sim->add_option("--planted", sim_cfg.planted_nodes, "planted clique size");
  cmd_sim->add_option("--theta", sim_cfg.theta, "mean shift");
  cmd_sim->add_option("--sigma", sim_cfg.sigma, "noise SD");
  cmd_sim->add_option("--rho", sim_cfg.rho_cs, "within-subnetwork correlation");
  cmd_sim->add_option("--controls", sim_cfg.n_controls, "control count");
  cmd_sim->add_option("--cases", sim_cfg.n_cases, "case count");
  std::string sim_name = "dataset";
  cmd_sim->add_option("--name", sim_name, "manifest base name");

  auto* cmd_bench = app.add_subcommand("bench-table1", "planted-recovery benchmark grid");
  add_common(cmd_bench, f, false);
  int replicates = 100;
  std::vector<double> sigmas{0.5, 1.0, 2.0};
  std::vector<int> group_sizes{30, 60};
  double bench_theta = 1.0;
  std::vector<std::string> bench_methods{"glp", "gep", "bh", "lfdr"};
  cmd_bench->add_option("--replicates", replicates, "replicates per cell");
  cmd_bench->add_option("--sigmas", sigmas, "noise SD grid");
  cmd_bench->add_option("--sizes", group_sizes, "per-group sizes");
  cmd_bench->add_option("--theta", bench_theta, "mean shift");
  cmd_bench->add_option("--methods", bench_methods, "methods: glp gep bh lfdr nbs");

  auto* cmd_type1 = app.add_subcommand("type1", "network false-positive rate at theta = 0");
  add_common(cmd_type1, f, false);
  int iterations = 1000;
  int t1_controls = 30, t1_cases = 30, t1_n = 100, t1_planted = 20;
  cmd_type1->add_option("--iterations", iterations, "null datasets to simulate");
  cmd_type1->add_option("--controls", t1_controls, "control count");
  cmd_type1->add_option("--cases", t1_cases, "case count");
  cmd_type1->add_option("--n", t1_n, "node count");
  cmd_type1->add_option("--planted", t1_planted, "correlated block size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  if (cmd_edge->parsed() || cmd_detect->parsed() || cmd_test->parsed() || cmd_base->parsed()) {
    const netobj::ConnectomeDataset ds = netobj::load_dataset(f.manifest);
    const netobj::EdgeTestMethod method = parse_method(f.method);
    const netobj::EdgeTestResult tests = netobj::edgewise_tests(ds, method);
    const netobj::WeightMatrix weights = netobj::weights_from_pvalues(tests, ds.n);

    if (cmd_edge->parsed()) {
      auto doc = make_document("edge-tests", flags_json(f), f.seed);
      doc.edge_tests = edge_summary(tests, f.p0);
      write_outputs(doc, f, &tests, &weights, nullptr, ds.n);
    } else if (cmd_detect->parsed()) {
      auto doc = make_document("detect", flags_json(f), f.seed);
      doc.edge_tests = edge_summary(tests, f.p0);
      netobj::DetectionResult det = netobj::select_k(weights, detect_config(f));
      for (auto& sub : det.subnetworks)
        netobj::attach_topology_metrics(sub, tests.p_values, ds.n, f.p0);
      doc.detection = netobj::detection_to_json(det, ds.n);
      write_outputs(doc, f, &tests, &weights, &det.subnetworks, ds.n);
    } else if (cmd_test->parsed()) {
      auto doc = make_document("test", flags_json(f), f.seed);
      doc.config["perm"] = f.perm;
      doc.edge_tests = edge_summary(tests, f.p0);
      const netobj::InferenceReport rep =
          f.perm == "gep" ? netobj::gep_test(ds, method, detect_config(f), infer_config(f))
                          : netobj::glp_test(ds, method, detect_config(f), infer_config(f));
      doc.detection = netobj::detection_to_json(rep.detection, ds.n);
      doc.inference = netobj::inference_to_json(rep, tests, ds.n);
      write_outputs(doc, f, &tests, &weights, &rep.subnetworks, ds.n);
    } else {
      auto doc = make_document("baseline", flags_json(f), f.seed);
      doc.config["q"] = bh_q;
      doc.config["cutoff"] = lfdr_cutoff;
      doc.config["tau"] = nbs_tau;
      doc.edge_tests = edge_summary(tests, f.p0);
      json b;
      const auto bh = netobj::bh_fdr(tests.p_values, bh_q);
      b["bh"] = {{"q", bh_q}, {"rejected", bh.rejected}};
      const Eigen::VectorXd qv = netobj::storey_qvalues(tests.p_values);
      std::vector<long> storey_rej;
      for (long e = 0; e < qv.size(); ++e)
        if (qv[e] <= bh_q) storey_rej.push_back(e);
      b["storey"] = {{"q", bh_q}, {"rejected", storey_rej}, {"min_q", qv.minCoeff()}};
      netobj::LfdrConfig lcfg;
      lcfg.cutoff = lfdr_cutoff;
      const auto lf = netobj::local_fdr(tests.p_values, lcfg);
      b["lfdr"] = {{"cutoff", lfdr_cutoff}, {"pi0", lf.pi0}, {"rejected", lf.rejections.rejected}};
      const auto nb = netobj::nbs(ds, nbs_tau, f.M, f.seed);
      json comps = json::array();
      for (const auto& c : nb.components)
        comps.push_back({{"nodes", c.nodes}, {"edges", c.edges}, {"p_value", c.p_value}});
      b["nbs"] = {{"tau", nbs_tau}, {"components", comps}};
      doc.baselines = b;
      write_outputs(doc, f, &tests, &weights, nullptr, ds.n);
    }
    return 0;
  }

  if (cmd_sim->parsed()) {
    sim_cfg.seed = f.seed;
    const netobj::GeneratedDataset gen = netobj::generate_dataset(sim_cfg);
    fs::create_directories(f.out_dir);
    const std::string mpath = netobj::write_dataset(gen.dataset, f.out_dir, sim_name);
    json truth = {{"nodes", gen.truth_nodes}, {"edges", gen.truth_edges}};
    netobj::atomic_write_text((fs::path(f.out_dir) / (sim_name + "_truth.json")).string(),
                              truth.dump(2) + "\n");
    std::cout << mpath << "\n";
    return 0;
  }

  if (cmd_bench->parsed()) {
    netobj::BenchOptions opt;
    opt.method = parse_method(f.method);
    opt.detect = detect_config(f);
    if (f.kmax <= 0) opt.detect.k_max = 8;
    opt.infer = infer_config(f);
    opt.bh_q = bh_q;
    opt.lfdr.cutoff = lfdr_cutoff;
    opt.nbs_tau = nbs_tau;
    opt.replicates = replicates;
    std::vector<netobj::SimConfig> grid;
    for (int size : group_sizes)
      for (double sigma : sigmas) {
        netobj::SimConfig cfg;
        cfg.sigma = sigma;
        cfg.theta = bench_theta;
        cfg.n_controls = size;
        cfg.n_cases = size;
        cfg.seed = f.seed;
        grid.push_back(cfg);
      }
    const auto rows = netobj::run_table1(grid, bench_methods, opt);
    fs::create_directories(f.out_dir);
    netobj::atomic_write_text((fs::path(f.out_dir) / "table1.csv").string(),
                              netobj::score_rows_csv(rows));
    auto doc = make_document("bench-table1", flags_json(f), f.seed);
    doc.baselines = netobj::score_rows_json(rows);
    netobj::atomic_write_text((fs::path(f.out_dir) / "table1.json").string(),
                              doc.to_json().dump(2) + "\n");
    std::cout << netobj::score_rows_csv(rows);
    return 0;
  }

  if (cmd_type1->parsed()) {
    netobj::SimConfig cfg;
    cfg.theta = 0.0;
    cfg.n = t1_n;
    cfg.planted_nodes = t1_planted;
    cfg.n_controls = t1_controls;
    cfg.n_cases = t1_cases;
    cfg.seed = f.seed;
    netobj::BenchOptions opt;
    opt.method = parse_method(f.method);
    opt.detect = detect_config(f);
    if (f.kmax <= 0) opt.detect.k_max = 8;
    opt.infer = infer_config(f);
    const auto res = netobj::type1_experiment(cfg, iterations, opt);
    auto doc = make_document("type1", flags_json(f), f.seed);
    doc.config["iterations"] = iterations;
    doc.inference = {{"rate_glp", res.rate_glp},
                     {"rate_gep", res.rate_gep},
                     {"glp_global_p", res.glp_global_p},
                     {"gep_global_p", res.gep_global_p}};
    fs::create_directories(f.out_dir);
    netobj::atomic_write_text((fs::path(f.out_dir) / "type1.json").string(),
                              doc.to_json().dump(2) + "\n");
    std::cout << "glp " << res.rate_glp << " gep " << res.rate_gep << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const netobj::LoadError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
