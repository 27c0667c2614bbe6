#include "netobj/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netobj/edge_index.hpp"
#include "netobj/edge_stats.hpp"
#include "netobj/errors.hpp"
#include "netobj/version.hpp"

namespace fs = std::filesystem;

namespace netobj {

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("manifest: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw LoadError("manifest '" + path + "': " + e.what());
  }
  Manifest m;
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw LoadError("manifest '" + path + "': missing integer field 'n'");
  m.n = j["n"].get<int>();
  if (m.n < 2) throw LoadError("manifest '" + path + "': n must be >= 2");
  m.apply_fisher_z = j.value("apply_fisher_z", false);
  if (j.contains("node_names")) {
    m.node_names = j["node_names"].get<std::vector<std::string>>();
    if (static_cast<int>(m.node_names.size()) != m.n)
      throw LoadError("manifest '" + path + "': node_names size != n");
  }
  if (!j.contains("subjects") || !j["subjects"].is_array() || j["subjects"].empty())
    throw LoadError("manifest '" + path + "': missing nonempty 'subjects' array");
  for (const auto& row : j["subjects"]) {
    ManifestRow r;
    r.subject_id = row.value("id", "");
    if (!row.contains("label") || !row["label"].is_number_integer())
      throw LoadError("manifest '" + path + "': subject '" + r.subject_id +
                      "' missing integer label");
    r.label = row["label"].get<int>();
    if (r.label != 0 && r.label != 1)
      throw LoadError("manifest '" + path + "': subject '" + r.subject_id +
                      "' label must be 0 or 1");
    if (!row.contains("path"))
      throw LoadError("manifest '" + path + "': subject '" + r.subject_id + "' missing path");
    r.path = row["path"].get<std::string>();
    m.rows.push_back(std::move(r));
  }
  return m;
}

Eigen::MatrixXd load_matrix_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw LoadError("matrix: cannot open '" + path + "'");
  Eigen::MatrixXd m(n, n);
  std::string line;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw LoadError("matrix '" + path + "': expected " + std::to_string(n) +
                      " rows, got " + std::to_string(i));
    std::stringstream ss(line);
    std::string cell;
    for (int j = 0; j < n; ++j) {
      if (!std::getline(ss, cell, ','))
        throw LoadError("matrix '" + path + "': row " + std::to_string(i + 1) + " has fewer than " +
                        std::to_string(n) + " columns");
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw LoadError("matrix '" + path + "': non-numeric cell at row " + std::to_string(i + 1) +
                        ", col " + std::to_string(j + 1) + " ('" + cell + "')");
      }
    }
    std::string extra;
    if (std::getline(ss, extra, ',') && !extra.empty())
      throw LoadError("matrix '" + path + "': row " + std::to_string(i + 1) + " has more than " +
                      std::to_string(n) + " columns");
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-8)
        throw LoadError("matrix '" + path + "': asymmetric at (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + "): " + std::to_string(m(i, j)) + " vs " +
                        std::to_string(m(j, i)));
  return m;
}

ConnectomeDataset load_dataset(const std::string& manifest_path) {
  const Manifest manifest = load_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  ConnectomeDataset ds;
  ds.n = manifest.n;
  const EdgeIndex idx(manifest.n);
  for (const auto& row : manifest.rows) {
    const std::string mpath = (base / row.path).string();
    const Eigen::MatrixXd m = load_matrix_csv(mpath, manifest.n);
    Subject subj;
    subj.id = row.subject_id;
    subj.label = row.label;
    subj.edges.resize(idx.n_edges());
    long e = 0;
    for (int i = 0; i < manifest.n; ++i)
      for (int j = i + 1; j < manifest.n; ++j, ++e) {
        double v = 0.5 * (m(i, j) + m(j, i));
        if (manifest.apply_fisher_z) {
          if (!(std::fabs(v) < 1.0))
            throw LoadError("matrix '" + mpath + "': |r| >= 1 at (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + "), cannot apply Fisher-Z");
          v = fisher_z(v);
        }
        subj.edges[e] = v;
      }
    ds.subjects.push_back(std::move(subj));
  }
  ds.validate();
  return ds;
}

std::string write_dataset(const ConnectomeDataset& dataset, const std::string& dir,
                          const std::string& name) {
  fs::create_directories(fs::path(dir) / "matrices");
  const EdgeIndex idx(dataset.n);
  nlohmann::json manifest;
  manifest["n"] = dataset.n;
  manifest["apply_fisher_z"] = false;
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& subj : dataset.subjects) {
    const std::string rel = "matrices/" + subj.id + ".csv";
    std::ostringstream csv;
    csv.precision(17);
    for (int i = 0; i < dataset.n; ++i) {
      for (int j = 0; j < dataset.n; ++j) {
        if (j) csv << ',';
        if (i == j) csv << 0.0;
        else csv << subj.edges[idx.pack(std::min(i, j) + 1, std::max(i, j) + 1)];
      }
      csv << '\n';
    }
    atomic_write_text((fs::path(dir) / rel).string(), csv.str());
    subjects.push_back({{"id", subj.id}, {"label", subj.label}, {"path", rel}});
  }
  manifest["subjects"] = subjects;
  const std::string mpath = (fs::path(dir) / (name + ".json")).string();
  atomic_write_text(mpath, manifest.dump(2) + "\n");
  return mpath;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write '" + tmp + "'");
    out << content;
  }
  fs::rename(tmp, path);
}

nlohmann::json ResultDocument::to_json() const {
  nlohmann::json j;
  j["schema"] = schema;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  if (!edge_tests.is_null()) j["edge_tests"] = edge_tests;
  if (!detection.is_null()) j["detection"] = detection;
  if (!inference.is_null()) j["inference"] = inference;
  if (!baselines.is_null()) j["baselines"] = baselines;
  return j;
}

ResultDocument ResultDocument::from_json(const nlohmann::json& j) {
  ResultDocument d;
  d.schema = j.value("schema", 1);
  d.command = j.value("command", "");
  d.config = j.value("config", nlohmann::json());
  d.seed = j.value("seed", std::uint64_t{0});
  d.tool_version = j.value("tool_version", "");
  d.timestamp = j.value("timestamp", "");
  if (j.contains("edge_tests")) d.edge_tests = j["edge_tests"];
  if (j.contains("detection")) d.detection = j["detection"];
  if (j.contains("inference")) d.inference = j["inference"];
  if (j.contains("baselines")) d.baselines = j["baselines"];
  return d;
}

nlohmann::json subnetwork_to_json(const Subnetwork& sub, int n) {
  const EdgeIndex idx(n);
  nlohmann::json j;
  j["nodes"] = sub.nodes;
  j["edges"] = sub.edges;
  nlohmann::json pairs = nlohmann::json::array();
  for (long e : sub.edges) {
    auto [i, jj] = idx.unpack(e);
    pairs.push_back({i, jj});
  }
  j["edge_pairs"] = pairs;
  j["kind"] = sub.kind == TopologyKind::CliqueInduced ? "clique-induced" : "custom-edge-set";
  j["suprathreshold_density"] = sub.topology.suprathreshold_density;
  j["rich_club"] = sub.topology.rich_club;
  if (sub.statistic) j["statistic"] = *sub.statistic;
  if (sub.p_value) j["p_value"] = *sub.p_value;
  return j;
}

nlohmann::json detection_to_json(const DetectionResult& det, int n) {
  nlohmann::json j;
  j["k_selected"] = det.k_selected;
  j["objective"] = det.objective;
  j["partition"] = det.partition.assignment;
  j["per_cluster_quality"] = det.per_cluster_quality;
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : det.subnetworks) subs.push_back(subnetwork_to_json(s, n));
  j["subnetworks"] = subs;
  return j;
}

nlohmann::json inference_to_json(const InferenceReport& rep, const EdgeTestResult& tests, int n) {
  nlohmann::json j;
  j["alpha"] = rep.alpha;
  j["null_quantile"] = rep.null_quantile;
  j["num_permutations"] = rep.null.values.size();
  j["null_max"] = rep.null.values;
  j["statistic"] = rep.null.kind == StatisticKind::FisherChernoff ? "fisher" : "scan";
  if (rep.gate_applied) {
    j["gate"] = {{"p", rep.gate_p}, {"passed", rep.gate_passed}};
  }
  nlohmann::json subs = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.subnetworks.size(); ++i) {
    nlohmann::json s = subnetwork_to_json(rep.subnetworks[i], n);
    int dec = 0, inc = 0, eq = 0;
    for (long e : rep.subnetworks[i].edges) {
      const int sg = tests.signs[e];
      // sign(median(case) - median(control)): negative means the cases sit
      // lower (hypo-connected).
      (sg < 0 ? dec : (sg > 0 ? inc : eq))++;
    }
    s["sign_counts"] = {{"decreased", dec}, {"increased", inc}, {"equal", eq}};
    s["significant"] =
        std::find(rep.significant.begin(), rep.significant.end(), i) != rep.significant.end();
    subs.push_back(std::move(s));
  }
  j["subnetworks"] = subs;
  return j;
}

std::string edge_csv(int n, const EdgeTestResult& tests, const WeightMatrix& weights,
                     const std::vector<Subnetwork>& subnetworks) {
  const EdgeIndex idx(n);
  std::vector<int> owner(static_cast<std::size_t>(idx.n_edges()), -1);
  for (std::size_t s = 0; s < subnetworks.size(); ++s)
    for (long e : subnetworks[s].edges)
      if (owner[static_cast<std::size_t>(e)] < 0) owner[static_cast<std::size_t>(e)] = static_cast<int>(s);
  std::ostringstream out;
  out.precision(12);
  out << "i,j,p,sign,w,subnetwork\n";
  for (long e = 0; e < idx.n_edges(); ++e) {
    auto [i, j] = idx.unpack(e);
    out << i << ',' << j << ',' << tests.p_values[e] << ',' << tests.signs[e] << ','
        << weights.w[e] << ',' << owner[static_cast<std::size_t>(e)] << '\n';
  }
  return out.str();
}

namespace {

std::string ramp_color(double t) {
  // white -> dark red, monotone in t
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 - 102.0 * t));
  const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string svg_heatmap(int n, const Eigen::VectorXd& p_values,
                        const std::vector<Subnetwork>& subnetworks) {
  const EdgeIndex idx(n);
  // Detected subnetwork nodes first (in subnetwork order), then the rest.
  std::vector<int> order;
  std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
  std::vector<long> block_sizes;
  for (const auto& sub : subnetworks) {
    long added = 0;
    for (int v : sub.nodes)
      if (!used[static_cast<std::size_t>(v)]) {
        used[static_cast<std::size_t>(v)] = 1;
        order.push_back(v);
        ++added;
      }
    if (added > 0) block_sizes.push_back(added);
  }
  for (int v = 1; v <= n; ++v)
    if (!used[static_cast<std::size_t>(v)]) order.push_back(v);

  const int cell = 6, margin = 4;
  const int size = margin * 2 + cell * n;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  out << "<!-- node-order:";
  for (int v : order) out << ' ' << v;
  out << " -->\n";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      std::string color = "#dddddd";  // diagonal
      if (r != c) {
        const int a = std::min(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]);
        const int b = std::max(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]);
        const double w = -std::log(std::max(p_values[idx.pack(a, b)], 1e-300));
        color = ramp_color(std::min(w, 10.0) / 10.0);
      }
      out << "<rect x=\"" << margin + c * cell << "\" y=\"" << margin + r * cell << "\" width=\""
          << cell << "\" height=\"" << cell << "\" fill=\"" << color << "\"/>\n";
    }
  }
  // Outline each reported subnetwork block along the diagonal.
  long off = 0;
  for (long bs : block_sizes) {
    out << "<rect x=\"" << margin + off * cell << "\" y=\"" << margin + off * cell
        << "\" width=\"" << bs * cell << "\" height=\"" << bs * cell
        << "\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"1.5\"/>\n";
    off += bs;
  }
  out << "</svg>\n";
  return out.str();
}

std::string score_rows_csv(const std::vector<ScoreRow>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << "setting,method,replicates,edge_fp_mean,edge_fp_sd,edge_fn_mean,edge_fn_sd,"
         "net_fp_mean,net_fp_sd,net_fn_mean,net_fn_sd\n";
  for (const auto& r : rows) {
    out << r.setting << ',' << r.method << ',' << r.replicates << ',' << r.edge_fp_mean << ','
        << r.edge_fp_sd << ',' << r.edge_fn_mean << ',' << r.edge_fn_sd << ',' << r.net_fp_mean
        << ',' << r.net_fp_sd << ',' << r.net_fn_mean << ',' << r.net_fn_sd << '\n';
  }
  return out.str();
}

nlohmann::json score_rows_json(const std::vector<ScoreRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"setting", r.setting},
                   {"method", r.method},
                   {"replicates", r.replicates},
                   {"edge_fp", {{"mean", r.edge_fp_mean}, {"sd", r.edge_fp_sd}}},
                   {"edge_fn", {{"mean", r.edge_fn_mean}, {"sd", r.edge_fn_sd}}},
                   {"net_fp", {{"mean", r.net_fp_mean}, {"sd", r.net_fp_sd}}},
                   {"net_fn", {{"mean", r.net_fn_mean}, {"sd", r.net_fn_sd}}}});
  }
  return arr;
}

}  // namespace netobj
