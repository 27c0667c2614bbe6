#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <string>
#include <vector>

#include "netobj/dataset.hpp"
#include "netobj/detect.hpp"
#include "netobj/infer.hpp"
#include "netobj/sim.hpp"

namespace netobj {

struct ManifestRow {
  std::string subject_id;
  int label = 0;
  std::string path;  // relative to the manifest file
};

struct Manifest {
  int n = 0;
  bool apply_fisher_z = false;
  std::vector<std::string> node_names;  // optional, size n when present
  std::vector<ManifestRow> rows;
};

/// Parses a JSON manifest. Throws LoadError naming the problem.
Manifest load_manifest(const std::string& path);

/// Reads an n x n comma-separated matrix; requires symmetry within 1e-8,
/// ignores the diagonal. Errors name the file and cell.
Eigen::MatrixXd load_matrix_csv(const std::string& path, int n);

/// Manifest -> dataset: upper triangle vectorized in pack_edge order, the
/// optional Fisher-Z transform applied per manifest flag.
ConnectomeDataset load_dataset(const std::string& manifest_path);

/// Writes a small synthetic dataset to disk (manifest + matrix CSVs);
/// returns the manifest path.
std::string write_dataset(const ConnectomeDataset& dataset, const std::string& dir,
                          const std::string& name);

/// Write-then-rename so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

/// Top-level result document; round-trips losslessly through JSON. The
/// timestamp field is the only part excluded from reproducibility
/// comparisons.
struct ResultDocument {
  int schema = 1;
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string timestamp;
  nlohmann::json edge_tests;
  nlohmann::json detection;
  nlohmann::json inference;
  nlohmann::json baselines;

  nlohmann::json to_json() const;
  static ResultDocument from_json(const nlohmann::json& j);
};

nlohmann::json subnetwork_to_json(const Subnetwork& sub, int n);
nlohmann::json detection_to_json(const DetectionResult& det, int n);
nlohmann::json inference_to_json(const InferenceReport& rep, const EdgeTestResult& tests, int n);

/// Edge-level CSV: i, j, p, sign, w, subnetwork (index of the containing
/// reported subnetwork, -1 when none).
std::string edge_csv(int n, const EdgeTestResult& tests, const WeightMatrix& weights,
                     const std::vector<Subnetwork>& subnetworks);

/// Deterministic SVG heatmap of -log10-free -log(p) clipped at 10, nodes
/// reordered so detected subnetwork nodes come first. The chosen order is
/// embedded as a node-order comment.
std::string svg_heatmap(int n, const Eigen::VectorXd& p_values,
                        const std::vector<Subnetwork>& subnetworks);

std::string score_rows_csv(const std::vector<ScoreRow>& rows);
nlohmann::json score_rows_json(const std::vector<ScoreRow>& rows);

}  // namespace netobj
