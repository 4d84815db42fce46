#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symrfm/analysis.hpp"
#include "symrfm/rfm.hpp"
#include "symrfm/taskgen.hpp"

namespace symrfm {

/// One experiment sweep: a task and kernel, one or more partition variants,
/// an M0 source, and a seed policy. Seeded partition stages receive per-run
/// seeds derived as master_seed + seed slot.
struct ExperimentConfig {
  std::string name = "experiment";
  Task task;
  KernelConfig kernel;
  std::vector<nlohmann::json> partitions;          // family + parameters, seedless
  nlohmann::json m0 = "identity";                  // "identity" | {"kind":...}
  std::uint64_t master_seed = 0;
  int seeds = 1;
  std::optional<std::string> alignment_subgroup;
  std::optional<std::string> orbit_subgroup;
  bool save_matrices = true;
  bool save_heatmaps = true;
  int workers = 0;  // 0 = one per hardware thread, capped by the job count

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Build a partition from a seedless spec, injecting the run seed into every
/// seeded stage ("random", "move-random", "move-symmetric-pairs",
/// "move-fixed-to-train").
Partition build_partition(const Dataset& ds, const nlohmann::json& spec, std::uint64_t seed);

/// Resolve an M0 spec against a group: "identity", {"kind":"saved","path":p}
/// (a matrix dump), or {"kind":"pi-sum","elements":[...]} which sums the
/// permutation representations of the listed elements and normalizes by the
/// largest eigenvalue.
Eigen::MatrixXd resolve_m0(const nlohmann::json& spec, const GroupSpec& group);

/// Short label a partition spec sorts under in results ("fixed-points:s",
/// "move-random:1", ...).
std::string partition_label(const nlohmann::json& spec);

/// FNV-1a hash of the canonical config serialization, as hex.
std::string config_hash(const ExperimentConfig& config);

struct RunResult {
  std::string experiment;
  std::string label;
  std::uint64_t seed = 0;
  nlohmann::json provenance;
  RunRecord record;
  std::optional<AlignmentScore> alignment_score;
  std::optional<OrbitPrediction> orbit;
  std::filesystem::path run_dir;
  std::string error;  // nonempty when the run failed

  bool failed() const { return !error.empty(); }
};

/// Execute every (partition variant, seed) job of a config on a bounded
/// worker pool, persist per-run artifacts under out_root, and append one row
/// per run to out_root/results.csv. Failed runs are kept as flagged rows;
/// the function throws after the sweep if any run failed.
std::vector<RunResult> run_experiment(const ExperimentConfig& config,
                                      const std::filesystem::path& out_root);

/// Default output root: $SYMRFM_OUTPUT_ROOT if set, else ./runs.
std::filesystem::path default_output_root();

/// Named reproduction presets: table1, fig1, fig2, fig3, fig4, appendix-d1,
/// appendix-d2, appendix-d3, appendix-e, appendix-f. seeds_override <= 0
/// keeps each preset's default (5 for averaged tables/curves).
void reproduce_preset(const std::string& name, const std::filesystem::path& out_root,
                      int seeds_override);

std::vector<std::string> preset_names();

/// Per-run artifact writers shared by the runner and the CLI.
void write_metrics_csv(const std::filesystem::path& path, const RunRecord& record);
void write_run_summary(const std::filesystem::path& path, const RunResult& result,
                       const ExperimentConfig& config);

}  // namespace symrfm
