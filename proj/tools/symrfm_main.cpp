#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "symrfm/analysis.hpp"
#include "symrfm/experiment.hpp"
#include "symrfm/matrix_io.hpp"
#include "symrfm/rfm.hpp"
#include "symrfm/taskgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace symrfm;

namespace {

Task load_task(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open task file: " + path);
  return task_from_json(json::parse(in));
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return json::parse(in);
}

struct KernelFlags {
  std::string kind;
  double bandwidth = -1;
  double power = -1;
  int iterations = -1;
  double ridge = -1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--kernel", kind, "gaussian or quadratic");
    cmd->add_option("--bandwidth", bandwidth, "gaussian bandwidth L");
    cmd->add_option("--power", power, "feature update exponent s");
    cmd->add_option("--iterations", iterations, "loop iterations T");
    cmd->add_option("--ridge", ridge, "solve regularizer");
  }

  void apply(KernelConfig& config) const {
    if (!kind.empty()) config.kind = kernel_from_string(kind);
    if (bandwidth > 0) config.bandwidth = bandwidth;
    if (power > 0) config.power = power;
    if (iterations > 0) config.iterations = iterations;
    if (ridge >= 0) config.ridge = ridge;
  }
};

json parse_m0_flag(const std::string& text) {
  if (text.empty() || text == "identity") return "identity";
  if (text.starts_with("saved:")) return json{{"kind", "saved"}, {"path", text.substr(6)}};
  if (text.starts_with("saved-abs:"))
    return json{{"kind", "saved-abs"}, {"path", text.substr(10)}};
  if (text.starts_with("pi-sum:")) {
    std::vector<std::string> elements;
    std::string rest = text.substr(7);
    size_t pos = 0;
    while (pos != std::string::npos) {
      size_t comma = rest.find(',', pos);
      elements.push_back(rest.substr(pos, comma == std::string::npos ? comma : comma - pos));
      pos = comma == std::string::npos ? comma : comma + 1;
    }
    return json{{"kind", "pi-sum"}, {"elements", elements}};
  }
  throw std::invalid_argument("bad --m0: expected identity, saved:PATH or pi-sum:ELEMS");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Recursive feature machines over finite Abelian group tasks"};
  app.require_subcommand(1);

  // ---- gen-task
  std::string gt_operation = "add";
  std::vector<int> gt_moduli;
  int gt_modulus = 0;
  std::string gt_out;
  auto* gen_task = app.add_subcommand("gen-task", "describe a task and report dataset shape");
  gen_task->add_option("--operation", gt_operation, "add, sub, mul or div")->required();
  gen_task->add_option("--moduli", gt_moduli, "cyclic factors, e.g. 5 11")->delimiter(',');
  gen_task->add_option("--modulus", gt_modulus, "single modulus (prime for mul/div)");
  gen_task->add_option("-o,--out", gt_out, "task file to write");

  // ---- make-partition
  std::string mp_task, mp_family, mp_reflection, mp_subgroup, mp_base, mp_out;
  double mp_fraction = 0.5;
  int mp_count = 0, mp_pairs = 0;
  std::uint64_t mp_seed = 0;
  auto* make_part = app.add_subcommand("make-partition", "build a train/test partition file");
  make_part->add_option("--task", mp_task, "task file")->required();
  make_part->add_option("--family", mp_family,
                        "random | fixed-points | subgroup-fixed-points | move-random | "
                        "move-symmetric-pairs | move-fixed-to-train")->required();
  make_part->add_option("--fraction", mp_fraction, "train fraction (random)");
  make_part->add_option("--reflection", mp_reflection, "reflection, e.g. s or sr^35");
  make_part->add_option("--subgroup", mp_subgroup, "subgroup, e.g. dihedral:16,0");
  make_part->add_option("--base", mp_base, "base partition file (move families)");
  make_part->add_option("--count", mp_count, "rows to move");
  make_part->add_option("--pairs", mp_pairs, "symmetric pairs to move");
  make_part->add_option("--seed", mp_seed, "sampling seed");
  make_part->add_option("-o,--out", mp_out, "partition file to write")->required();

  // ---- run-rfm
  std::string rr_task, rr_partition, rr_config, rr_m0, rr_out;
  KernelFlags rr_kernel;
  auto* run_rfm = app.add_subcommand("run-rfm", "run the feature-learning loop on a partition");
  run_rfm->add_option("--task", rr_task, "task file");
  run_rfm->add_option("--partition", rr_partition, "partition file");
  run_rfm->add_option("--config", rr_config, "experiment config file (flags override it)");
  rr_kernel.add_to(run_rfm);
  run_rfm->add_option("--m0", rr_m0,
                      "identity | saved:PATH | saved-abs:PATH | pi-sum:id,sr^10");
  run_rfm->add_option("-o,--out", rr_out, "output directory")->required();

  // ---- analyze
  std::string an_matrix, an_task, an_subgroup, an_heatmap;
  auto* analyze = app.add_subcommand("analyze", "alignment and stats of a feature matrix");
  analyze->add_option("--matrix", an_matrix, "matrix dump")->required();
  analyze->add_option("--task", an_task, "task file")->required();
  analyze->add_option("--subgroup", an_subgroup, "subgroup to align against, e.g. refl:0");
  analyze->add_option("--heatmap", an_heatmap, "write a grayscale PGM here");

  // ---- orbit-check
  std::string oc_task, oc_partition, oc_run, oc_subgroup;
  auto* orbit_check = app.add_subcommand("orbit-check",
                                         "compare orbit predictions with a run's correct set");
  orbit_check->add_option("--task", oc_task, "task file")->required();
  orbit_check->add_option("--partition", oc_partition, "partition file")->required();
  orbit_check->add_option("--run", oc_run, "run directory (needs predictions.csv)")->required();
  orbit_check->add_option("--subgroup", oc_subgroup, "subgroup H")->required();

  // ---- reproduce
  std::string rp_preset, rp_out;
  int rp_seeds = 0;
  auto* reproduce = app.add_subcommand("reproduce", "run a named reproduction preset");
  reproduce->add_option("preset", rp_preset, "table1 fig1 fig2 fig3 fig4 appendix-d1 "
                                             "appendix-d2 appendix-d3 appendix-e appendix-f")
      ->required();
  reproduce->add_option("-o,--out", rp_out, "output root (default $SYMRFM_OUTPUT_ROOT or ./runs)");
  reproduce->add_option("--seeds", rp_seeds, "override seed count for averaged cells");

  CLI11_PARSE(app, argc, argv);

  if (gen_task->parsed()) {
    OperationKind op = operation_from_string(gt_operation);
    Task task = gt_moduli.empty() ? make_modular_task(op, gt_modulus)
                                  : make_task(op, gt_moduli);
    Dataset ds = build_dataset(task);
    json j = task_to_json(task);
    if (!gt_out.empty()) {
      std::ofstream out(gt_out);
      out << j.dump(2) << '\n';
    }
    std::cout << "task " << j.dump() << "\nrows " << ds.rows() << " dim "
              << 2 * ds.group_order() << " classes " << ds.group_order() << '\n';
    return 0;
  }

  if (make_part->parsed()) {
    Task task = load_task(mp_task);
    Dataset ds = build_dataset(task);
    Partition part;
    if (mp_family == "random") {
      part = partition_random(ds, mp_fraction, mp_seed);
    } else if (mp_family == "fixed-points") {
      part = partition_fixed_points(ds, parse_dihedral(task.spec, mp_reflection));
    } else if (mp_family == "subgroup-fixed-points") {
      part = partition_subgroup_fixed_points(
          ds, enumerate_subgroup(task.spec, parse_subgroup(task.spec, mp_subgroup)));
    } else {
      if (mp_base.empty())
        throw std::invalid_argument("move families need --base");
      Partition base = read_partition(mp_base, ds);
      if (mp_family == "move-random") {
        part = move_random(ds, base, mp_count, mp_seed);
      } else if (mp_family == "move-symmetric-pairs") {
        part = move_symmetric_pairs(ds, base, mp_pairs,
                                    parse_dihedral(task.spec, mp_reflection), mp_seed);
      } else if (mp_family == "move-fixed-to-train") {
        part = move_fixed_to_train(ds, base, mp_count, mp_seed);
      } else {
        throw std::invalid_argument("unknown partition family: '" + mp_family + "'");
      }
    }
    write_partition(mp_out, part);
    std::cout << "partition " << mp_out << " train " << part.train.size() << " test "
              << part.test.size() << '\n';
    return 0;
  }

  if (run_rfm->parsed()) {
    ExperimentConfig config;
    if (!rr_config.empty()) {
      config = ExperimentConfig::from_json(load_json(rr_config));
    } else {
      if (rr_task.empty() || rr_partition.empty())
        throw std::invalid_argument("run-rfm needs --task and --partition (or --config)");
    }
    if (!rr_task.empty()) config.task = load_task(rr_task);
    rr_kernel.apply(config.kernel);
    if (!rr_m0.empty()) config.m0 = parse_m0_flag(rr_m0);

    Dataset ds = build_dataset(config.task);
    Partition part;
    if (!rr_partition.empty()) {
      part = read_partition(rr_partition, ds);
    } else if (!config.partitions.empty()) {
      part = build_partition(ds, config.partitions.front(), config.master_seed);
    } else {
      throw std::invalid_argument("no partition given");
    }

    Eigen::MatrixXd M0 = resolve_m0(config.m0, config.task.spec);
    RunRecord record = rfm(ds, part, config.kernel, M0);

    fs::create_directories(rr_out);
    write_metrics_csv(fs::path(rr_out) / "metrics.csv", record);
    write_partition((fs::path(rr_out) / "partition.json").string(), part);
    write_matrix_dump(fs::path(rr_out) / "final_feature_matrix.mdump",
                      record.final_feature_matrix);
    write_matrix_csv(fs::path(rr_out) / "final_feature_matrix.csv",
                     record.final_feature_matrix);
    heatmap(record.final_feature_matrix.cwiseAbs(),
            fs::path(rr_out) / "final_feature_matrix.pgm");
    {
      std::ofstream pred(fs::path(rr_out) / "predictions.csv");
      pred << "row,true_label,predicted_label,correct\n";
      for (size_t i = 0; i < part.test.size(); ++i)
        pred << part.test[i] << ',' << ds.label_index[part.test[i]] << ','
             << record.test_predictions[i] << ',' << int(record.test_correct[i]) << '\n';
    }
    const auto& last = record.iterations.back();
    std::cout << "final train_accuracy " << last.train_accuracy << " test_accuracy "
              << last.test_accuracy << " train_mse " << last.train_mse << " test_mse "
              << last.test_mse << '\n';
    return 0;
  }

  if (analyze->parsed()) {
    Task task = load_task(an_task);
    Eigen::MatrixXd M = read_matrix_dump(an_matrix);
    json out;
    MatrixStats stats = matrix_stats(M);
    out["stats"] = {{"min", stats.min},
                    {"max", stats.max},
                    {"abs_mass", stats.abs_mass},
                    {"rank_estimate", stats.rank_estimate}};
    if (!an_subgroup.empty()) {
      Subgroup H = enumerate_subgroup(task.spec, parse_subgroup(task.spec, an_subgroup));
      AlignmentScore score = alignment(M, task.spec, H);
      out["alignment"] = {{"support_mass_fraction", score.support_mass_fraction},
                          {"pearson_r", score.pearson_r},
                          {"target", score.target}};
    }
    if (!an_heatmap.empty()) {
      heatmap(M.cwiseAbs(), an_heatmap);
      out["heatmap"] = an_heatmap;
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (orbit_check->parsed()) {
    Task task = load_task(oc_task);
    Dataset ds = build_dataset(task);
    Partition part = read_partition(oc_partition, ds);
    Subgroup H = enumerate_subgroup(task.spec, parse_subgroup(task.spec, oc_subgroup));

    // Rebuild the correctness mask from the run's predictions file.
    std::ifstream pred(fs::path(oc_run) / "predictions.csv");
    if (!pred)
      throw std::runtime_error("missing predictions.csv under " + oc_run);
    RunRecord record;
    std::string line;
    std::getline(pred, line);  // header
    while (std::getline(pred, line)) {
      std::istringstream fields(line);
      std::string cell;
      std::getline(fields, cell, ',');
      std::getline(fields, cell, ',');
      std::getline(fields, cell, ',');
      record.test_predictions.push_back(std::stoi(cell));
      std::getline(fields, cell, ',');
      record.test_correct.push_back(cell == "1");
    }
    OrbitPrediction orbit = orbit_predict(ds, part, H, record);
    json out;
    out["predicted_correct"] = orbit.predicted_correct.size();
    out["actual_correct"] = orbit.actual_correct.size();
    if (orbit.precision) out["precision"] = *orbit.precision;
    else out["precision"] = nullptr;
    if (orbit.recall) out["recall"] = *orbit.recall;
    else out["recall"] = nullptr;
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (reproduce->parsed()) {
    fs::path root = rp_out.empty() ? default_output_root() : fs::path(rp_out);
    reproduce_preset(rp_preset, root, rp_seeds);
    std::cout << "preset " << rp_preset << " written under " << root.string() << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
