#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symrfm/group.hpp"
#include "symrfm/rfm.hpp"
#include "symrfm/taskgen.hpp"

namespace symrfm {

/// Fraction of exact label matches. Throws on empty or mismatched input.
double accuracy(std::span<const int> predictions, std::span<const int> truth);

/// How much of |M|'s mass sits on the support of sum_{h in H} Pi(h), plus
/// the Pearson correlation between |M| and the 0/1 support mask.
struct AlignmentScore {
  double support_mass_fraction = 0.0;
  double pearson_r = 0.0;
  std::string target;
};

AlignmentScore alignment(const Eigen::MatrixXd& M, const GroupSpec& spec, const Subgroup& H);

/// Orbit-based prediction of which test rows a run classifies correctly:
/// predicted = Orbit_H(train pairs) intersected with the test set. Precision
/// and recall are 1 when both sides are empty, and absent (null) when only
/// the denominator side is empty.
struct OrbitPrediction {
  std::vector<std::int32_t> predicted_correct;  // sorted test rows
  std::vector<std::int32_t> actual_correct;     // sorted test rows
  std::optional<double> precision;
  std::optional<double> recall;
};

OrbitPrediction orbit_predict(const Dataset& ds, const Partition& partition,
                              const Subgroup& H, const RunRecord& run);

/// Linear grayscale raster of a matrix (min -> black, max -> white), written
/// as binary PGM.
void heatmap(const Eigen::MatrixXd& M, const std::filesystem::path& path);

struct MatrixStats {
  double min = 0.0;
  double max = 0.0;
  double abs_mass = 0.0;  // sum of |entries|
  int rank_estimate = 0;
};

MatrixStats matrix_stats(const Eigen::MatrixXd& M);

}  // namespace symrfm
