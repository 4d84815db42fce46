#include "symrfm/analysis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "symrfm/matrix_io.hpp"
#include "symrfm/representation.hpp"

namespace symrfm {

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("accuracy needs equal-length inputs");
  if (predictions.empty()) throw std::invalid_argument("accuracy of an empty set is undefined");
  size_t hits = 0;
  for (size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

AlignmentScore alignment(const Eigen::MatrixXd& M, const GroupSpec& spec, const Subgroup& H) {
  const int d = 2 * spec.order();
  if (M.rows() != d || M.cols() != d)
    throw std::invalid_argument("alignment needs a 2n x 2n feature matrix");

  Eigen::MatrixXd rep_sum = Eigen::MatrixXd::Zero(d, d);
  for (const auto& h : H.elements) rep_sum += perm_rep(spec, h).matrix;
  Eigen::ArrayXXd mask = (rep_sum.array() > 0.0).cast<double>();

  Eigen::ArrayXXd mag = M.array().abs();
  const double total = mag.sum();
  const double on_support = (mag * mask).sum();

  AlignmentScore score;
  score.support_mass_fraction = total > 0 ? on_support / total : 0.0;

  // Pearson correlation between the flattened |M| and the 0/1 mask.
  const double mean_m = mag.mean();
  const double mean_k = mask.mean();
  const double cov = ((mag - mean_m) * (mask - mean_k)).sum();
  const double var_m = ((mag - mean_m) * (mag - mean_m)).sum();
  const double var_k = ((mask - mean_k) * (mask - mean_k)).sum();
  score.pearson_r = (var_m > 0 && var_k > 0) ? cov / std::sqrt(var_m * var_k) : 0.0;

  score.target = "pi-sum:" + format(spec, H.presentation);
  return score;
}

OrbitPrediction orbit_predict(const Dataset& ds, const Partition& partition,
                              const Subgroup& H, const RunRecord& run) {
  if (run.test_correct.size() != partition.test.size())
    throw std::invalid_argument("run record does not match the partition's test set");
  const GroupSpec& spec = ds.task.spec;

  std::vector<PairIndex> reach = orbit(spec, H, partition.train);

  OrbitPrediction out;
  std::set_intersection(reach.begin(), reach.end(), partition.test.begin(),
                        partition.test.end(), std::back_inserter(out.predicted_correct));
  for (size_t i = 0; i < partition.test.size(); ++i)
    if (run.test_correct[i]) out.actual_correct.push_back(partition.test[i]);

  std::vector<std::int32_t> both;
  std::set_intersection(out.predicted_correct.begin(), out.predicted_correct.end(),
                        out.actual_correct.begin(), out.actual_correct.end(),
                        std::back_inserter(both));

  if (out.predicted_correct.empty() && out.actual_correct.empty()) {
    out.precision = 1.0;
    out.recall = 1.0;
    return out;
  }
  if (!out.predicted_correct.empty())
    out.precision = static_cast<double>(both.size()) / out.predicted_correct.size();
  if (!out.actual_correct.empty())
    out.recall = static_cast<double>(both.size()) / out.actual_correct.size();
  return out;
}

void heatmap(const Eigen::MatrixXd& M, const std::filesystem::path& path) {
  if (M.size() == 0) throw std::invalid_argument("cannot render an empty matrix");
  if (!M.allFinite()) throw std::invalid_argument("heatmap needs finite entries");
  write_pgm(path, M, M.minCoeff(), M.maxCoeff());
}

MatrixStats matrix_stats(const Eigen::MatrixXd& M) {
  MatrixStats stats;
  stats.min = M.minCoeff();
  stats.max = M.maxCoeff();
  stats.abs_mass = M.cwiseAbs().sum();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double tol = std::max(M.rows(), M.cols()) * sv.maxCoeff() * 1e-12;
  stats.rank_estimate = static_cast<int>((sv.array() > tol).count());
  return stats;
}

}  // namespace symrfm
