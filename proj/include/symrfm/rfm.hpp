#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "symrfm/taskgen.hpp"

namespace symrfm {

enum class KernelKind { gaussian, quadratic };

std::string to_string(KernelKind kind);
KernelKind kernel_from_string(std::string_view text);

/// Kernel and loop parameters. bandwidth is the Gaussian L and is ignored by
/// the quadratic kernel; power is the exponent s applied to the feature
/// update; ridge regularizes the solve (the fit itself is exact
/// interpolation in the ridge -> 0 limit).
struct KernelConfig {
  KernelKind kind = KernelKind::gaussian;
  double bandwidth = 2.5;
  double power = 0.5;
  int iterations = 60;
  double ridge = 1e-8;

  void validate() const;
};

/// Mahalanobis kernels:
///   gaussian:  k_M(x, y) = exp(-(x-y)^T M (x-y) / L)
///   quadratic: k_M(x, y) = (x^T M y)^2
double kernel_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& M, const KernelConfig& config);

/// Kernel matrix between the rows of A and the rows of B.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& M, const KernelConfig& config);

/// Kernel regressor with coefficients solving (K + ridge I) alpha = Y.
struct Estimator {
  Eigen::MatrixXd train_X;  // m x d
  Eigen::MatrixXd alphas;   // m x c
  Eigen::MatrixXd M;        // d x d
  KernelConfig config;
  double fit_residual = 0.0;  // relative residual of the solve
};

/// Solves the kernel system; iterative refinement brings the relative
/// residual under 1e-6. Throws std::runtime_error with a diagnostic when the
/// factorization fails or refinement stalls (singular K with ridge 0).
Estimator fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
              const Eigen::MatrixXd& M, const KernelConfig& config);

Eigen::MatrixXd predict(const Estimator& est, const Eigen::MatrixXd& X);

/// Row-wise argmax; ties resolve to the lowest label index.
std::vector<int> classify(const Eigen::MatrixXd& scores);

/// Analytic Jacobian of the estimator at x, one row per output coordinate.
Eigen::MatrixXd jacobian(const Estimator& est, const Eigen::VectorXd& x);

/// Average gradient outer product over the rows of X:
/// (1/q) sum_i J(x_i)^T J(x_i). Symmetric PSD by construction.
Eigen::MatrixXd agop(const Estimator& est, const Eigen::MatrixXd& X);

/// Spectral power of a symmetric matrix; eigenvalues below zero clamp to
/// zero before raising to s, so fractional powers of PSD-up-to-noise inputs
/// are well defined.
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& M, double s);

struct IterationMetrics {
  int iteration = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;  // NaN when the test set is empty
  double train_mse = 0.0;
  double test_mse = 0.0;
  double seconds = 0.0;
};

struct RunRecord {
  std::vector<IterationMetrics> iterations;
  Eigen::MatrixXd final_feature_matrix;      // M_T, after the last AGOP update
  std::vector<int> test_predictions;         // aligned with partition.test
  std::vector<std::uint8_t> test_correct;
  double min_agop_eigenvalue = 0.0;          // most negative eigenvalue seen pre-clamp
  double max_fit_residual = 0.0;

  double final_train_accuracy() const;
  double final_test_accuracy() const;
};

/// The iterative feature-learning loop: for T rounds, fit a kernel regressor
/// under the current feature matrix, record metrics, then update
/// M <- (AGOP over train rows)^s. Metrics of round t come from the estimator
/// fitted in round t; final predictions come from round T's estimator.
RunRecord rfm(const Dataset& ds, const Partition& partition, const KernelConfig& config,
              const Eigen::MatrixXd& M0);

/// Same, starting from the identity feature matrix.
RunRecord rfm(const Dataset& ds, const Partition& partition, const KernelConfig& config);

}  // namespace symrfm
