#include "symrfm/rfm.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace symrfm {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kResidualTolerance = 1e-6;
constexpr int kMaxRefinements = 4;

struct KernelSolve {
  MatrixXd alpha;   // m x c
  MatrixXd scores;  // K * alpha, the train predictions
  double residual = 0.0;
};

/// Factor K + ridge I and solve for alpha, refining until the relative
/// residual ||(K + ridge I) alpha - Y|| / ||Y|| is within tolerance.
KernelSolve solve_kernel_system(const MatrixXd& K, double ridge, const MatrixXd& Y) {
  KernelSolve out;
  MatrixXd F = K;
  F.diagonal().array() += ridge;

  Eigen::LLT<Eigen::Ref<MatrixXd>> llt(F);
  bool cholesky_ok = llt.info() == Eigen::Success;
  Eigen::LDLT<MatrixXd> ldlt;
  if (!cholesky_ok) {
    // Semidefinite up to roundoff; LDLT still factors it.
    F = K;
    F.diagonal().array() += ridge;
    ldlt.compute(F);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("kernel solve failed: matrix could not be factored");
  }
  auto solve = [&](const MatrixXd& B) -> MatrixXd {
    return cholesky_ok ? MatrixXd(llt.solve(B)) : MatrixXd(ldlt.solve(B));
  };

  out.alpha = solve(Y);
  const double ynorm = Y.norm();
  MatrixXd residual_mat;
  auto compute_residual = [&] {
    out.scores.noalias() = K * out.alpha;
    residual_mat = Y - out.scores - ridge * out.alpha;
    return ynorm > 0 ? residual_mat.norm() / ynorm : residual_mat.norm();
  };
  out.residual = compute_residual();
  for (int pass = 0; pass < kMaxRefinements && out.residual > kResidualTolerance; ++pass) {
    out.alpha += solve(residual_mat);
    out.residual = compute_residual();
  }
  if (!std::isfinite(out.residual) || out.residual > kResidualTolerance) {
    std::ostringstream msg;
    msg << "kernel solve failed: relative residual " << out.residual
        << " exceeds " << kResidualTolerance << " (ridge " << ridge << ")";
    throw std::runtime_error(msg.str());
  }
  return out;
}

MatrixXd spectral_power(const MatrixXd& M, double s, double* min_eigenvalue) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed in matrix power");
  if (min_eigenvalue) *min_eigenvalue = es.eigenvalues().minCoeff();
  VectorXd powered = es.eigenvalues().cwiseMax(0.0).array().pow(s);
  MatrixXd out = es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double mean_squared_error(const MatrixXd& scores, const MatrixXd& onehot) {
  return (scores - onehot).squaredNorm() / static_cast<double>(scores.size());
}

double argmax_accuracy(const MatrixXd& scores, const std::vector<int>& truth) {
  if (scores.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  std::vector<int> pred = classify(scores);
  Index hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

std::string to_string(KernelKind kind) {
  return kind == KernelKind::gaussian ? "gaussian" : "quadratic";
}

KernelKind kernel_from_string(std::string_view text) {
  if (text == "gaussian") return KernelKind::gaussian;
  if (text == "quadratic") return KernelKind::quadratic;
  throw std::invalid_argument("unknown kernel: '" + std::string(text) + "'");
}

void KernelConfig::validate() const {
  if (kind == KernelKind::gaussian && bandwidth <= 0.0)
    throw std::invalid_argument("gaussian bandwidth must be positive");
  if (power <= 0.0) throw std::invalid_argument("feature power must be positive");
  if (iterations < 1) throw std::invalid_argument("iteration count must be at least 1");
  if (ridge < 0.0) throw std::invalid_argument("ridge must be nonnegative");
}

double kernel_value(const VectorXd& x, const VectorXd& y, const MatrixXd& M,
                    const KernelConfig& config) {
  if (config.kind == KernelKind::quadratic) {
    const double v = x.dot(M * y);
    return v * v;
  }
  VectorXd diff = x - y;
  return std::exp(-diff.dot(M * diff) / config.bandwidth);
}

MatrixXd kernel_matrix(const MatrixXd& A, const MatrixXd& B, const MatrixXd& M,
                       const KernelConfig& config) {
  if (A.cols() != B.cols() || M.rows() != A.cols() || M.cols() != A.cols())
    throw std::invalid_argument("kernel matrix dimension mismatch");
  MatrixXd AM = A * M;
  MatrixXd G;
  G.noalias() = AM * B.transpose();
  if (config.kind == KernelKind::quadratic) return G.array().square();

  VectorXd SA = (AM.array() * A.array()).rowwise().sum();
  VectorXd SB = ((B * M).array() * B.array()).rowwise().sum();
  G *= 2.0;
  G.colwise() -= SA;
  G.rowwise() -= SB.transpose();
  return (G / config.bandwidth).array().exp();
}

Estimator fit(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& M,
              const KernelConfig& config) {
  config.validate();
  if (X.rows() == 0) throw std::invalid_argument("fit needs at least one sample");
  if (X.rows() != Y.rows()) throw std::invalid_argument("sample/label row mismatch");
  MatrixXd K = kernel_matrix(X, X, M, config);
  KernelSolve sol = solve_kernel_system(K, config.ridge, Y);
  return Estimator{X, std::move(sol.alpha), M, config, sol.residual};
}

MatrixXd predict(const Estimator& est, const MatrixXd& X) {
  return kernel_matrix(X, est.train_X, est.M, est.config) * est.alphas;
}

std::vector<int> classify(const MatrixXd& scores) {
  std::vector<int> out(scores.rows());
  for (Index i = 0; i < scores.rows(); ++i) {
    int best = 0;
    for (Index j = 1; j < scores.cols(); ++j)
      if (scores(i, j) > scores(i, best)) best = static_cast<int>(j);
    out[i] = best;
  }
  return out;
}

MatrixXd jacobian(const Estimator& est, const VectorXd& x) {
  const MatrixXd& X = est.train_X;
  const MatrixXd& M = est.M;
  MatrixXd U;  // d x c, the weighted sample aggregate behind both kernels
  double scale = 0.0;
  if (est.config.kind == KernelKind::gaussian) {
    MatrixXd diff = X.rowwise() - x.transpose();
    VectorXd k = (-((diff * M).array() * diff.array()).rowwise().sum() /
                  est.config.bandwidth).exp();
    U.noalias() = X.transpose() * (k.asDiagonal() * est.alphas);
    U.noalias() -= x * (est.alphas.transpose() * k).transpose();
    scale = 2.0 / est.config.bandwidth;
  } else {
    VectorXd v = X * (M * x);
    U.noalias() = X.transpose() * (v.asDiagonal() * est.alphas);
    scale = 2.0;
  }
  return (scale * (M * U)).transpose();
}

MatrixXd agop(const Estimator& est, const MatrixXd& X) {
  if (X.rows() == 0) throw std::invalid_argument("agop needs at least one row");
  const Index d = X.cols();
  MatrixXd out = MatrixXd::Zero(d, d);
  for (Index i = 0; i < X.rows(); ++i) {
    MatrixXd J = jacobian(est, X.row(i).transpose());
    out.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
  }
  MatrixXd full = out.selfadjointView<Eigen::Lower>();
  return full / static_cast<double>(X.rows());
}

MatrixXd matrix_power(const MatrixXd& M, double s) {
  if (M.rows() != M.cols()) throw std::invalid_argument("matrix power needs a square matrix");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("matrix power needs a symmetric matrix");
  return spectral_power(M, s, nullptr);
}

double RunRecord::final_train_accuracy() const { return iterations.back().train_accuracy; }
double RunRecord::final_test_accuracy() const { return iterations.back().test_accuracy; }

RunRecord rfm(const Dataset& ds, const Partition& partition, const KernelConfig& config,
              const MatrixXd& M0) {
  config.validate();
  const int n = ds.group_order();
  const Index d = 2 * n;
  const Index c = n;
  const auto m = static_cast<Index>(partition.train.size());
  const auto q = static_cast<Index>(partition.test.size());
  if (m == 0) throw std::invalid_argument("rfm needs a nonempty train set");
  if (M0.rows() != d || M0.cols() != d)
    throw std::invalid_argument("M0 must be 2n x 2n for the task's group order n");
  if ((M0 - M0.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("M0 must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M0, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw std::invalid_argument("M0 must be positive semi-definite");
  }

  const bool gaussian = config.kind == KernelKind::gaussian;
  const double bandwidth = config.bandwidth;

  MatrixXd Xtr(m, d), Ytr(m, c), Xte(q, d);
  std::vector<int> a_idx(m), b_idx(m), y_train(m), y_test(q);
  for (Index i = 0; i < m; ++i) {
    const std::int32_t row = partition.train[i];
    Xtr.row(i) = ds.samples.row(row);
    Ytr.row(i) = ds.labels.row(row);
    a_idx[i] = row / n;
    b_idx[i] = row % n;
    y_train[i] = ds.label_index[row];
  }
  for (Index i = 0; i < q; ++i) {
    const std::int32_t row = partition.test[i];
    Xte.row(i) = ds.samples.row(row);
    y_test[i] = ds.label_index[row];
  }

  MatrixXd M = M0;
  RunRecord rec;
  rec.min_agop_eigenvalue = std::numeric_limits<double>::infinity();

  // Stacked Jacobian-aggregate buffer: blocks of zc pages, each page the
  // c x d matrix U_z^T, so that V^T V accumulates sum_z U_z U_z^T.
  const Index chunk = std::max<Index>(1, 4096 / c);
  MatrixXd V(chunk * c, d);
  MatrixXd scores_te(q, c);

  for (int t = 1; t <= config.iterations; ++t) {
    const auto tick = std::chrono::steady_clock::now();

    // Kernel among train rows. G = X M X^T feeds both kernels. The exact
    // operation order mirrors kernel_matrix so the loop and a manual
    // fit/predict produce bitwise-identical estimators.
    MatrixXd XM = Xtr * M;
    MatrixXd G;
    G.noalias() = XM * Xtr.transpose();
    VectorXd S;
    MatrixXd K;
    if (gaussian) {
      S = (XM.array() * Xtr.array()).rowwise().sum();
      G *= 2.0;
      G.colwise() -= S;
      G.rowwise() -= S.transpose();
      K = (G / bandwidth).array().exp();
      G.resize(0, 0);  // reclaim; the gaussian AGOP weights come from K
    } else {
      K = G.array().square();
    }

    KernelSolve sol = solve_kernel_system(K, config.ridge, Ytr);
    rec.max_fit_residual = std::max(rec.max_fit_residual, sol.residual);

    if (q > 0) {
      MatrixXd XteM = Xte * M;
      MatrixXd Gte;
      Gte.noalias() = XteM * Xtr.transpose();
      MatrixXd Kte;
      if (gaussian) {
        VectorXd Ste = (XteM.array() * Xte.array()).rowwise().sum();
        Gte *= 2.0;
        Gte.colwise() -= Ste;
        Gte.rowwise() -= S.transpose();
        Kte = (Gte / bandwidth).array().exp();
      } else {
        Kte = Gte.array().square();
      }
      scores_te.noalias() = Kte * sol.alpha;
    }

    IterationMetrics metrics;
    metrics.iteration = t;
    metrics.train_accuracy = argmax_accuracy(sol.scores, y_train);
    metrics.train_mse = mean_squared_error(sol.scores, Ytr);
    if (q > 0) {
      metrics.test_accuracy = argmax_accuracy(scores_te, y_test);
      MatrixXd Yte = MatrixXd::Zero(q, c);
      for (Index i = 0; i < q; ++i) Yte(i, y_test[i]) = 1.0;
      metrics.test_mse = mean_squared_error(scores_te, Yte);
    } else {
      metrics.test_accuracy = std::numeric_limits<double>::quiet_NaN();
      metrics.test_mse = std::numeric_limits<double>::quiet_NaN();
    }

    // AGOP over the train rows, using the one-hot pair structure: for
    // evaluation point z, U_z = X^T diag(w_z) alpha (- z alpha^T w_z for the
    // gaussian), where w_z is a kernel column. Rows of U_z live on the two
    // hot positions of each train sample, so they accumulate by columns of
    // alpha^T.
    MatrixXd alphat = sol.alpha.transpose();  // c x m
    MatrixXd Pt;
    if (gaussian) Pt = sol.scores.transpose();
    const MatrixXd& weights = gaussian ? K : G;

    MatrixXd inner = MatrixXd::Zero(d, d);
    const Index ldV = V.rows();
    MatrixXd weight_block(chunk, m);  // transposed copy for zi-contiguous reads
    for (Index z0 = 0; z0 < m; z0 += chunk) {
      const Index zc = std::min(chunk, m - z0);
      auto Vblock = V.topRows(zc * c);
      Vblock.setZero();
      weight_block.topRows(zc) = weights.middleCols(z0, zc).transpose();
      for (Index i = 0; i < m; ++i) {
        const double* alpha_col = alphat.data() + i * c;
        const double* w = weight_block.data() + i * weight_block.rows();
        double* page_a = V.data() + a_idx[i] * ldV;
        double* page_b = V.data() + (n + b_idx[i]) * ldV;
        for (Index zi = 0; zi < zc; ++zi) {
          const double wi = w[zi];
          if (wi == 0.0) continue;
          double* ta = page_a + zi * c;
          double* tb = page_b + zi * c;
          for (Index j = 0; j < c; ++j) {
            const double v = wi * alpha_col[j];
            ta[j] += v;
            tb[j] += v;
          }
        }
      }
      if (gaussian) {
        for (Index zi = 0; zi < zc; ++zi) {
          const Index z = z0 + zi;
          const double* p = Pt.data() + z * c;
          double* ta = V.data() + a_idx[z] * ldV + zi * c;
          double* tb = V.data() + (n + b_idx[z]) * ldV + zi * c;
          for (Index j = 0; j < c; ++j) {
            ta[j] -= p[j];
            tb[j] -= p[j];
          }
        }
      }
      inner.selfadjointView<Eigen::Lower>().rankUpdate(Vblock.transpose());
    }
    MatrixXd inner_full = inner.selfadjointView<Eigen::Lower>();

    const double scale =
        (gaussian ? 4.0 / (bandwidth * bandwidth) : 4.0) / static_cast<double>(m);
    MatrixXd ag = scale * (M * inner_full * M);
    ag = 0.5 * (ag + ag.transpose()).eval();

    double min_eig = 0.0;
    M = spectral_power(ag, config.power, &min_eig);
    rec.min_agop_eigenvalue = std::min(rec.min_agop_eigenvalue, min_eig);


    metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    rec.iterations.push_back(metrics);
  }

  rec.final_feature_matrix = std::move(M);
  rec.test_predictions = classify(scores_te);
  rec.test_correct.resize(q);
  for (Index i = 0; i < q; ++i) rec.test_correct[i] = rec.test_predictions[i] == y_test[i];
  return rec;
}

RunRecord rfm(const Dataset& ds, const Partition& partition, const KernelConfig& config) {
  return rfm(ds, partition, config, MatrixXd::Identity(2 * ds.group_order(), 2 * ds.group_order()));
}

}  // namespace symrfm
