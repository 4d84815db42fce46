#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "symrfm/rfm.hpp"
#include "symrfm/rng.hpp"

using namespace symrfm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Uniform doubles in [-1, 1) from the repo generator, so draws are portable.
struct TestDraws {
  Rng rng;
  explicit TestDraws(std::uint64_t seed) : rng(seed) {}
  double real() { return 2.0 * (static_cast<double>(rng.next() >> 11) * 0x1.0p-53) - 1.0; }
  MatrixXd matrix(int rows, int cols) {
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = real();
    return m;
  }
  MatrixXd psd(int dim) {
    MatrixXd a = matrix(dim, dim);
    MatrixXd m = a * a.transpose() / dim;
    return 0.5 * (m + m.transpose());
  }
};

// Two-loop reference: gradients accumulated train point by train point,
// coordinate by coordinate, straight from the kernel derivative formulas.
MatrixXd naive_jacobian(const Estimator& est, const VectorXd& x) {
  const auto m = est.train_X.rows();
  const auto d = est.train_X.cols();
  const auto c = est.alphas.cols();
  MatrixXd J = MatrixXd::Zero(c, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    VectorXd xi = est.train_X.row(i).transpose();
    VectorXd grad;
    if (est.config.kind == KernelKind::gaussian) {
      const double k = kernel_value(xi, x, est.M, est.config);
      grad = (2.0 / est.config.bandwidth) * k * (est.M * (xi - x));
    } else {
      grad = 2.0 * x.dot(est.M * xi) * (est.M * xi);
    }
    for (Eigen::Index j = 0; j < c; ++j) J.row(j) += est.alphas(i, j) * grad.transpose();
  }
  return J;
}

MatrixXd naive_agop(const Estimator& est, const MatrixXd& X) {
  MatrixXd out = MatrixXd::Zero(X.cols(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    MatrixXd J = naive_jacobian(est, X.row(i).transpose());
    out += J.transpose() * J;
  }
  return out / static_cast<double>(X.rows());
}

// Central differences on the estimator output, evaluated through the scalar
// kernel only.
MatrixXd finite_difference_jacobian(const Estimator& est, const VectorXd& x, double step) {
  const auto d = est.train_X.cols();
  const auto c = est.alphas.cols();
  auto evaluate = [&](const VectorXd& point) {
    VectorXd out = VectorXd::Zero(c);
    for (Eigen::Index i = 0; i < est.train_X.rows(); ++i) {
      const double k = kernel_value(est.train_X.row(i).transpose(), point, est.M, est.config);
      out += k * est.alphas.row(i).transpose();
    }
    return out;
  };
  MatrixXd J(c, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    VectorXd hi = x, lo = x;
    hi[k] += step;
    lo[k] -= step;
    J.col(k) = (evaluate(hi) - evaluate(lo)) / (2.0 * step);
  }
  return J;
}

Estimator random_estimator(TestDraws& draws, KernelKind kind, int m, int d, int c) {
  KernelConfig config;
  config.kind = kind;
  Estimator est;
  est.train_X = draws.matrix(m, d);
  est.alphas = draws.matrix(m, c);
  est.M = draws.psd(d);
  est.config = config;
  return est;
}

KernelConfig gaussian_config(int iterations = 3) {
  KernelConfig config;
  config.iterations = iterations;
  return config;
}

}  // namespace

TEST_CASE("kernel values") {
  KernelConfig gauss;
  KernelConfig quad;
  quad.kind = KernelKind::quadratic;

  VectorXd x(4), y(4);
  x << 1, 0, 1, 0;
  y << 0, 1, 0, 1;
  MatrixXd I = MatrixXd::Identity(4, 4);

  CHECK(kernel_value(x, x, I, gauss) == 1.0);
  CHECK(kernel_value(x, y, I, quad) == 0.0);  // disjoint one-hots

  // sharing one position: squared distance 2, exp(-2/2.5) = exp(-0.8)
  VectorXd z(4);
  z << 1, 0, 0, 1;
  CHECK(kernel_value(x, z, I, gauss) == doctest::Approx(std::exp(-0.8)).epsilon(1e-12));

  CHECK(kernel_value(x, z, I, quad) == 1.0);  // overlap 1, squared

  KernelConfig bad;
  bad.bandwidth = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = KernelConfig{};
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("kernel matrix agrees with the scalar kernel") {
  TestDraws draws(101);
  for (KernelKind kind : {KernelKind::gaussian, KernelKind::quadratic}) {
    KernelConfig config;
    config.kind = kind;
    MatrixXd A = draws.matrix(7, 5), B = draws.matrix(4, 5), M = draws.psd(5);
    MatrixXd K = kernel_matrix(A, B, M, config);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(K(i, j) == doctest::Approx(kernel_value(A.row(i).transpose(),
                                                      B.row(j).transpose(), M, config))
                             .epsilon(1e-12));
  }
}

TEST_CASE("fit solves the regularized kernel system") {
  SUBCASE("single sample closed form") {
    KernelConfig config = gaussian_config();
    MatrixXd X = MatrixXd::Zero(1, 4);
    X(0, 0) = 1;
    X(0, 2) = 1;
    MatrixXd Y(1, 2);
    Y << 0, 1;
    Estimator est = fit(X, Y, MatrixXd::Identity(4, 4), config);
    const double k = 1.0 + config.ridge;  // k(x,x) = 1 for the gaussian
    CHECK(est.alphas(0, 0) == doctest::Approx(0.0));
    CHECK(est.alphas(0, 1) == doctest::Approx(1.0 / k).epsilon(1e-12));
  }

  SUBCASE("matches an independent dense solver on random systems") {
    TestDraws draws(7);
    for (int trial = 0; trial < 5; ++trial) {
      for (KernelKind kind : {KernelKind::gaussian, KernelKind::quadratic}) {
        KernelConfig config;
        config.kind = kind;
        // enough ridge that the solution itself is well determined and the
        // two solvers must agree tightly
        config.ridge = 0.05;
        MatrixXd X = draws.matrix(20, 6);
        MatrixXd Y = draws.matrix(20, 3);
        MatrixXd M = draws.psd(6);
        Estimator est = fit(X, Y, M, config);

        MatrixXd K = kernel_matrix(X, X, M, config);
        K.diagonal().array() += config.ridge;
        MatrixXd expected = Eigen::FullPivLU<MatrixXd>(K).solve(Y);
        CHECK((est.alphas - expected).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(est.fit_residual <= 1e-6);
      }
    }
  }

  SUBCASE("singular kernel with zero ridge fails with a diagnostic") {
    KernelConfig config = gaussian_config();
    config.ridge = 0.0;
    MatrixXd X(2, 4);  // duplicate samples make K exactly singular
    X << 1, 0, 1, 0, 1, 0, 1, 0;
    MatrixXd Y = MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(fit(X, Y, MatrixXd::Identity(4, 4), config), std::runtime_error);
  }
}

TEST_CASE("prediction and classification") {
  SUBCASE("zero coefficients classify to the lowest index") {
    MatrixXd scores = MatrixXd::Zero(3, 4);
    std::vector<int> labels = classify(scores);
    CHECK(labels == std::vector<int>{0, 0, 0});
    scores(1, 2) = 1.0;
    CHECK(classify(scores)[1] == 2);
  }

  SUBCASE("near-interpolation on train rows") {
    Dataset ds = build_dataset(make_modular_task(OperationKind::add, 7));
    KernelConfig config = gaussian_config();
    Estimator est = fit(ds.samples, ds.labels, MatrixXd::Identity(14, 14), config);
    MatrixXd back = predict(est, ds.samples);
    CHECK((back - ds.labels).cwiseAbs().maxCoeff() < 1e-6);
    std::vector<int> labels = classify(back);
    for (int i = 0; i < ds.rows(); ++i) CHECK(labels[i] == ds.label_index[i]);
  }
}

TEST_CASE("analytic jacobians match central finite differences") {
  TestDraws draws(31);
  for (KernelKind kind : {KernelKind::gaussian, KernelKind::quadratic}) {
    CAPTURE(to_string(kind));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Estimator est = random_estimator(draws, kind, 8, 6, 3);
      VectorXd x = draws.matrix(6, 1);
      MatrixXd analytic = jacobian(est, x);
      MatrixXd numeric = finite_difference_jacobian(est, x, 1e-5);
      const double rel =
          (analytic - numeric).norm() / std::max(1e-12, numeric.norm());
      worst = std::max(worst, rel);
      // the naive per-point formulation agrees exactly
      CHECK((analytic - naive_jacobian(est, x)).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK(worst <= 1e-5);
  }

  SUBCASE("degenerate cases vanish") {
    TestDraws more(77);
    Estimator est = random_estimator(more, KernelKind::gaussian, 5, 4, 2);
    est.alphas.setZero();
    CHECK(jacobian(est, VectorXd::Ones(4)).cwiseAbs().maxCoeff() == 0.0);

    Estimator quad = random_estimator(more, KernelKind::quadratic, 5, 4, 2);
    quad.M.setZero();
    CHECK(jacobian(quad, VectorXd::Ones(4)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("agop") {
  TestDraws draws(55);

  SUBCASE("single sample is the gram of one jacobian") {
    Estimator est = random_estimator(draws, KernelKind::gaussian, 6, 5, 3);
    MatrixXd X = draws.matrix(1, 5);
    MatrixXd J = jacobian(est, X.row(0).transpose());
    CHECK((agop(est, X) - J.transpose() * J).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(agop(est, MatrixXd(0, 5)), std::invalid_argument);
  }

  SUBCASE("matches the naive reference on the mod 7 task") {
    Dataset ds = build_dataset(make_modular_task(OperationKind::add, 7));
    for (KernelKind kind : {KernelKind::gaussian, KernelKind::quadratic}) {
      KernelConfig config;
      config.kind = kind;
      Estimator est = fit(ds.samples, ds.labels, MatrixXd::Identity(14, 14), config);
      MatrixXd fast = agop(est, ds.samples);
      MatrixXd reference = naive_agop(est, ds.samples);
      CHECK((fast - reference).cwiseAbs().maxCoeff() < 1e-10);

      Eigen::SelfAdjointEigenSolver<MatrixXd> es(fast, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
  }

  SUBCASE("invariant to the order of the averaged rows") {
    Estimator est = random_estimator(draws, KernelKind::quadratic, 6, 5, 3);
    MatrixXd X = draws.matrix(9, 5);
    MatrixXd shuffled = X.colwise().reverse();
    CHECK((agop(est, X) - agop(est, shuffled)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("matrix power clamps and respects the functional calculus") {
  TestDraws draws(91);
  MatrixXd M = draws.psd(8);

  SUBCASE("square root squared recovers the input") {
    MatrixXd root = matrix_power(M, 0.5);
    CHECK((root * root - M).cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("identity is a fixed point") {
    MatrixXd I = MatrixXd::Identity(6, 6);
    CHECK((matrix_power(I, 0.37) - I).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("power one only clamps negatives") {
    MatrixXd sym = draws.psd(6);
    sym -= 0.5 * MatrixXd::Identity(6, 6);  // push some eigenvalues negative
    MatrixXd clamped = matrix_power(sym, 1.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(clamped, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    MatrixXd psd = draws.psd(6);
    CHECK((matrix_power(psd, 1.0) - psd).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("asymmetric input is rejected") {
    MatrixXd bad = draws.matrix(5, 5);
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(matrix_power(bad, 0.5), std::invalid_argument);
  }
}

TEST_CASE("the loop matches one manual fit-update round") {
  Dataset ds = build_dataset(make_modular_task(OperationKind::add, 11));
  Partition part = partition_random(ds, 0.5, 3);
  KernelConfig config = gaussian_config(1);

  RunRecord record = rfm(ds, part, config);

  MatrixXd Xtr(part.train.size(), 22), Ytr(part.train.size(), 11);
  for (size_t i = 0; i < part.train.size(); ++i) {
    Xtr.row(i) = ds.samples.row(part.train[i]);
    Ytr.row(i) = ds.labels.row(part.train[i]);
  }
  Estimator est = fit(Xtr, Ytr, MatrixXd::Identity(22, 22), config);
  MatrixXd expected_m = matrix_power(agop(est, Xtr), config.power);
  // the loop and the standalone agop sum in different orders; the square
  // root amplifies that roundoff near zero eigenvalues, hence the tolerance
  CHECK((record.final_feature_matrix - expected_m).cwiseAbs().maxCoeff() < 1e-7);

  MatrixXd Xte(part.test.size(), 22);
  for (size_t i = 0; i < part.test.size(); ++i) Xte.row(i) = ds.samples.row(part.test[i]);
  std::vector<int> expected_pred = classify(predict(est, Xte));
  CHECK(record.test_predictions == expected_pred);

  SUBCASE("quadratic kernel too") {
    KernelConfig quad = config;
    quad.kind = KernelKind::quadratic;
    RunRecord qrec = rfm(ds, part, quad);
    Estimator qest = fit(Xtr, Ytr, MatrixXd::Identity(22, 22), quad);
    MatrixXd qexpected = matrix_power(agop(qest, Xtr), quad.power);
    CHECK((qrec.final_feature_matrix - qexpected).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("interpolation holds at every iteration on the full mod 11 table") {
  Dataset ds = build_dataset(make_modular_task(OperationKind::add, 11));
  Partition all = partition_random(ds, 1.0, 0);
  KernelConfig config = gaussian_config(5);
  RunRecord record = rfm(ds, all, config);
  REQUIRE(record.iterations.size() == 5);
  for (const auto& metrics : record.iterations) {
    CHECK(metrics.train_accuracy == 1.0);
    CHECK(std::isnan(metrics.test_accuracy));
  }
  CHECK(record.max_fit_residual <= 1e-6);
  CHECK(record.min_agop_eigenvalue >= -1e-10);
}

TEST_CASE("a quadratic-kernel run groks a desk-scale random split") {
  // mod 29 with a 70% train fraction crosses the quadratic kernel's
  // generalization threshold well inside 60 iterations
  Dataset ds = build_dataset(make_modular_task(OperationKind::add, 29));
  Partition part = partition_random(ds, 0.7, 0);
  KernelConfig config = gaussian_config(60);
  config.kind = KernelKind::quadratic;
  RunRecord record = rfm(ds, part, config);
  CHECK(record.final_train_accuracy() == 1.0);
  CHECK(record.final_test_accuracy() == 1.0);
  // delayed generalization: well after the train set is interpolated
  CHECK(record.iterations.front().train_accuracy == 1.0);
  CHECK(record.iterations.front().test_accuracy < 0.1);
}

TEST_CASE("runs are deterministic") {
  Dataset ds = build_dataset(make_modular_task(OperationKind::add, 11));
  Partition part = partition_random(ds, 0.5, 4);
  KernelConfig config = gaussian_config(4);
  RunRecord a = rfm(ds, part, config);
  RunRecord b = rfm(ds, part, config);
  CHECK(a.final_feature_matrix == b.final_feature_matrix);
  for (size_t i = 0; i < a.iterations.size(); ++i) {
    CHECK(a.iterations[i].train_mse == b.iterations[i].train_mse);
    CHECK(a.iterations[i].test_accuracy == b.iterations[i].test_accuracy);
  }
  CHECK(a.test_predictions == b.test_predictions);
}

TEST_CASE("bad inputs are rejected") {
  Dataset ds = build_dataset(make_modular_task(OperationKind::add, 7));
  Partition part = partition_random(ds, 0.5, 0);
  KernelConfig config = gaussian_config(1);

  CHECK_THROWS_AS(rfm(ds, part, config, MatrixXd::Identity(10, 10)), std::invalid_argument);
  MatrixXd skew = MatrixXd::Identity(14, 14);
  skew(0, 1) = 0.5;
  CHECK_THROWS_AS(rfm(ds, part, config, skew), std::invalid_argument);
  MatrixXd negative = -MatrixXd::Identity(14, 14);
  CHECK_THROWS_AS(rfm(ds, part, config, negative), std::invalid_argument);

  Partition empty_train;
  empty_train.test = part.train;
  CHECK_THROWS_AS(rfm(ds, empty_train, config), std::invalid_argument);
}
