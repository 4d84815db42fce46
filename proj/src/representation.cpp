#include "symrfm/representation.hpp"

#include <stdexcept>

namespace symrfm {

Eigen::VectorXd encode(const GroupSpec& spec, const Pair& p) {
  const int n = spec.order();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n);
  x[spec.index_of(p.first)] = 1.0;
  x[n + spec.index_of(p.second)] = 1.0;
  return x;
}

Eigen::VectorXd encode_label(const GroupSpec& spec, const GroupElement& label) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(spec.order());
  y[spec.index_of(label)] = 1.0;
  return y;
}

Pair decode(const GroupSpec& spec, const Eigen::VectorXd& x) {
  const int n = spec.order();
  if (x.size() != 2 * n) throw std::invalid_argument("encoded sample has wrong length");
  int a = -1, b = -1;
  for (int i = 0; i < 2 * n; ++i) {
    if (x[i] == 0.0) continue;
    if (x[i] != 1.0) throw std::invalid_argument("encoded sample is not one-hot");
    int& slot = i < n ? a : b;
    if (slot >= 0) throw std::invalid_argument("encoded sample has a duplicate hot entry");
    slot = i < n ? i : i - n;
  }
  if (a < 0 || b < 0) throw std::invalid_argument("encoded sample is missing a hot entry");
  return {spec.element_at(a), spec.element_at(b)};
}

Eigen::MatrixXd right_mult_matrix(const GroupSpec& spec, const GroupElement& x) {
  const int n = spec.order();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    R(spec.index_of(spec.op(spec.element_at(a), x)), a) = 1.0;
  return R;
}

Eigen::MatrixXd inversion_matrix(const GroupSpec& spec) {
  const int n = spec.order();
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    I(spec.index_of(spec.inverse(spec.element_at(a))), a) = 1.0;
  return I;
}

RepMatrix perm_rep(const GroupSpec& spec, const DihedralElement& g) {
  const int n = spec.order();
  Eigen::MatrixXd R = right_mult_matrix(spec, g.shift);
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  if (g.variant == ActionVariant::direct) {
    Eigen::MatrixXd Rinv = right_mult_matrix(spec, spec.inverse(g.shift));
    if (!g.reflected) {
      pi.topLeftCorner(n, n) = R;
      pi.bottomRightCorner(n, n) = Rinv;
    } else {
      // Pi(s) Pi(r^x): swap blocks of diag(R_x, R_{x^-1}).
      pi.topRightCorner(n, n) = Rinv;
      pi.bottomLeftCorner(n, n) = R;
    }
  } else {
    if (!g.reflected) {
      pi.topLeftCorner(n, n) = R;
      pi.bottomRightCorner(n, n) = R;
    } else {
      Eigen::MatrixXd IR = inversion_matrix(spec) * R;
      pi.topRightCorner(n, n) = IR;
      pi.bottomLeftCorner(n, n) = IR;
    }
  }
  return {std::move(pi), g};
}

}  // namespace symrfm
