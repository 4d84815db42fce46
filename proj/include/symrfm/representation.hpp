#pragma once

#include <Eigen/Core>

#include "symrfm/group.hpp"

namespace symrfm {

/// One-hot pair encoding x = e_a || e_b in R^{2n}, positions taken from the
/// canonical index map.
Eigen::VectorXd encode(const GroupSpec& spec, const Pair& p);
Eigen::VectorXd encode_label(const GroupSpec& spec, const GroupElement& label);

/// Inverse of encode; requires exactly one unit entry in each half.
Pair decode(const GroupSpec& spec, const Eigen::VectorXd& x);

/// n x n permutation matrix R_x with R_x e_a = e_{a*x}.
Eigen::MatrixXd right_mult_matrix(const GroupSpec& spec, const GroupElement& x);

/// n x n permutation matrix sending e_a to e_{a^-1}.
Eigen::MatrixXd inversion_matrix(const GroupSpec& spec);

struct RepMatrix {
  Eigen::MatrixXd matrix;  // 2n x 2n block permutation
  DihedralElement source;
};

/// Permutation representation of the symmetry group on encoded pairs.
///   direct:  Pi(r^x) = diag(R_x, R_{x^-1}),  Pi(s) = antidiagonal identities
///   inverse: Pi(r^x) = diag(R_x, R_x),       Pi(s) = antidiagonal inversions
/// Satisfies Pi(g) encode(p) = encode(apply(g, p)).
RepMatrix perm_rep(const GroupSpec& spec, const DihedralElement& g);

}  // namespace symrfm
