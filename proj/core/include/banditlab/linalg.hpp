#pragma once

#include <Eigen/Dense>

#include "banditlab/errors.hpp"

namespace banditlab::linalg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative symmetry check: max |A - A'| <= rel_tol * (1 + max |A|).
bool is_symmetric(const Mat& A, double rel_tol = 1e-10);

/// Solves A x = b for symmetric positive-definite A via Cholesky, with one
/// iterative-refinement pass. Throws NotSPD when the factorization fails.
Vec spd_solve(const Mat& A, const Vec& b);

/// ||x||_M = sqrt(x' M x) for SPD M. Zero iff x = 0.
double quad_norm(const Vec& x, const Mat& M);

/// Orthonormal basis of the orthogonal complement of v, returned as a
/// d x (d-1) matrix. Columns are the trailing columns of the Householder
/// reflector that maps e1 onto v/||v||, so the basis is deterministic in v.
Mat nullspace_basis(const Vec& v);

/// A + x x', the incremental design-matrix update.
Mat rank1_update(const Mat& A, const Vec& x);

}  // namespace banditlab::linalg
