#include "banditlab/linalg.hpp"

#include <cmath>

namespace banditlab::linalg {

bool is_symmetric(const Mat& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const double scale = 1.0 + A.cwiseAbs().maxCoeff();
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vec spd_solve(const Mat& A, const Vec& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw WrongDimension("spd_solve: A is " + std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()) + ", b has length " +
                         std::to_string(b.size()));
  }
  if (!is_symmetric(A)) {
    throw NotSPD("spd_solve: matrix is not symmetric");
  }
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NotSPD("spd_solve: Cholesky factorization failed (non-positive pivot)");
  }
  Vec x = llt.solve(b);
  // one refinement pass keeps the residual near machine precision even for
  // ill-conditioned design matrices
  x += llt.solve(b - A * x);
  return x;
}

double quad_norm(const Vec& x, const Mat& M) {
  if (M.rows() != M.cols() || M.rows() != x.size()) {
    throw WrongDimension("quad_norm: dimension mismatch");
  }
  if (!is_symmetric(M)) {
    throw NotSPD("quad_norm: matrix is not symmetric");
  }
  const double q = x.dot(M.selfadjointView<Eigen::Lower>() * x);
  if (q < 0.0) {
    const double scale = (1.0 + x.squaredNorm()) * (1.0 + M.cwiseAbs().maxCoeff());
    if (q < -1e-12 * scale) {
      throw NotSPD("quad_norm: negative quadratic form");
    }
    return 0.0;
  }
  return std::sqrt(q);
}

Mat nullspace_basis(const Vec& v) {
  const auto d = v.size();
  if (d == 0 || v.norm() == 0.0) {
    throw ZeroVector("nullspace_basis: zero vector has no preferred direction");
  }
  Vec u = v / v.norm();
  // Householder reflector H = I - beta w w' with w = u + sign(u0) e0 maps
  // e0 to -sign(u0) u; its remaining columns span the complement of u.
  const double s = u(0) >= 0.0 ? 1.0 : -1.0;
  Vec w = u;
  w(0) += s;
  const double beta = 2.0 / w.squaredNorm();
  Mat B(d, d - 1);
  for (Eigen::Index j = 1; j < d; ++j) {
    B.col(j - 1) = -(beta * w(j)) * w;
    B(j, j - 1) += 1.0;
  }
  return B;
}

Mat rank1_update(const Mat& A, const Vec& x) {
  if (A.rows() != A.cols() || A.rows() != x.size()) {
    throw WrongDimension("rank1_update: dimension mismatch");
  }
  return A + x * x.transpose();
}

}  // namespace banditlab::linalg
