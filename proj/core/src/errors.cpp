#include "shilnikov/types.hpp"

namespace shilnikov {

Mat poisson_matrix(const Dims& d) {
  const int n = d.phase();
  Mat J = Mat::Zero(n, n);
  for (int i = 0; i < d.m; ++i) {
    J(d.x0() + i, d.y0() + i) = 1.0;
    J(d.y0() + i, d.x0() + i) = -1.0;
  }
  for (int i = 0; i < d.k; ++i) {
    J(d.q0() + i, d.p0() + i) = 1.0;
    J(d.p0() + i, d.q0() + i) = -1.0;
  }
  return J;
}

Mat omega_matrix(const Dims& d) { return -poisson_matrix(d); }

Mat omega_pairs(int n) {
  Mat W = Mat::Zero(2 * n, 2 * n);
  W.topRightCorner(n, n) = -Mat::Identity(n, n);
  W.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return W;
}

double symplecticity_defect(const Mat& M, const Mat& Omega) {
  return (M.transpose() * Omega * M - Omega).cwiseAbs().maxCoeff();
}

}  // namespace shilnikov
