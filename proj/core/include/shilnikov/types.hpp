#pragma once

#include <Eigen/Dense>

#include <limits>

namespace shilnikov {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Phase states are flat vectors ordered (x, y, q, p); z = (x, y).
struct Dims {
  int m = 1;
  int k = 1;

  int phase() const { return 2 * m + 2 * k; }
  int manifold() const { return 2 * m; }
  int fiber() const { return 2 * k; }

  int x0() const { return 0; }
  int y0() const { return m; }
  int q0() const { return 2 * m; }
  int p0() const { return 2 * m + k; }

  bool operator==(const Dims&) const = default;
};

inline Vec xpart(const Dims& d, const Vec& s) { return s.segment(d.x0(), d.m); }
inline Vec ypart(const Dims& d, const Vec& s) { return s.segment(d.y0(), d.m); }
inline Vec zpart(const Dims& d, const Vec& s) { return s.head(d.manifold()); }
inline Vec qpart(const Dims& d, const Vec& s) { return s.segment(d.q0(), d.k); }
inline Vec ppart(const Dims& d, const Vec& s) { return s.segment(d.p0(), d.k); }

inline Vec assemble(const Dims& d, const Vec& z, const Vec& q, const Vec& p) {
  Vec s(d.phase());
  s << z, q, p;
  return s;
}

inline Vec on_manifold(const Dims& d, const Vec& z) {
  return assemble(d, z, Vec::Zero(d.k), Vec::Zero(d.k));
}

// X = J * grad H reproduces xdot = H_y, ydot = -H_x, qdot = H_p, pdot = -H_q.
Mat poisson_matrix(const Dims& d);

// omega(u, v) = u^T Omega v for omega = dy^dx + dp^dq.
Mat omega_matrix(const Dims& d);

// Canonical 2n x 2n form for a single set of pairs (a, b) with omega = db^da.
Mat omega_pairs(int n);

double symplecticity_defect(const Mat& M, const Mat& Omega);

}  // namespace shilnikov
