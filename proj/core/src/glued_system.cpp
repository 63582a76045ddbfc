#include "shilnikov/glued_system.hpp"

#include <cmath>

#include <unsupported/Eigen/AutoDiff>

namespace shilnikov {

namespace {

using Deriv6 = Eigen::Matrix<double, 6, 1>;
using AD1 = Eigen::AutoDiffScalar<Deriv6>;
using AD2 = Eigen::AutoDiffScalar<Eigen::Matrix<AD1, 6, 1>>;

double val(double v) { return v; }
double val(const Jet& v) { return v.value(); }
double val(const AD1& v) { return v.value(); }
double val(const AD2& v) { return v.value().value(); }

template <class S>
S exp_neg_inv(const S& t) {
  using std::exp;
  return exp(-1.0 / t);
}

template <class S>
S step_t(const S& s, double a, double b) {
  const S t = (s - a) / (b - a);
  if (val(t) <= 0.0) return S(0.0);
  if (val(t) >= 1.0) return S(1.0);
  const S f0 = exp_neg_inv(t);
  const S f1 = exp_neg_inv(S(1.0 - t));
  return f0 / (f0 + f1);
}

template <class S>
S bump_t(const S& s, double a, double b) {
  using std::exp;
  if (val(s) <= a || val(s) >= b) return S(0.0);
  const S u = (2.0 * s - (a + b)) / (b - a);
  return exp(1.0 - 1.0 / (1.0 - u * u));
}

template <class S>
S glued_energy(const GluedParams& P, const S* v) {
  const double h = std::sqrt(0.5);
  const S& x = v[0];
  const S& y = v[1];
  const S Q1 = h * (v[2] + v[4]);
  const S Q2 = h * (v[3] + v[5]);
  const S P1 = h * (v[4] - v[2]);
  const S P2 = h * (v[5] - v[3]);
  const S s = Q1 * Q1 + Q2 * Q2;
  S K = 0.5 * (P1 * P1 + P2 * P2) - 0.5 * s;
  const S st = step_t(s, 0.09, 0.49);
  if (val(st) != 0.0) K = K + 0.25 * st * s * s;
  const S ba = bump_t(s, 0.3, 2.4);
  if (val(ba) != 0.0) {
    const S a2 = Q1 * Q1, b2 = Q2 * Q2;
    K = K + 0.25 * P.delta * ba * (a2 * a2 - 6.0 * a2 * b2 + b2 * b2);
  }
  const S bw = bump_t(s, 0.6, 1.8);
  if (val(bw) != 0.0) K = K + P.omega * bw * (Q1 * P2 - Q2 * P1);
  const S bz = bump_t(s, 0.5, 1.9);
  if (val(bz) != 0.0) K = K + P.eps_z * bz * (0.5 * (y * y - x * x));
  const S lam = 1.0 + P.lambda2 * (x * x + y * y);
  return lam * K;
}

}  // namespace

double smooth_step(double s, double a, double b) { return step_t<double>(s, a, b); }
double smooth_bump(double s, double a, double b) { return bump_t<double>(s, a, b); }

GluedSystem::GluedSystem(GluedParams params) : HamiltonianSystem(Dims{1, 2}, "glued"), params_(params) {}

double GluedSystem::energy(const Vec& s) const { return glued_energy<double>(params_, s.data()); }

Jet GluedSystem::energy_jet(const std::vector<Jet>& s) const { return glued_energy<Jet>(params_, s.data()); }

Vec GluedSystem::gradient(const Vec& s) const {
  AD1 v[6];
  for (int i = 0; i < 6; ++i) v[i] = AD1(s[i], 6, i);
  const AD1 H = glued_energy<AD1>(params_, v);
  return H.derivatives();
}

Mat GluedSystem::hessian(const Vec& s) const {
  AD2 v[6];
  for (int i = 0; i < 6; ++i) {
    v[i].value() = AD1(s[i], 6, i);
    v[i].derivatives().resize(6);
    for (int j = 0; j < 6; ++j) v[i].derivatives()[j] = AD1(i == j ? 1.0 : 0.0, Deriv6::Zero());
  }
  const AD2 H = glued_energy<AD2>(params_, v);
  Mat out(6, 6);
  for (int i = 0; i < 6; ++i) out.row(i) = H.derivatives()[i].derivatives().transpose();
  return 0.5 * (out + out.transpose());
}

double GluedSystem::coupling_weight(const Vec& s) const {
  const double h = std::sqrt(0.5);
  const double Q1 = h * (s[2] + s[4]), Q2 = h * (s[3] + s[5]);
  return params_.eps_z * smooth_bump(Q1 * Q1 + Q2 * Q2, 0.5, 1.9);
}

}  // namespace shilnikov
