#include "shilnikov/three_body.hpp"

#include <array>
#include <cmath>

namespace shilnikov {

void ThreeBodyParams::validate() const {
  if (!(alpha1 > 0 && alpha1 < 1 && alpha2 > 0 && alpha2 < 1))
    throw SpecError("alpha1, alpha2 must lie in (0, 1)");
  if (std::abs(alpha1 + alpha2 - 1.0) > 1e-12) throw SpecError("alpha1 + alpha2 must equal 1");
  if (mu < 0) throw SpecError("mu must be nonnegative");
}

LeviCivitaImage levi_civita_forward(std::complex<double> x, std::complex<double> y,
                                    std::complex<double> xi, std::complex<double> eta,
                                    const ThreeBodyParams& params) {
  if (xi == 0.0) throw DomainError("Levi-Civita map undefined at xi = 0");
  const std::complex<double> xi2 = xi * xi;
  const std::complex<double> u = eta / (2.0 * std::conj(xi));
  return {x - params.alpha2 * xi2, x + params.alpha1 * xi2, params.alpha1 * y - u,
          params.alpha2 * y + u};
}

Vec levi_civita_state(const Vec& s, const ThreeBodyParams& params) {
  const auto r = levi_civita_forward({s[0], s[1]}, {s[2], s[3]}, {s[4], s[5]}, {s[6], s[7]}, params);
  Vec out(8);
  out << r.q1.real(), r.q1.imag(), r.p1.real(), r.p1.imag(), r.q2.real(), r.q2.imag(),
      r.p2.real(), r.p2.imag();
  return out;
}

namespace {

constexpr double kCollision = 1e-12;

template <class S>
S regularized_energy(const ThreeBodyParams& P, const S& x1, const S& x2, const S& y1, const S& y2,
                     const S& xi1, const S& xi2, const S& eta1, const S& eta2) {
  const double a = 1.0 / (8.0 * P.alpha1 * P.alpha2);
  const S w1 = xi1 * xi1 - xi2 * xi2;
  const S w2 = 2.0 * xi1 * xi2;
  const S A1 = P.alpha2 * w1 - x1, A2 = P.alpha2 * w2 - x2;
  const S B1 = P.alpha1 * w1 + x1, B2 = P.alpha1 * w2 + x2;
  const S A2n = A1 * A1 + A2 * A2;
  const S B2n = B1 * B1 + B2 * B2;
  if (std::sqrt(value_of(A2n)) < kCollision || std::sqrt(value_of(B2n)) < kCollision)
    throw DomainError("collision with the primary");
  using std::sqrt;
  const S K = P.E + P.alpha1 / sqrt(A2n) + P.alpha2 / sqrt(B2n) -
              0.5 * (1.0 + P.mu) * (y1 * y1 + y2 * y2);
  return a * (eta1 * eta1 + eta2 * eta2) - (xi1 * xi1 + xi2 * xi2) * K + P.mu * P.alpha1 * P.alpha2;
}

}  // namespace

ThreeBodySystem::ThreeBodySystem(ThreeBodyParams params)
    : HamiltonianSystem(Dims{2, 2}, "three-body"), params_(params) {
  params_.validate();
}

double ThreeBodySystem::energy(const Vec& s) const {
  return regularized_energy<double>(params_, s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]);
}

Jet ThreeBodySystem::energy_jet(const std::vector<Jet>& s) const {
  return regularized_energy<Jet>(params_, s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]);
}

Vec ThreeBodySystem::gradient(const Vec& s) const {
  const ThreeBodyParams& P = params_;
  const double a = 1.0 / (8.0 * P.alpha1 * P.alpha2);
  const Eigen::Vector2d x(s[0], s[1]), y(s[2], s[3]), xi(s[4], s[5]), eta(s[6], s[7]);
  const Eigen::Vector2d w(xi[0] * xi[0] - xi[1] * xi[1], 2.0 * xi[0] * xi[1]);
  const Eigen::Vector2d A = P.alpha2 * w - x, B = P.alpha1 * w + x;
  const double nA = A.norm(), nB = B.norm();
  if (nA < kCollision || nB < kCollision) throw DomainError("collision with the primary");
  const double r2 = xi.squaredNorm();
  const double K = P.E + P.alpha1 / nA + P.alpha2 / nB - 0.5 * (1.0 + P.mu) * y.squaredNorm();
  const Eigen::Vector2d Ax = A / (nA * nA * nA), Bx = B / (nB * nB * nB);
  const Eigen::Vector2d dKdx = P.alpha1 * Ax - P.alpha2 * Bx;
  const Eigen::Vector2d dKdw = -P.alpha1 * P.alpha2 * (Ax + Bx);
  const double dK1 = dKdw.dot(Eigen::Vector2d(2.0 * xi[0], 2.0 * xi[1]));
  const double dK2 = dKdw.dot(Eigen::Vector2d(-2.0 * xi[1], 2.0 * xi[0]));
  Vec g(8);
  g.segment<2>(0) = -r2 * dKdx;
  g.segment<2>(2) = r2 * (1.0 + P.mu) * y;
  g[4] = -2.0 * xi[0] * K - r2 * dK1;
  g[5] = -2.0 * xi[1] * K - r2 * dK2;
  g.segment<2>(6) = 2.0 * a * eta;
  return g;
}

double regularized_hamiltonian(const Vec& s, const ThreeBodyParams& params) {
  return ThreeBodySystem(params).energy(s);
}

KeplerPairSystem::KeplerPairSystem(ThreeBodyParams params)
    : HamiltonianSystem(Dims{2, 2}, "kepler-pair"), params_(params) {
  params_.validate();
}

double KeplerPairSystem::energy(const Vec& s) const {
  const ThreeBodyParams& P = params_;
  const Eigen::Vector2d q1(s[0], s[1]), p1(s[2], s[3]), q2(s[4], s[5]), p2(s[6], s[7]);
  const double n1 = q1.norm(), n2 = q2.norm(), n12 = (q1 - q2).norm();
  if (n1 < kCollision || n2 < kCollision) throw DomainError("collision with the primary");
  double H = p1.squaredNorm() / (2 * P.alpha1) + p2.squaredNorm() / (2 * P.alpha2) -
             P.alpha1 / n1 - P.alpha2 / n2;
  if (P.mu != 0.0) {
    if (n12 < kCollision) throw DomainError("double collision");
    H += P.mu * (0.5 * (p1 + p2).squaredNorm() - P.alpha1 * P.alpha2 / n12);
  }
  return H;
}

Vec KeplerPairSystem::gradient(const Vec& s) const {
  const ThreeBodyParams& P = params_;
  const Eigen::Vector2d q1(s[0], s[1]), p1(s[2], s[3]), q2(s[4], s[5]), p2(s[6], s[7]);
  const double n1 = q1.norm(), n2 = q2.norm();
  if (n1 < kCollision || n2 < kCollision) throw DomainError("collision with the primary");
  Eigen::Vector2d gq1 = P.alpha1 * q1 / (n1 * n1 * n1);
  Eigen::Vector2d gq2 = P.alpha2 * q2 / (n2 * n2 * n2);
  Eigen::Vector2d gp1 = p1 / P.alpha1, gp2 = p2 / P.alpha2;
  if (P.mu != 0.0) {
    const Eigen::Vector2d d = q1 - q2;
    const double n12 = d.norm();
    if (n12 < kCollision) throw DomainError("double collision");
    const Eigen::Vector2d f = P.mu * P.alpha1 * P.alpha2 * d / (n12 * n12 * n12);
    gq1 += f;
    gq2 -= f;
    gp1 += P.mu * (p1 + p2);
    gp2 += P.mu * (p1 + p2);
  }
  Vec g(8);
  g << gq1, gp1, gq2, gp2;
  return g;
}

double three_body_lambda(const ThreeBodyParams& P, const Vec& z) {
  const double r = std::hypot(z[0], z[1]);
  if (r < kCollision) throw DomainError("x at the primary");
  const double c = P.E + 1.0 / r - 0.5 * (1.0 + P.mu) * (z[2] * z[2] + z[3] * z[3]);
  if (!(c > 0)) throw NotHyperbolic("point violates |y|^2/2 - 1/|x| < E");
  return std::sqrt(c / (2.0 * P.alpha1 * P.alpha2));
}

namespace {

// c(x, y) and the partial derivatives of ln s = ln(c/a)/4.
template <class S>
struct ScaleData {
  S c;
  S dlns_dx1, dlns_dx2, dlns_dy1, dlns_dy2;
};

template <class S>
ScaleData<S> scale_data(const ThreeBodyParams& P, const S& x1, const S& x2, const S& y1,
                        const S& y2) {
  using std::sqrt;
  const S r2 = x1 * x1 + x2 * x2;
  const S r = sqrt(r2);
  const S c = P.E + 1.0 / r - 0.5 * (1.0 + P.mu) * (y1 * y1 + y2 * y2);
  if (!(value_of(c) > 0)) throw NotHyperbolic("adapted chart requires E + 1/|x| - |y|^2/2 > 0");
  const S inv4c = 1.0 / (4.0 * c);
  const S r3 = r2 * r;
  return {c, -x1 * inv4c / r3, -x2 * inv4c / r3, -(1.0 + P.mu) * y1 * inv4c,
          -(1.0 + P.mu) * y2 * inv4c};
}

double change(double a, double b) { return std::abs(a - b); }
double change(const Jet& a, const Jet& b) { return (a - b).max_abs(); }
double magnitude(double a) { return std::abs(a); }
double magnitude(const Jet& a) { return a.max_abs(); }

template <class S>
std::array<S, 8> adapted_to_regularized(const ThreeBodyParams& P, const std::array<S, 8>& s,
                                        int iterations) {
  const double a = 1.0 / (8.0 * P.alpha1 * P.alpha2);
  const double r2 = std::sqrt(2.0);
  const S& xp1 = s[0];
  const S& xp2 = s[1];
  const S& yp1 = s[2];
  const S& yp2 = s[3];
  const S xi1p = (s[4] + s[6]) / r2, xi2p = (s[5] + s[7]) / r2;
  const S eta1p = (s[6] - s[4]) / r2, eta2p = (s[7] - s[5]) / r2;
  const S w = xi1p * eta1p + xi2p * eta2p;
  S x1 = xp1, x2 = xp2;
  int settled = 0;
  for (int it = 0; it < iterations && settled < 2; ++it) {
    const auto d = scale_data<S>(P, x1, x2, yp1, yp2);
    const S nx1 = xp1 - d.dlns_dy1 * w;
    const S nx2 = xp2 - d.dlns_dy2 * w;
    const double delta = change(nx1, x1) + change(nx2, x2);
    const double scale = 1.0 + magnitude(nx1) + magnitude(nx2);
    x1 = nx1;
    x2 = nx2;
    settled = delta <= 1e-16 * scale ? settled + 1 : 0;
  }
  const auto d = scale_data<S>(P, x1, x2, yp1, yp2);
  using std::pow;
  const S sc = pow(d.c / a, 0.25);
  return {x1, x2, yp1 + d.dlns_dx1 * w, yp2 + d.dlns_dx2 * w,
          xi1p / sc, xi2p / sc, eta1p * sc, eta2p * sc};
}

int fixed_point_iterations(int degree) { return 100 + 2 * degree; }

}  // namespace

AdaptedThreeBodySystem::AdaptedThreeBodySystem(ThreeBodyParams params)
    : HamiltonianSystem(Dims{2, 2}, "three-body-adapted"), base_(params) {}

Vec AdaptedThreeBodySystem::to_regularized(const Vec& s) const {
  std::array<double, 8> a;
  for (int i = 0; i < 8; ++i) a[i] = s[i];
  const auto r = adapted_to_regularized<double>(base_.params(), a, fixed_point_iterations(0));
  Vec out(8);
  for (int i = 0; i < 8; ++i) out[i] = r[i];
  return out;
}

Vec AdaptedThreeBodySystem::from_regularized(const Vec& r) const {
  const ThreeBodyParams& P = base_.params();
  const double a = 1.0 / (8.0 * P.alpha1 * P.alpha2);
  const double w = r[4] * r[6] + r[5] * r[7];
  double y1 = r[2], y2 = r[3];
  for (int it = 0; it < fixed_point_iterations(0); ++it) {
    const auto d = scale_data<double>(P, r[0], r[1], y1, y2);
    const double n1 = r[2] - d.dlns_dx1 * w, n2 = r[3] - d.dlns_dx2 * w;
    const bool done = n1 == y1 && n2 == y2;
    y1 = n1;
    y2 = n2;
    if (done) break;
  }
  const auto d = scale_data<double>(P, r[0], r[1], y1, y2);
  const double sc = std::pow(d.c / a, 0.25);
  const double xi1p = sc * r[4], xi2p = sc * r[5], eta1p = r[6] / sc, eta2p = r[7] / sc;
  const double s2 = std::sqrt(2.0);
  Vec out(8);
  out << r[0] + d.dlns_dy1 * w, r[1] + d.dlns_dy2 * w, y1, y2, (xi1p - eta1p) / s2,
      (xi2p - eta2p) / s2, (xi1p + eta1p) / s2, (xi2p + eta2p) / s2;
  return out;
}

double AdaptedThreeBodySystem::energy(const Vec& s) const { return base_.energy(to_regularized(s)); }

Jet AdaptedThreeBodySystem::energy_jet(const std::vector<Jet>& s) const {
  std::array<Jet, 8> a;
  for (int i = 0; i < 8; ++i) a[i] = s[i];
  int degree = 0;
  for (const Jet& j : s)
    if (!j.is_constant_only()) degree = j.space().degree();
  const auto r = adapted_to_regularized<Jet>(base_.params(), a, fixed_point_iterations(degree));
  return base_.energy_jet(std::vector<Jet>(r.begin(), r.end()));
}

}  // namespace shilnikov
