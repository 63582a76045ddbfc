#include <doctest.h>

#include <cmath>

#include "shilnikov/glued_system.hpp"
#include "shilnikov/scattering.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

Mat omega(int n) {
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = Mat::Identity(n, n);
  J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return J;
}

struct GluedFixture {
  std::shared_ptr<GluedSystem> sys;
  ChartPtr chart;
  HeteroclinicOrbit orbit;
  std::shared_ptr<PoincareMap> map;
  double c = 0.0;

  GluedFixture() {
    sys = std::make_shared<GluedSystem>();
    ChartParams cp;
    cp.center = Vec::Zero(2);
    cp.r = 0.1;
    cp.order = 3;
    chart = fit_local_graphs(sys, cp);
    const double th = 88.75 * M_PI / 180;
    HeteroclinicGuess g{Vec::Zero(2), vec({std::cos(th), std::sin(th)}), 7.1};
    orbit = find_heteroclinic(*chart, *chart, g);
    map = poincare_map_for(sys, orbit, 0.1);
    const Trajectory tr = orbit.trajectory(*sys);
    const int N = 20000;
    for (int i = 0; i < N; ++i) c += sys->coupling_weight(tr.at((i + 0.5) * orbit.flight_time / N)) * orbit.flight_time / N;
  }
};

const GluedFixture& glued() {
  static const GluedFixture f;
  return f;
}

}  // namespace

TEST_CASE("sphere chart round trip and Jacobian") {
  const SphereChart ch(vec({0.3, -1.0, 0.5}), 0.1);
  const Vec xi = vec({0.2, -0.4});
  const Vec v = ch.point(xi);
  CHECK(v.norm() == Approx(0.1).epsilon(1e-14));
  CHECK((ch.coords(v) - xi).norm() < 1e-13);
  CHECK((ch.coords(3.0 * v) - xi).norm() < 1e-13);
  const Mat J = ch.jacobian(xi);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::Zero(2);
    e[j] = h;
    const Vec fd = (ch.point(xi + e) - ch.point(xi - e)) / (2 * h);
    CHECK((fd - J.col(j)).norm() < 1e-9);
  }
  CHECK(ch.point(Vec::Zero(2)).dot(ch.pole()) == Approx(0.1));
}

TEST_CASE("symplectic angle sign") {
  CHECK(symplectic_angle(vec({0.1, 0.0}), vec({-0.1, 0.0})) == Approx(0.01));
  CHECK(symplectic_angle(vec({0.1, 0.0}), vec({0.0, 0.1})) == 0.0);
  CHECK(symplectic_angle(vec({0.1, 0.0}), vec({0.1, 0.0})) == Approx(-0.01));
}

TEST_CASE("glued homoclinic is transverse and positive") {
  const auto& f = glued();
  CHECK(f.orbit.residual < 1e-10);
  CHECK(f.orbit.flight_time == Approx(7.075003540).epsilon(1e-8));
  CHECK(f.orbit.c_plus.norm() < 1e-10);
  CHECK(f.orbit.min_singular_value > 1e-3);
  HeteroclinicChain chain;
  chain.orbits = {f.orbit};
  const auto pos = chain_positive(chain);
  CHECK(pos.positive);
  CHECK(pos.margin == Approx(0.00999).epsilon(1e-2));
  CHECK(chain.corner_mismatch() < 1e-10);
}

TEST_CASE("Poincare generating function gradient identity") {
  const auto& f = glued();
  auto rec = make_F_mu(f.map, 1e-6);
  const Vec X = f.map->base_variables() + 1e-3 * Vec::Ones(f.map->arity());
  const auto v = rec.evaluate(X);
  const Vec g = rec.gradient(X, 1e-4);
  CHECK((g - v.conjugate).norm() < 1e-5 * (1 + v.conjugate.norm()));
  const Mat H = rec.hessian(X, 1e-5);
  CHECK((H - H.transpose()).norm() < 1e-4 * (1 + H.norm()));
}

TEST_CASE("glued scattering map linearizes to exp(c sigma_x)") {
  const auto& f = glued();
  CHECK(f.c == Approx(0.5287922786).epsilon(1e-8));
  ScatteringBranch br(f.chart, f.chart, f.map);
  const Vec z = Vec::Zero(1);
  const auto bp = br.evaluate(z, z);
  CHECK(bp.z_plus.norm() < 1e-9);
  CHECK(bp.inner_min_singular > 1e-3);
  const Mat DF = br.DF(z, z);
  CHECK(DF(0, 0) == Approx(std::cosh(f.c)).epsilon(1e-5));
  CHECK(DF(1, 1) == Approx(std::cosh(f.c)).epsilon(1e-5));
  CHECK(DF(0, 1) == Approx(std::sinh(f.c)).epsilon(1e-5));
  CHECK(DF(1, 0) == Approx(std::sinh(f.c)).epsilon(1e-5));
  CHECK((DF.transpose() * omega(1) * DF - omega(1)).norm() < 1e-5);
}

TEST_CASE("branch Jacobian of a quadratic generating function") {
  // S = a x^2/2 + b x y' + c y'^2/2
  const double a = 0.3, b = 1.7, c = -0.4;
  Mat Hs(2, 2);
  Hs << a, b, b, c;
  const Mat DF = branch_jacobian(Hs, 1);
  // y = a x + b y', x' = b x + c y'
  Mat expect(2, 2);
  expect << b - c * a / b, c / b, -a / b, 1 / b;
  CHECK((DF - expect).norm() < 1e-14);
  CHECK(DF.determinant() == Approx(1.0));
}
