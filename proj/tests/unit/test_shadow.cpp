#include <doctest.h>

#include <cmath>
#include <random>

#include "shilnikov/glued_system.hpp"
#include "shilnikov/shadow.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

// S(x, y') = a x^2/2 + b x y' + c y'^2/2 + e x^4/4
BranchFunction quadratic_branch(double a, double b, double c, double e = 0.0) {
  return [=](const Vec& x, const Vec& yn) {
    BranchEval r;
    r.S = a * x[0] * x[0] / 2 + b * x[0] * yn[0] + c * yn[0] * yn[0] / 2 + e * std::pow(x[0], 4) / 4;
    r.y_minus = Vec::Constant(1, a * x[0] + b * yn[0] + e * std::pow(x[0], 3));
    r.x_plus = Vec::Constant(1, b * x[0] + c * yn[0]);
    return r;
  };
}

Vec corner(double x, double y) {
  Vec z(2);
  z << x, y;
  return z;
}

}  // namespace

TEST_CASE("discrete action of a twist map: fixed point and det(DF - I)") {
  const double a = 0.3, b = 1.7, c = -0.4;
  DiscreteOrbitProblem P;
  P.branches = {quadratic_branch(a, b, c, 0.5)};
  P.guesses = {corner(0.05, -0.03)};
  const auto orb = solve_discrete_action(P, 1e-12);
  CHECK(orb.gradient_norm < 1e-10);
  CHECK(orb.corners[0].norm() < 1e-8);
  CHECK(orb.nondegenerate);
  const double tr = (b - c * a / b) + 1 / b;
  CHECK(orb.det_DFn_minus_I == Approx(2 - tr).epsilon(1e-6));
}

TEST_CASE("Hessian determinant equals b det(DF - I)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = U(rng), c = U(rng);
    const double b = 0.5 + std::abs(U(rng));
    DiscreteOrbitProblem P;
    P.branches = {quadratic_branch(a, b, c)};
    P.guesses = {corner(0.0, 0.0)};
    const double tr = (b - c * a / b) + 1 / b;
    if (std::abs(2 - tr) < 1e-3) continue;
    const auto orb = solve_discrete_action(P, 1e-12);
    CHECK(orb.hessian.determinant() == Approx(b * orb.det_DFn_minus_I).epsilon(1e-5));
  }
}

TEST_CASE("two-corner chain composes the branch Jacobians") {
  DiscreteOrbitProblem P;
  P.branches = {quadratic_branch(0.3, 1.7, -0.4), quadratic_branch(-0.2, 0.9, 0.6)};
  P.guesses = {corner(0.01, 0.02), corner(-0.01, 0.0)};
  const auto orb = solve_discrete_action(P, 1e-12);
  Mat H1(2, 2), H2(2, 2);
  H1 << 0.3, 1.7, 1.7, -0.4;
  H2 << -0.2, 0.9, 0.9, 0.6;
  const Mat D = branch_jacobian(H2, 1) * branch_jacobian(H1, 1);
  CHECK((orb.DFn - D).norm() < 1e-5);
  CHECK(orb.det_DFn_minus_I == Approx((D - Mat::Identity(2, 2)).determinant()).epsilon(1e-5));
}

TEST_CASE("degenerate twist map is rejected") {
  // trace 2: b - c a / b + 1 / b = 2 with b = 1, a = 1, c = 0
  DiscreteOrbitProblem P;
  P.branches = {quadratic_branch(1.0, 1.0, 0.0)};
  P.guesses = {corner(0.0, 0.0)};
  CHECK_THROWS_AS(solve_discrete_action(P, 1e-12), DegenerateOrbit);
}

TEST_CASE("glued shadowing orbit at mu = 1e-4") {
  auto sys = std::make_shared<GluedSystem>();
  ChartParams cp;
  cp.center = Vec::Zero(2);
  cp.r = 0.1;
  cp.order = 3;
  auto chart = fit_local_graphs(sys, cp);
  const double th = 88.75 * M_PI / 180;
  Vec p(2);
  p << std::cos(th), std::sin(th);
  const auto h = find_heteroclinic(*chart, *chart, HeteroclinicGuess{Vec::Zero(2), p, 7.1});
  ShadowProblem P;
  P.system = sys;
  P.charts = {chart};
  P.maps = {poincare_map_for(sys, h, 0.1)};
  P.X0 = P.maps[0]->base_variables();
  P.mu = 1e-4;
  const auto orb = solve_shadow(P);
  CHECK(orb.gradient_norm < 1e-10);
  CHECK(orb.closure < 1e-8);
  CHECK(orb.energy_defect < 1e-9);
  CHECK(orb.period - std::abs(std::log(1e-4)) == Approx(2.47).epsilon(0.02));
  const auto ms = multiplier_spectrum(*sys, orb, 0.5, 1e-14);
  REQUIRE(ms.log_abs.size() == 4);
  CHECK(ms.pairing_defect < 1e-6);
  CHECK(ms.value(1) == Approx(std::exp(0.5287922786)).epsilon(0.05));
}
