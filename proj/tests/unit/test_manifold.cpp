#include <doctest.h>

#include <cmath>
#include <random>

#include "shilnikov/integrator.hpp"
#include "shilnikov/manifold.hpp"
#include "shilnikov/three_body.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ChartParams params_at(const Vec& c, double r, int order) {
  ChartParams p;
  p.center = c;
  p.r = r;
  p.order = order;
  return p;
}

std::shared_ptr<PolynomialSystem> cubic_q_system(double c) {
  // H = -q p + c q^3 with m = k = 1
  return std::make_shared<PolynomialSystem>(Dims{1, 1}, std::vector<PolyTerm>{{{0, 0, 1, 1}, -1.0}, {{0, 0, 3, 0}, c}});
}

}  // namespace

TEST_CASE("eigenvalue of the linear model") {
  auto sys = build_model(ModelSpec::linear(Dims{1, 1}, 1.0));
  CHECK(eigenvalue_lambda(*sys, vec({0.2, 0.1})) == Approx(1.0));
  ModelSpec spec;
  spec.dims = Dims{1, 1};
  spec.lambda = {{{0, 0}, 1.0}, {{2, 0}, 1.0}};
  CHECK(eigenvalue_lambda(*build_model(spec), vec({1.0, 0.0})) == Approx(2.0));
}

TEST_CASE("three body eigenvalue from the linearization") {
  ThreeBodyParams P;
  ThreeBodySystem sys(P);
  CHECK(eigenvalue_lambda(sys, vec({1, 0, 0, 0})) == Approx(1.414214).epsilon(1e-6));
  CHECK_THROWS_AS(eigenvalue_lambda(sys, vec({1, 0, 1.5, 0})), NotHyperbolic);
}

TEST_CASE("unequal eigenvalues are rejected") {
  // H = -q1 p1 - 2 q2 p2
  auto sys = std::make_shared<PolynomialSystem>(
      Dims{1, 2}, std::vector<PolyTerm>{{{0, 0, 1, 0, 1, 0}, -1.0}, {{0, 0, 0, 1, 0, 1}, -2.0}});
  CHECK_THROWS_AS(eigenvalue_lambda(*sys, vec({0, 0})), NotEqualEigenvalues);
}

TEST_CASE("model graphs are the coordinate planes") {
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic = {{{2, 1}, 0.3}, {{1, 2}, -0.2}, {{2, 2}, 0.1}};
  auto chart = fit_local_graphs(build_model(spec), params_at(vec({0, 0}), 0.1, 6));
  const auto g = chart->center_graphs();
  for (const auto& P : {g->data().f_plus, g->data().f_minus, g->data().eta_plus, g->data().eta_minus})
    for (const Jet& j : P) CHECK(j.max_abs() == 0.0);
}

TEST_CASE("fitted graph of -qp + c q^3") {
  const double c = 0.7;
  auto chart = fit_local_graphs(cubic_q_system(c), params_at(vec({0, 0}), 0.1, 5));
  const auto g = chart->center_graphs();
  const Vec z = vec({0, 0});
  for (double q : {0.05, -0.08, 0.1}) {
    CHECK(g->f_plus(z, vec({q}))[0] == Approx(c * q * q).epsilon(1e-14));
    CHECK(g->f_minus(z, vec({q}))[0] == 0.0);
  }
  // the straightening subtracts the graph and nothing else
  const StraighteningMap phi = straighten(*chart, z);
  const Vec t = phi.forward(vec({0, 0, 0.07, 0.02}));
  CHECK(t[2] == Approx(0.07));
  CHECK(t[3] == Approx(0.02 - c * 0.0049));
  CHECK((phi.inverse(t) - vec({0, 0, 0.07, 0.02})).norm() < 1e-15);
  CHECK(chart->invariance_residual_plus(z, vec({0.1})) < 1e-14);
}

TEST_CASE("limit direction of the q^2 p model") {
  // qdot = -q + c q^2 on p = 0, so e^t q(t) -> q0 / (1 - c q0)
  const double c = 0.4;
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic = {{{2, 1}, c}};
  auto chart = fit_local_graphs(build_model(spec), params_at(vec({0, 0}), 0.1, 10));
  for (double q : {0.02, 0.05, -0.1}) {
    const LimitDirection v = limit_direction_plus(*chart, vec({0, 0}), vec({q}));
    CHECK(v.v[0] == Approx(q / (1 - c * q)).epsilon(1e-9));
    const LimitDirection w = limit_direction_minus(*chart, vec({0, 0}), vec({q}));
    CHECK(w.v[0] == Approx(q));
  }
  CHECK(limit_direction_plus(*chart, vec({0, 0}), vec({0.0})).v[0] == 0.0);
  CHECK_THROWS_AS(limit_direction_plus(*chart, vec({0, 0}), vec({0.2})), ChartOverflow);
}

TEST_CASE("unperturbed model straightening is the identity") {
  ModelSpec spec;
  spec.dims = Dims{1, 2};
  spec.lambda = {{{0, 0}, 1.0}, {{1, 0}, 0.3}};
  spec.cubic = {{{2, 0, 0, 2}, 0.2}};
  auto chart = fit_local_graphs(build_model(spec), params_at(vec({0.1, 0.2}), 0.1, 4));
  const StraighteningMap phi = straighten(*chart, vec({0.1, 0.2}));
  const Vec s = vec({0.12, 0.18, 0.03, -0.02, 0.05, 0.01});
  CHECK((phi.forward(s) - s).norm() < 1e-15);
}

TEST_CASE("adapted three body chart") {
  ThreeBodyParams P{0.5, 0.5, 0.0, -0.2};
  auto sys = std::make_shared<AdaptedThreeBodySystem>(P);
  const Vec z0 = vec({1.0, 0.2, 0.1, 0.3});
  const double r = 0.05;
  auto chart = fit_local_graphs(sys, params_at(z0, r, 3));
  const double lam = three_body_lambda(P, z0);
  CHECK(chart->center_graphs()->lambda() == Approx(lam).epsilon(1e-10));
  CHECK(chart->center_graphs()->lambda_at(vec({1.05, 0.2, 0.1, 0.25})) ==
        Approx(three_body_lambda(P, vec({1.05, 0.2, 0.1, 0.25}))).epsilon(1e-4));
  // residual of the order-3 graph is fourth order
  const Vec dir = vec({0.6, -0.8});
  const double r1 = chart->invariance_residual_plus(z0, r * dir);
  const double r2 = chart->invariance_residual_plus(z0, 0.5 * r * dir);
  MESSAGE("three body order 3 invariance residual at r: " << r1);
  CHECK(r1 / r2 > 10.0);
  const double m1 = chart->invariance_residual_minus(z0, r * dir);
  const double m2 = chart->invariance_residual_minus(z0, 0.5 * r * dir);
  CHECK(m1 / m2 > 10.0);
}

TEST_CASE("three body limit direction against extrapolation") {
  ThreeBodyParams P{0.5, 0.5, 0.0, -0.2};
  auto sys = std::make_shared<AdaptedThreeBodySystem>(P);
  const Vec z0 = vec({1.0, 0.2, 0.1, 0.3});
  auto chart = fit_local_graphs(sys, params_at(z0, 0.05, 6));
  const Vec q = vec({0.03, -0.02});
  const Vec a = chart->stable_point(z0, q);
  const LimitDirection v = limit_direction_plus(*chart, z0, q);
  CHECK((v.v - q).norm() < 0.5 * q.squaredNorm() * 10);
  const double lam0 = chart->lambda(z0);
  std::vector<Vec> ys;
  const double dT = 1.0 / lam0;
  for (int i = 0; i < 3; ++i) {
    const double T = (5 + i) / lam0;
    const Vec s = flow(*sys, a, T, 1e-13);
    const Vec zinf = s.head(4);
    const double lam = eigenvalue_lambda(*sys, zinf);
    ys.push_back(std::exp(lam * T) * s.segment(4, 2));
  }
  const double eps = std::exp(-lam0 * dT);
  const Vec extrap = (ys[2] - eps * ys[1]) / (1 - eps);
  MESSAGE("limit direction offset " << (v.v - q).transpose() << " extrapolation gap " << (extrap - v.v).norm());
  CHECK((extrap - v.v).norm() < 5 * std::exp(-2 * 6.0) * q.norm() + 1e-9);
}

TEST_CASE("straightened flow is linear along W+") {
  ThreeBodyParams P{0.5, 0.5, 0.0, -0.2};
  auto sys = std::make_shared<AdaptedThreeBodySystem>(P);
  const Vec z0 = vec({1.0, 0.2, 0.1, 0.3});
  auto chart = fit_local_graphs(sys, params_at(z0, 0.05, 5));
  const StraighteningMap phi = straighten(*chart, z0);
  const Vec a = chart->stable_point(z0, vec({0.02, 0.01}));
  const Vec s0 = phi.forward(a);
  CHECK(s0.tail(2).norm() < 1e-10);
  const double lam = chart->graphs(z0)->lambda_at(s0.head(4));
  const Vec s1 = phi.forward(flow(*sys, a, 1.0, 1e-13));
  const double slope = std::log(s1.segment(4, 2).norm() / s0.segment(4, 2).norm());
  CHECK(slope == Approx(-lam).epsilon(1e-4));
  CHECK((s1.head(4) - s0.head(4)).norm() < 1e-8);
  // round trip and identity Jacobian at M
  CHECK((phi.inverse(s0) - a).norm() < 1e-14);
  const Vec m = on_manifold(Dims{2, 2}, z0);
  CHECK((phi.forward(m) - m).norm() < 1e-15);
}
