#include <doctest.h>

#include <cmath>

#include "shilnikov/genfun.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ChartPtr linear_chart() {
  ChartParams p;
  p.center = Vec::Zero(2);
  p.r = 0.1;
  p.order = 3;
  return fit_local_graphs(build_model(ModelSpec::linear(Dims{1, 1}, 1.0)), p);
}

// -<q, p> with couplings that bend the invariant manifolds over z.
ChartPtr coupled_chart() {
  std::vector<PolyTerm> terms = {{{0, 0, 1, 1}, -1.0}, {{1, 0, 3, 0}, 3.0}, {{0, 1, 0, 3}, -2.0}, {{2, 0, 1, 1}, -0.1}};
  auto sys = std::make_shared<PolynomialSystem>(Dims{1, 1}, terms, "coupled");
  ChartParams p;
  p.center = Vec::Zero(2);
  p.r = 0.1;
  p.order = 5;
  return fit_local_graphs(sys, p);
}

}  // namespace

TEST_CASE("S+ and S- are bilinear on the linear model") {
  auto chart = linear_chart();
  const auto sp = genfun_S_plus(*chart, vec({0.05}), vec({-0.02}), vec({0.08}));
  CHECK(sp.value == Approx(0.05 * -0.02).epsilon(1e-10));
  CHECK(sp.conjugate[0] == Approx(-0.02).epsilon(1e-12));
  CHECK(sp.conjugate[1] == Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(sp.conjugate[2]) < 1e-12);

  const auto sm = genfun_S_minus(*chart, vec({0.03}), vec({0.04}), vec({-0.09}));
  CHECK(sm.value == Approx(0.03 * 0.04).epsilon(1e-10));
  CHECK(sm.conjugate[0] == Approx(0.04).epsilon(1e-12));
  CHECK(sm.conjugate[1] == Approx(0.03).epsilon(1e-12));
  CHECK(std::abs(sm.conjugate[2]) < 1e-12);
}

TEST_CASE("L, L_T and R_mu on the linear model") {
  auto chart = linear_chart();
  const Vec Z = vec({0.02, -0.03, 0.1, -0.1});
  const auto L = genfun_L(*chart, Z);
  CHECK(L.value == Approx(0.02 * -0.03).epsilon(1e-10));

  const double T = 4.0;
  const auto LT = genfun_L_T(*chart, Z, T);
  CHECK(LT.value - L.value == Approx(std::exp(-2 * T) * -0.01).epsilon(1e-7));

  const double mu = 1e-6;
  const auto R = genfun_R_mu(*chart, Z, mu);
  const double expect = -mu * std::log(0.01) + mu * std::log(mu) - mu;
  CHECK(R.value - L.value == Approx(expect).epsilon(1e-6));
}

TEST_CASE("twist of R_mu on the linear model") {
  auto chart = linear_chart();
  const double mu = 1e-6;
  auto rec = make_R_mu(chart, mu);
  CHECK(R_mu_twist(vec({0.1}), vec({-0.1}), 1.0, mu)[0] == Approx(-1e-5).epsilon(1e-12));
  const Vec Z = vec({0.0, 0.0, 0.09, -0.09});
  const Vec g = rec.gradient(Z, 1e-4);
  const Vec tw = R_mu_twist(vec({0.09}), vec({-0.09}), 1.0, mu);
  CHECK(g[2] == Approx(tw[0]).epsilon(1e-5));
  const auto R = rec.evaluate(Z);
  CHECK(R.conjugate[2] == Approx(tw[0]).epsilon(1e-6));
}

TEST_CASE("gradients equal conjugate coordinates on a coupled system") {
  auto chart = coupled_chart();
  SUBCASE("S+") {
    auto rec = make_S_plus(chart);
    const Vec X = vec({0.04, -0.03, 0.07});
    const auto v = rec.evaluate(X);
    CHECK(std::abs(v.value - 0.04 * -0.03) > 1e-6);
    CHECK((rec.gradient(X) - v.conjugate).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  SUBCASE("S-") {
    auto rec = make_S_minus(chart);
    const Vec X = vec({0.05, 0.02, -0.06});
    const auto v = rec.evaluate(X);
    CHECK((rec.gradient(X) - v.conjugate).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  SUBCASE("L") {
    auto rec = make_L(chart);
    const Vec Z = vec({0.03, -0.02, 0.08, -0.07});
    const auto v = rec.evaluate(Z);
    CHECK((rec.gradient(Z) - v.conjugate).lpNorm<Eigen::Infinity>() < 1e-8);
    const Mat H = rec.hessian(Z, 1e-4);
    CHECK((H - H.transpose()).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("L_T gradient on a coupled system") {
  auto chart = coupled_chart();
  auto rec = make_L_T(chart, 3.0);
  const Vec Z = vec({0.03, -0.02, 0.08, -0.07});
  const auto v = rec.evaluate(Z);
  CHECK((rec.gradient(Z) - v.conjugate).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("record offset") {
  auto chart = linear_chart();
  auto rec = make_S_plus(chart);
  const Vec X0 = vec({0.01, 0.01, 0.05});
  rec.set_base(X0);
  CHECK(std::abs(rec.value(X0)) < 1e-15);
  CHECK(rec.arity() == 3);
  CHECK(rec.labels()[0] == "x+0");
}
