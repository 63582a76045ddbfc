#include <doctest.h>

#include <cmath>

#include "shilnikov/bvp.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ChartPtr chart_for(const ModelSpec& spec, double r = 0.1, int order = 3) {
  ChartParams p;
  p.center = Vec::Zero(spec.dims.manifold());
  p.r = r;
  p.order = order;
  return fit_local_graphs(build_model(spec), p);
}

ChartPtr linear_chart(double lambda) { return chart_for(ModelSpec::linear(Dims{1, 1}, lambda)); }

}  // namespace

TEST_CASE("fixed time connection on the linear model") {
  auto chart = linear_chart(1.0);
  const Vec z0 = vec({0, 0});
  auto sol = solve_fixed_time(*chart, z0, vec({0.1}), vec({0.1}), 5.0);
  CHECK(sol.residual <= 1e-12);
  CHECK(sol.mid(2) == Approx(0.1 * std::exp(-5.0)).epsilon(1e-12));
  CHECK(sol.mid(3) == Approx(6.7379e-4).epsilon(1e-4));
  CHECK(sol.A_plus(2) == Approx(0.1).epsilon(1e-13));
  CHECK(sol.A_minus(3) == Approx(0.1).epsilon(1e-13));

  sol.build_pieces(chart->system(), 1e-13);
  double err = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = -5.0 + 10.0 * i / 200.0;
    const Vec exact = vec({0, 0, 0.1 * std::exp(-(t + 5.0)), 0.1 * std::exp(t - 5.0)});
    err = std::max(err, (sol.at(t) - exact).lpNorm<Eigen::Infinity>());
  }
  CHECK(err <= 1e-10);

  auto neg = solve_fixed_time(*chart, z0, vec({0.1}), vec({-0.1}), 5.0);
  CHECK(neg.mu == Approx(0.01 * std::exp(-10.0)).epsilon(1e-10));
  CHECK(neg.mu == Approx(4.5400e-7).epsilon(1e-4));
}

TEST_CASE("fixed energy connection on the linear model") {
  auto chart = linear_chart(1.0);
  const Vec z0 = vec({0, 0});
  auto a = solve_fixed_energy(*chart, z0, vec({0.1}), vec({-0.1}), 1e-6);
  CHECK(a.T == Approx(0.5 * std::log(1e4)).epsilon(1e-12));
  CHECK(std::abs(a.T - 4.60517) < 1e-5);
  CHECK(a.mu == Approx(1e-6).epsilon(1e-11));
  auto b = solve_fixed_energy(*chart, z0, vec({0.1}), vec({-0.1}), 1e-8);
  CHECK(std::abs(b.T - 6.90776) < 1e-5);
  CHECK(b.T - a.T == Approx(std::log(10.0)).epsilon(1e-10));

  // negative energy branch
  auto c = solve_fixed_energy(*chart, z0, vec({0.1}), vec({0.1}), -1e-6);
  CHECK(c.T == Approx(a.T).epsilon(1e-10));
}

TEST_CASE("smooth dependence of T on mu") {
  auto chart = linear_chart(1.0);
  const Vec z0 = vec({0, 0});
  const double mu = 1e-6, h = 1e-3 * mu;
  const double Tp = solve_fixed_energy(*chart, z0, vec({0.1}), vec({-0.1}), mu + h).T;
  const double Tm = solve_fixed_energy(*chart, z0, vec({0.1}), vec({-0.1}), mu - h).T;
  const double fd = (Tp - Tm) / (2 * h);
  CHECK(fd == Approx(-1.0 / (2.0 * mu)).epsilon(0.05));
}

TEST_CASE("asymptotic passage time") {
  auto one = linear_chart(1.0);
  const Vec z0 = vec({0, 0});
  CHECK(asymptotic_T(*one, z0, vec({0.1}), vec({-0.1}), 1e-6) == Approx(4.60517).epsilon(1e-6));
  auto two = linear_chart(2.0);
  const double T2 = asymptotic_T(*two, z0, vec({0.1}), vec({-0.1}), 1e-6);
  CHECK(T2 == Approx((std::log(1e6) + std::log(0.02)) / 4.0).epsilon(1e-12));
  CHECK(std::abs(T2 - 2.4758) < 1e-4);
  CHECK(solve_fixed_energy(*two, z0, vec({0.1}), vec({-0.1}), 1e-6).T == Approx(T2).epsilon(1e-10));

  // T grows as <q+, p-> approaches the cone boundary from below
  const double Ta = asymptotic_T(*one, z0, vec({0.1}), vec({-0.1}), 1e-6);
  const double Tb = asymptotic_T(*one, z0, vec({0.1}), vec({-0.031}), 1e-6);
  CHECK(Tb < Ta);
  CHECK(asymptotic_T(*one, z0, vec({0.1}), vec({-0.001}), 1e-6, {}, false) < Tb);
  CHECK_THROWS_AS(asymptotic_T(*one, z0, vec({0.1}), vec({-0.02}), 1e-6), ConeViolation);
  CHECK_THROWS_AS(asymptotic_T(*one, z0, vec({0.1}), vec({0.1}), 1e-6), ConeViolation);
  CHECK_THROWS_AS(solve_fixed_energy(*one, z0, vec({0.1}), vec({0.1}), 1e-6), ConeViolation);
}

TEST_CASE("cone membership") {
  CHECK_NOTHROW(check_cone(vec({0.1}), vec({-0.1}), 0.1, {}));
  CHECK_THROWS_AS(check_cone(vec({0.02}), vec({-0.1}), 0.1, {}), ConeViolation);
  CHECK_THROWS_AS(check_cone(vec({0.2}), vec({-0.1}), 0.1, {}), ConeViolation);
  CHECK_NOTHROW(check_cone(vec({0.1}), vec({0.1}), 0.1, {}, -1));
}

TEST_CASE("midpoint asymptotics on the cubic model") {
  // H = -qp + c q^2 p: qdot = -q + c q^2 decouples, v+ = q+/(1 - c q+)
  const double c = 0.05;
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic.push_back({{2, 1}, c});
  auto chart = chart_for(spec);
  const Vec z0 = vec({0, 0});
  const double qp = 0.1;
  const double vplus = qp / (1 - c * qp);
  for (double T : {3.0, 6.0}) {
    auto sol = solve_fixed_time(*chart, z0, vec({qp}), vec({-0.1}), T);
    const double exact = vplus * std::exp(-T) / (1 + c * vplus * std::exp(-T));
    CHECK(sol.mid(2) == Approx(exact).epsilon(1e-10));
    CHECK(sol.residual <= 1e-12);
    sol.build_pieces(chart->system(), 1e-13);
    double drift = 0.0;
    for (int i = 0; i <= 50; ++i) {
      const double t = -T + 2 * T * i / 50.0;
      drift = std::max(drift, std::abs(chart->system().energy(sol.at(t)) - sol.mu));
    }
    CHECK(drift <= 1e-14);
  }
}

TEST_CASE("endpoint drift of z with varying lambda") {
  // lambda = 1 + 0.2 x moves y along the connection while W+ carries no drift
  ModelSpec spec;
  spec.dims = Dims{1, 1};
  spec.lambda = {{{0, 0}, 1.0}, {{1, 0}, 0.2}};
  spec.cubic.push_back({{2, 1}, 0.05});
  auto chart = chart_for(spec);
  const Vec z0 = vec({0.1, 0.2});
  const double r = 0.1;
  std::vector<double> ratios;
  for (double T : {3.0, 5.0, 7.0}) {
    auto sol = solve_fixed_time(*chart, z0, vec({0.1}), vec({-0.1}), T);
    const double lam = 1.02;
    const double dz = (zpart(spec.dims, sol.A_plus) - z0).norm();
    ratios.push_back(dz / (T * std::exp(-2 * lam * T) * r * r));
    CHECK(std::abs(sol.A_plus(0) - 0.1) <= 1e-12);
  }
  for (double q : ratios) CHECK(q < 1.0);
  CHECK(ratios.front() > 0.0);
}

TEST_CASE("endpoint boundary conditions") {
  auto chart = linear_chart(1.0);
  auto sol = solve_endpoint_fixed_time(*chart, vec({0.05}), vec({-0.02}), vec({0.1}), vec({-0.1}), 4.0);
  CHECK(sol.A_plus(0) == Approx(0.05));
  CHECK(sol.A_minus(1) == Approx(-0.02));
  CHECK(sol.mu == Approx(0.01 * std::exp(-8.0)).epsilon(1e-10));
  auto e = solve_endpoint_fixed_energy(*chart, vec({0.05}), vec({-0.02}), vec({0.1}), vec({-0.1}), 1e-6);
  CHECK(e.T == Approx(0.5 * std::log(1e4)).epsilon(1e-12));
}

TEST_CASE("fixed time input validation") {
  auto chart = linear_chart(1.0);
  CHECK_THROWS_AS(solve_fixed_time(*chart, vec({0, 0}), vec({0.5}), vec({0.1}), 5.0), ChartExit);
  CHECK_THROWS_AS(solve_fixed_time(*chart, vec({0, 0}), vec({0.1}), vec({0.1}), 0.5), SpecError);
}
