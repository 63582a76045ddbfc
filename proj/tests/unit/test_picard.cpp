#include <doctest.h>

#include <cmath>

#include "shilnikov/bvp.hpp"
#include "shilnikov/picard.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ChartPtr chart_for(const ModelSpec& spec, double r = 0.1, int order = 4) {
  ChartParams p;
  p.center = Vec::Zero(spec.dims.manifold());
  p.r = r;
  p.order = order;
  return fit_local_graphs(build_model(spec), p);
}

ModelSpec coupled_model(double c) {
  // H = -qp + c (q^2 p + q p^2)
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic = {{{2, 1}, c}, {{1, 2}, c}};
  return spec;
}

}  // namespace

TEST_CASE("cumulative quadrature is exact for cubics") {
  const int M = 10;
  const double h = 0.3;
  Mat f(1, M + 1);
  for (int i = 0; i <= M; ++i) {
    const double t = i * h;
    f(0, i) = 1 - 2 * t + 0.5 * t * t * t;
  }
  const Mat I = cumulative_integral(f, h);
  for (int i = 0; i <= M; ++i) {
    const double t = i * h;
    CHECK(I(0, i) == Approx(t - t * t + 0.125 * t * t * t * t).epsilon(1e-12));
  }
}

TEST_CASE("straightening Jacobian matches finite differences") {
  auto chart = chart_for(coupled_model(0.3));
  const auto phi = straighten(*chart, vec({0, 0}));
  const Vec s = vec({0.01, -0.02, 0.05, -0.04});
  const Mat J = phi.jacobian(s);
  const double h = 1e-6;
  for (int j = 0; j < 4; ++j) {
    Vec a = s, b = s;
    a(j) += h;
    b(j) -= h;
    const Vec col = (phi.forward(a) - phi.forward(b)) / (2 * h);
    CHECK((col - J.col(j)).norm() < 1e-8);
  }
}

TEST_CASE("zero perturbation converges in one step") {
  auto chart = chart_for(ModelSpec::linear(Dims{1, 1}, 1.0));
  StraightenedSystem sys(*chart, vec({0.1, 0.0}));
  const double calT = 4.0;
  auto sol = shilnikov_iterate(sys, vec({0.1, 0.0}), vec({0.1}), vec({-0.08}), calT);
  CHECK(sol.iterations == 1);
  double err = 0.0;
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const double tau = sol.tau[i];
    err = std::max(err, std::abs(sol.u(0, (Eigen::Index)i) - 0.1 * std::exp(-tau - calT)));
    err = std::max(err, std::abs(sol.v(0, (Eigen::Index)i) + 0.08 * std::exp(tau - calT)));
    err = std::max(err, (sol.w.col((Eigen::Index)i) - vec({0.1, 0.0})).norm());
  }
  CHECK(err < 1e-15);
}

TEST_CASE("time change for constant lambda") {
  for (double lam : {1.0, 2.0}) {
    auto chart = chart_for(ModelSpec::linear(Dims{1, 1}, lam));
    StraightenedSystem sys(*chart, vec({0, 0}));
    auto sol = shilnikov_iterate(sys, vec({0, 0}), vec({0.1}), vec({0.1}), 3.0);
    const auto t = time_reparametrization(sol, sys);
    double err = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) err = std::max(err, std::abs(t[i] - sol.tau[i] / lam));
    CHECK(err <= 1e-10 * 3.0);
  }
}

TEST_CASE("Picard boundary records on a coupled model") {
  const double calT = 5.0;
  std::vector<double> coef;
  for (double r : {0.1, 0.05, 0.025}) {
    auto chart = chart_for(coupled_model(0.5), r);
    StraightenedSystem sys(*chart, vec({0, 0}));
    auto sol = shilnikov_iterate(sys, vec({0, 0}), vec({r}), vec({-r}), calT);
    CHECK(sol.lipschitz <= 0.5);
    if (sol.lipschitz > 0)
      CHECK(sol.iterations <= std::ceil(std::log(1e-12 / sol.increments.front()) / std::log(sol.lipschitz)) + 2);
    const double um = sol.u_minus()(0);
    coef.push_back(std::abs(std::exp(2 * calT) * um - r) / (r * r));
    CHECK(std::abs(sol.u(0, (Eigen::Index)sol.mid_index()) - r * std::exp(-calT)) <= 2 * r * r * std::exp(-2 * calT));
  }
  for (double c : coef) CHECK(c < 5.0);
  CHECK(coef.front() > 0.0);
}

TEST_CASE("Picard and shooting backends agree") {
  auto chart = chart_for(coupled_model(0.5), 0.1, 6);
  StraightenedSystem sys(*chart, vec({0, 0}));
  const double calT = 4.0;
  auto sol = shilnikov_iterate(sys, vec({0, 0}), vec({0.08}), vec({-0.08}), calT, {1e-13, 0.005, 200});
  const auto& phi = sys.map();
  const Dims d = sys.dims();
  const Vec Ap = phi.inverse(sol.state(0));
  const Vec Am = phi.inverse(sol.state(sol.size() - 1));
  const Vec mid = phi.inverse(sol.state(sol.mid_index()));
  auto shot = solve_fixed_time(*chart, zpart(d, mid), qpart(d, Ap), ppart(d, Am), calT);
  CHECK((shot.A_plus - Ap).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((shot.A_minus - Am).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((shot.mid - mid).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("passage times with varying lambda") {
  ModelSpec spec;
  spec.dims = Dims{1, 1};
  spec.lambda = {{{0, 0}, 1.0}, {{1, 0}, 0.5}};
  spec.cubic = {{{2, 1}, 0.3}};
  auto chart = chart_for(spec);
  const Vec w0 = vec({0.2, 0.1});
  StraightenedSystem sys(*chart, w0);
  for (double calT : {3.0, 5.0}) {
    auto sol = shilnikov_iterate(sys, w0, vec({0.1}), vec({-0.1}), calT);
    const auto t = time_reparametrization(sol, sys);
    const double lam0 = 1.1;
    const double dev = std::abs(t.front() + calT / lam0);
    CHECK(dev <= 0.01 * calT * calT * std::exp(-2 * calT) * 10.0);
    CHECK(std::abs(t.back() - calT / lam0) <= 0.1 * calT * calT * std::exp(-2 * calT));
  }
}

TEST_CASE("diverging Picard iteration is reported") {
  auto chart = chart_for(coupled_model(40.0), 0.5, 3);
  StraightenedSystem sys(*chart, vec({0, 0}));
  CHECK_THROWS_AS(shilnikov_iterate(sys, vec({0, 0}), vec({0.5}), vec({-0.5}), 3.0), ContractionFailure);
}
