#include <doctest.h>

#include <cmath>
#include <random>

#include "shilnikov/three_body.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

Vec state(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ModelSpec cubic_model(double c) {
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic.push_back({{2, 1}, c});
  return spec;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& s, double h) {
  const Vec f0 = F(s);
  Mat J(f0.size(), s.size());
  for (int i = 0; i < s.size(); ++i) {
    Vec a = s, b = s;
    a[i] += h;
    b[i] -= h;
    J.col(i) = (F(a) - F(b)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("linear model vector field") {
  auto sys = build_model(ModelSpec::linear(Dims{1, 1}, 1.0));
  const Vec v = sys->vector_field(state({0, 0, 0.1, 0.2}));
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == Approx(-0.1));
  CHECK(v[3] == Approx(0.2));
  CHECK(sys->vector_field(state({0.4, -0.3, 0, 0})).norm() == 0.0);
}

TEST_CASE("cubic perturbed model field and energy") {
  auto sys = build_model(cubic_model(0.5));
  const Vec s = state({0, 0, 0.1, 0.1});
  const Vec v = sys->vector_field(s);
  CHECK(v[2] == Approx(-0.095));
  CHECK(v[3] == Approx(0.09));
  const Vec g = central_difference_gradient(*sys, s, 1e-6);
  CHECK((g - sys->gradient(s)).norm() < 1e-9);
  CHECK(build_model(cubic_model(0.3))->energy(s) == Approx(-0.0097));
}

TEST_CASE("model rejects perturbations that move the invariant planes") {
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic.push_back({{3, 0}, 1.0});
  CHECK_THROWS_AS(build_model(spec), SpecError);
  spec.cubic = {{{0, 3}, 1.0}};
  CHECK_THROWS_AS(build_model(spec), SpecError);
}

TEST_CASE("model with varying lambda") {
  ModelSpec spec;
  spec.dims = Dims{1, 1};
  spec.lambda = {{{0, 0}, 1.0}, {{2, 0}, 1.0}};
  auto sys = build_model(spec);
  CHECK(sys->lambda_at(state({1.0, 0.0})) == Approx(2.0));
  const Vec v = sys->vector_field(state({1.0, 0.0, 0.1, 0.0}));
  CHECK(v[2] == Approx(-0.2));
}

TEST_CASE("Levi-Civita forward map") {
  ThreeBodyParams P;
  auto r = levi_civita_forward(1.0, 0.0, 1.0, 0.0, P);
  CHECK(r.q1.real() == Approx(0.5));
  CHECK(r.q2.real() == Approx(1.5));
  CHECK(std::abs(r.p1) == 0.0);
  CHECK(std::abs(r.p2) == 0.0);

  P.alpha1 = 0.3;
  P.alpha2 = 0.7;
  const std::complex<double> I(0, 1);
  r = levi_civita_forward(0.0, 0.0, I, 2.0, P);
  CHECK(std::abs(r.q1 - 0.7) < 1e-15);
  CHECK(std::abs(r.q2 + 0.3) < 1e-15);
  // -eta / (2 conj(xi)) = -2 / (-2i) = -i
  CHECK(std::abs(r.p1 + I) < 1e-15);
  CHECK(std::abs(r.p2 - I) < 1e-15);

  CHECK_THROWS_AS(levi_civita_forward(1.0, 0.0, 0.0, 1.0, P), DomainError);
}

TEST_CASE("Levi-Civita double cover") {
  ThreeBodyParams P{0.3, 0.7, 0.0, -0.5};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int n = 0; n < 50; ++n) {
    const std::complex<double> x(U(rng), U(rng)), y(U(rng), U(rng)), xi(U(rng), U(rng)), eta(U(rng), U(rng));
    const auto a = levi_civita_forward(x, y, xi, eta, P);
    const auto b = levi_civita_forward(x, y, -xi, -eta, P);
    CHECK(a.q1 == b.q1);
    CHECK(a.q2 == b.q2);
    CHECK(a.p1 == b.p1);
    CHECK(a.p2 == b.p2);
  }
}

TEST_CASE("regularized Hamiltonian on the collision manifold") {
  ThreeBodyParams P;
  ThreeBodySystem sys(P);
  CHECK(sys.energy(state({1, 0.2, 0.1, -0.3, 0, 0, 0, 0})) == 0.0);
  P.mu = 1e-3;
  CHECK(regularized_hamiltonian(state({1, 0.2, 0.1, -0.3, 0, 0, 0, 0}), P) == Approx(2.5e-4));
  CHECK_THROWS_AS(sys.energy(state({0, 0, 0, 0, 0, 0, 1, 0})), DomainError);
}

TEST_CASE("pullback identity") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (double mu : {0.0, 1e-3, 0.05}) {
    ThreeBodyParams P{0.35, 0.65, mu, -0.4};
    ThreeBodySystem reg(P);
    KeplerPairSystem kep(P);
    for (int n = 0; n < 40; ++n) {
      Vec s(8);
      for (int i = 0; i < 8; ++i) s[i] = U(rng);
      s[0] += 2.0;
      const double xi2 = s[4] * s[4] + s[5] * s[5];
      const double lhs = xi2 * (kep.energy(levi_civita_state(s, P)) - P.E);
      // the written form carries +mu a1 a2 where the pullback gives -mu a1 a2
      const double rhs = reg.energy(s) - 2 * mu * P.alpha1 * P.alpha2;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  ThreeBodyParams P{0.4, 0.6, 0.01, -0.2};
  ThreeBodySystem reg(P);
  KeplerPairSystem kep(P);
  AdaptedThreeBodySystem ad(P);
  for (int n = 0; n < 20; ++n) {
    Vec s(8);
    for (int i = 0; i < 8; ++i) s[i] = U(rng);
    s[0] += 1.0;
    s.segment(4, 4) *= 0.3;
    for (const HamiltonianSystem* sys : {static_cast<const HamiltonianSystem*>(&reg),
                                         static_cast<const HamiltonianSystem*>(&kep),
                                         static_cast<const HamiltonianSystem*>(&ad)}) {
      const Vec g = sys->gradient(s);
      const Vec gfd = central_difference_gradient(*sys, s, 1e-6);
      CHECK((g - gfd).norm() <= 1e-6 * std::max(1.0, g.norm()));
    }
    const Jet t = reg.taylor(s, 1);
    const Vec ga = reg.gradient(s);
    for (int i = 0; i < 8; ++i) CHECK(t[1 + i] == Approx(ga[i]).epsilon(1e-12));
  }
}

TEST_CASE("three body eigenvalue formula") {
  ThreeBodyParams P;
  CHECK(three_body_lambda(P, state({1, 0, 0, 0})) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(three_body_lambda(P, state({1, 0, 2, 0})), NotHyperbolic);
}

TEST_CASE("adapted three body chart") {
  ThreeBodyParams P{0.4, 0.6, 0.0, -0.3};
  AdaptedThreeBodySystem ad(P);
  const Vec z = state({0.8, 0.3, 0.2, -0.1});
  const double lam = three_body_lambda(P, z);
  const Mat Hs = ad.hessian(state({0.8, 0.3, 0.2, -0.1, 0, 0, 0, 0}));
  CHECK(Hs.topLeftCorner(4, 4).norm() < 1e-12);
  CHECK(Hs.block(4, 4, 2, 2).norm() < 1e-12);
  CHECK(Hs.block(6, 6, 2, 2).norm() < 1e-12);
  CHECK((Hs.block(4, 6, 2, 2) + lam * Mat::Identity(2, 2)).norm() < 1e-10);

  const Vec s = state({0.8, 0.3, 0.2, -0.1, 0.05, -0.03, 0.02, 0.04});
  const Vec r = ad.to_regularized(s);
  CHECK((ad.from_regularized(r) - s).norm() < 1e-14);
  CHECK(ad.energy(s) == Approx(ad.regularized().energy(r)));
  const Mat M = fd_jacobian([&](const Vec& v) { return ad.to_regularized(v); }, s, 1e-5);
  CHECK(symplecticity_defect(M, omega_matrix(Dims{2, 2})) < 1e-8);
}
