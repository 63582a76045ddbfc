#include <doctest.h>

#include <cmath>
#include <random>

#include "shilnikov/jet.hpp"

using namespace shilnikov;

TEST_CASE("jet space enumerates graded monomials") {
  auto sp = JetSpace::get(3, 4);
  CHECK(sp->size() == 35);
  CHECK(sp->begin_degree(2) == 4);
  CHECK(sp->end_degree(2) == 10);
  for (int i = 0; i < sp->size(); ++i) CHECK(sp->index(sp->exponent(i)) == i);
  CHECK(JetSpace::get(3, 4) == sp);
}

TEST_CASE("products truncate at the space degree") {
  auto sp = JetSpace::get(2, 3);
  Jet x = Jet::variable(sp, 0, 0.0), y = Jet::variable(sp, 1, 0.0);
  Jet p = (1.0 + x) * (1.0 + x) * (1.0 + y) * x;
  CHECK(p.coeff({1, 0}) == doctest::Approx(1.0));
  CHECK(p.coeff({2, 0}) == doctest::Approx(2.0));
  CHECK(p.coeff({3, 0}) == doctest::Approx(1.0));
  CHECK(p.coeff({2, 1}) == doctest::Approx(2.0));
  CHECK(p.coeff({1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("elementary functions match their Taylor series") {
  auto sp = JetSpace::get(1, 6);
  Jet x = Jet::variable(sp, 0, 0.7);
  Jet e = exp(x), l = log(x), s = sqrt(x), inv = 1.0 / x;
  double f = 1.0;
  for (int j = 0; j <= 6; ++j) {
    if (j) f *= j;
    CHECK(e[j] == doctest::Approx(std::exp(0.7) / f));
  }
  CHECK(l[3] == doctest::Approx(1.0 / (3 * std::pow(0.7, 3))));
  CHECK(s[2] == doctest::Approx(-0.125 * std::pow(0.7, -1.5)));
  CHECK(inv[4] == doctest::Approx(std::pow(0.7, -5)));
  Jet round = exp(log(x));
  for (int j = 0; j <= 6; ++j) CHECK(round[j] == doctest::Approx(x[j]).epsilon(1e-12));
}

TEST_CASE("derivative, compose and evaluate agree") {
  auto sp = JetSpace::get(2, 5);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  Jet P(sp, 0.0);
  for (int i = 0; i < sp->size(); ++i) P[i] = U(rng);
  const double pt[2] = {0.3, -0.2};
  Jet a = Jet::variable(sp, 0, 0.0) * 0.0 + pt[0];
  Jet b = Jet::variable(sp, 1, 0.0) * 0.0 + pt[1];
  CHECK(compose(P, {a, b}).value() == doctest::Approx(P.evaluate(pt)));
  // shift: P(u + 0.3, v - 0.2) has constant term P(0.3, -0.2) and gradient dP
  Jet u = Jet::variable(sp, 0, pt[0]), v = Jet::variable(sp, 1, pt[1]);
  Jet Q = compose(P, {u, v});
  CHECK(Q.value() == doctest::Approx(P.evaluate(pt)));
  CHECK(Q[1] == doctest::Approx(P.derivative(0).evaluate(pt)));
  CHECK(Q[2] == doctest::Approx(P.derivative(1).evaluate(pt)));
}

TEST_CASE("constant jets combine with spaced jets") {
  auto sp = JetSpace::get(2, 2);
  Jet c = 2.0;
  Jet x = Jet::variable(sp, 0, 1.0);
  Jet r = c * x + c;
  CHECK(r.value() == doctest::Approx(4.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(!r.is_constant_only());
}
