#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shilnikov/bvp.hpp"

namespace shilnikov {

enum class GenFunKind { S_plus, S_minus, L, L_T, R_mu, F, F_mu, S };

std::string to_string(GenFunKind kind);

// One evaluation: the value and the conjugate coordinates read off the
// underlying orbit, ordered like the arguments.
struct GenFunValue {
  double value = 0.0;
  Vec conjugate;
  Vec aux;  // kind specific extras (base points, times)
};

class GenFunRecord {
 public:
  using Evaluator = std::function<GenFunValue(const Vec&)>;

  GenFunRecord(GenFunKind kind, std::vector<std::string> labels, Evaluator eval);

  GenFunKind kind() const { return kind_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int arity() const { return static_cast<int>(labels_.size()); }

  GenFunValue evaluate(const Vec& X) const;
  double value(const Vec& X) const { return evaluate(X).value - offset_; }

  // Central differences over re-solves, one Richardson step.
  Vec gradient(const Vec& X, double h = 1e-4) const;
  // Central differences of the conjugate coordinates, symmetrized on request.
  Mat hessian(const Vec& X, double h = 1e-5, bool symmetrize = false) const;
  // Second differences of values only.
  Mat value_hessian(const Vec& X, double h = 1e-3) const;

  // Fix the additive constant by declaring the value at X0 to be zero.
  void set_base(const Vec& X0);
  double offset() const { return offset_; }

 private:
  GenFunKind kind_;
  std::vector<std::string> labels_;
  Evaluator eval_;
  double offset_ = 0.0;
};

struct GenFunOptions {
  double tol = 1e-12;         // Newton tolerance on boundary data
  double t_cut_factor = 12.0;  // tails integrated for t_cut_factor / lambda
  double rtol = 1e-13;
  double atol = 1e-16;
  int max_iter = 30;
  BvpOptions bvp;
};

// Along the asymptotic orbit of W+(z0), z0 = (x0, y0), through (x+, ., q+, .):
//   S+ = <y0, x0> - int alpha,  dS+ = y+ dx+ + x0 dy0 + p+ dq+.
// Arguments (x+, y0, q+); conjugate (y+, x0, p+); aux = (tail bound, t_cut).
GenFunValue genfun_S_plus(const ManifoldChart& chart, const Vec& x_plus, const Vec& y0, const Vec& q_plus,
                          const GenFunOptions& opts = {});
// Along the asymptotic orbit of W-(z0) ending at (., y-, ., p-):
//   S- = <y-, x-> + <p-, q-> - int alpha,  dS- = y0 dx0 + x- dy- + q- dp-.
// Arguments (x0, y-, p-); conjugate (y0, x-, q-).
GenFunValue genfun_S_minus(const ManifoldChart& chart, const Vec& x0, const Vec& y_minus, const Vec& p_minus,
                           const GenFunOptions& opts = {});

// Critical value over z0 of S+(x+, y0, q+) + S-(x0, y-, p-) - <x0, y0>.
// Arguments Z = (x+, y-, q+, p-); conjugate (y+, x-, p+, q-); aux = zeta(Z).
GenFunValue genfun_L(const ManifoldChart& chart, const Vec& Z, const GenFunOptions& opts = {});

// From the fixed-time solution with x(-T) = x+, y(T) = y-, q(-T) = q+, p(T) = p-:
//   L_T = <x-, y-> + <q-, p-> - int alpha + 2 T H.  aux = (H, z(0)).
GenFunValue genfun_L_T(const ManifoldChart& chart, const Vec& Z, double T, const GenFunOptions& opts = {});

// From the fixed-energy solution with the same boundary data:
//   R_mu = <x-, y-> + <q-, p-> - int alpha.  aux = (T, z(0)).
GenFunValue genfun_R_mu(const ManifoldChart& chart, const Vec& Z, double mu, const GenFunOptions& opts = {});

// Leading-order form L(Z) - mu ln|<q+, p->| / lambda(zeta).
double R_mu_leading(const ManifoldChart& chart, const Vec& Z, double mu, double L_value, const Vec& zeta);

// Twist term -mu p- / (lambda <q+, p->) of dR_mu/dq+.
Vec R_mu_twist(const Vec& q_plus, const Vec& p_minus, double lambda, double mu);

// Records wrapping the evaluators above.
GenFunRecord make_S_plus(ChartPtr chart, GenFunOptions opts = {});
GenFunRecord make_S_minus(ChartPtr chart, GenFunOptions opts = {});
GenFunRecord make_L(ChartPtr chart, GenFunOptions opts = {});
GenFunRecord make_L_T(ChartPtr chart, double T, GenFunOptions opts = {});
GenFunRecord make_R_mu(ChartPtr chart, double mu, GenFunOptions opts = {});

// Integral of <y, dx> + <p, dq> along the connection over [-T, T].
double connection_action(const HamiltonianSystem& sys, const ConnectionSolution& sol, double rtol = 1e-13,
                         double atol = 1e-17);

}  // namespace shilnikov
