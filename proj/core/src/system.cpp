#include "shilnikov/system.hpp"

#include <cmath>

namespace shilnikov {

HamiltonianSystem::HamiltonianSystem(Dims dims, std::string label)
    : dims_(dims), label_(std::move(label)) {
  if (dims_.m < 1 || dims_.k < 1) throw SpecError("dims must satisfy m >= 1, k >= 1");
}

Jet HamiltonianSystem::energy_jet(const std::vector<Jet>&) const {
  throw SpecError("system '" + label_ + "' has no jet evaluation");
}

Vec central_difference_gradient(const HamiltonianSystem& sys, const Vec& s, double h) {
  Vec g(s.size());
  Vec t = s;
  for (int i = 0; i < s.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(s[i]));
    t[i] = s[i] + step;
    const double fp = sys.energy(t);
    t[i] = s[i] - step;
    const double fm = sys.energy(t);
    t[i] = s[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Vec HamiltonianSystem::gradient(const Vec& s) const {
  if (has_jets()) return gradient_from_jets(s);
  return central_difference_gradient(*this, s, fd_step_);
}

Vec HamiltonianSystem::gradient_from_jets(const Vec& s) const {
  const Jet t = taylor(s, 1);
  Vec g(s.size());
  for (int i = 0; i < s.size(); ++i) g[i] = t[1 + i];
  return g;
}

Mat HamiltonianSystem::hessian(const Vec& s) const {
  const int n = static_cast<int>(s.size());
  Mat Hs(n, n);
  if (has_jets()) {
    const Jet t = taylor(s, 2);
    const JetSpace& sp = t.space();
    std::vector<int> e(n, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        e[i] += 1;
        e[j] += 1;
        const double c = t[sp.index(e.data())];
        Hs(i, j) = Hs(j, i) = (i == j) ? 2.0 * c : c;
        e[i] -= 1;
        e[j] -= 1;
      }
    }
    return Hs;
  }
  Vec t = s;
  for (int i = 0; i < n; ++i) {
    const double step = 1e-5 * std::max(1.0, std::abs(s[i]));
    t[i] = s[i] + step;
    const Vec gp = gradient(t);
    t[i] = s[i] - step;
    const Vec gm = gradient(t);
    t[i] = s[i];
    Hs.col(i) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (Hs + Hs.transpose());
}

Vec HamiltonianSystem::vector_field(const Vec& s) const {
  const Vec g = gradient(s);
  const Dims& d = dims_;
  Vec v(d.phase());
  v.segment(d.x0(), d.m) = g.segment(d.y0(), d.m);
  v.segment(d.y0(), d.m) = -g.segment(d.x0(), d.m);
  v.segment(d.q0(), d.k) = g.segment(d.p0(), d.k);
  v.segment(d.p0(), d.k) = -g.segment(d.q0(), d.k);
  return v;
}

Mat HamiltonianSystem::jacobian(const Vec& s) const { return poisson_matrix(dims_) * hessian(s); }

Jet HamiltonianSystem::taylor(const Vec& s, int degree) const {
  auto sp = JetSpace::get(static_cast<int>(s.size()), degree);
  std::vector<Jet> vars;
  vars.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) vars.push_back(Jet::variable(sp, i, s[i]));
  Jet r = energy_jet(vars);
  if (r.is_constant_only()) r = Jet(sp, r.value());
  return r;
}

FunctionSystem::FunctionSystem(Dims dims, std::function<double(const Vec&)> H, std::string label)
    : HamiltonianSystem(dims, std::move(label)), H_(std::move(H)) {}

namespace {

template <class S>
S eval_terms(const std::vector<PolyTerm>& terms, const std::vector<S>& s) {
  S acc = 0.0;
  for (const auto& t : terms) {
    S m = t.coeff;
    for (size_t i = 0; i < t.exp.size(); ++i)
      for (int e = 0; e < t.exp[i]; ++e) m = m * s[i];
    acc += m;
  }
  return acc;
}

double eval_terms_vec(const std::vector<PolyTerm>& terms, const Vec& s) {
  double acc = 0.0;
  for (const auto& t : terms) {
    double m = t.coeff;
    for (size_t i = 0; i < t.exp.size(); ++i)
      if (t.exp[i]) m *= std::pow(s[i], t.exp[i]);
    acc += m;
  }
  return acc;
}

}  // namespace

double eval_poly(const std::vector<PolyTerm>& terms, const Vec& v) { return eval_terms_vec(terms, v); }

PolynomialSystem::PolynomialSystem(Dims dims, std::vector<PolyTerm> terms, std::string label)
    : HamiltonianSystem(dims, std::move(label)), terms_(std::move(terms)) {
  const int n = dims.phase();
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exp.size()) != n) throw SpecError("polynomial term has wrong arity");
    for (int e : t.exp)
      if (e < 0) throw SpecError("negative exponent in polynomial term");
  }
  grad_terms_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& t : terms_) {
      if (t.exp[i] == 0) continue;
      PolyTerm d = t;
      d.coeff *= t.exp[i];
      d.exp[i] -= 1;
      grad_terms_[i].push_back(d);
    }
  }
}

double PolynomialSystem::energy(const Vec& s) const { return eval_terms_vec(terms_, s); }

Vec PolynomialSystem::gradient(const Vec& s) const {
  Vec g(s.size());
  for (int i = 0; i < s.size(); ++i) g[i] = eval_terms_vec(grad_terms_[i], s);
  return g;
}

Jet PolynomialSystem::energy_jet(const std::vector<Jet>& s) const { return eval_terms(terms_, s); }

}  // namespace shilnikov
