#include "shilnikov/genfun.hpp"

#include <cmath>

#include "shilnikov/errors.hpp"

namespace shilnikov {

std::string to_string(GenFunKind kind) {
  switch (kind) {
    case GenFunKind::S_plus: return "S_plus";
    case GenFunKind::S_minus: return "S_minus";
    case GenFunKind::L: return "L";
    case GenFunKind::L_T: return "L_T";
    case GenFunKind::R_mu: return "R_mu";
    case GenFunKind::F: return "F";
    case GenFunKind::F_mu: return "F_mu";
    case GenFunKind::S: return "S";
  }
  return "unknown";
}

GenFunRecord::GenFunRecord(GenFunKind kind, std::vector<std::string> labels, Evaluator eval)
    : kind_(kind), labels_(std::move(labels)), eval_(std::move(eval)) {}

GenFunValue GenFunRecord::evaluate(const Vec& X) const {
  if (X.size() != arity()) throw SpecError(to_string(kind_) + ": argument has wrong size");
  return eval_(X);
}

Vec GenFunRecord::gradient(const Vec& X, double h) const {
  const int n = arity();
  Vec g(n);
  Vec t = X;
  auto diff = [&](int i, double step) {
    t[i] = X[i] + step;
    const double fp = evaluate(t).value;
    t[i] = X[i] - step;
    const double fm = evaluate(t).value;
    t[i] = X[i];
    return (fp - fm) / (2.0 * step);
  };
  for (int i = 0; i < n; ++i) {
    const double d1 = diff(i, h);
    const double d2 = diff(i, 0.5 * h);
    g[i] = (4.0 * d2 - d1) / 3.0;
  }
  return g;
}

Mat GenFunRecord::hessian(const Vec& X, double h, bool symmetrize) const {
  const int n = arity();
  Mat H(n, n);
  Vec t = X;
  for (int j = 0; j < n; ++j) {
    t[j] = X[j] + h;
    const Vec cp = evaluate(t).conjugate;
    t[j] = X[j] - h;
    const Vec cm = evaluate(t).conjugate;
    t[j] = X[j];
    H.col(j) = (cp - cm) / (2.0 * h);
  }
  if (symmetrize) H = 0.5 * (H + H.transpose()).eval();
  return H;
}

Mat GenFunRecord::value_hessian(const Vec& X, double h) const {
  const int n = arity();
  Mat H(n, n);
  const double f0 = evaluate(X).value;
  Vec t = X;
  for (int i = 0; i < n; ++i) {
    t[i] = X[i] + h;
    const double fp = evaluate(t).value;
    t[i] = X[i] - h;
    const double fm = evaluate(t).value;
    t[i] = X[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          t[i] = X[i] + si * h;
          t[j] = X[j] + sj * h;
          acc += si * sj * evaluate(t).value;
        }
      }
      t[i] = X[i];
      t[j] = X[j];
      H(i, j) = H(j, i) = acc / (4.0 * h * h);
    }
  }
  return H;
}

void GenFunRecord::set_base(const Vec& X0) { offset_ = evaluate(X0).value; }

namespace {

IntegratorOptions tail_options(const GenFunOptions& o) {
  IntegratorOptions io;
  io.rtol = o.rtol;
  io.atol = o.atol;
  io.dense = false;
  return io;
}

struct TailSolve {
  Vec z0;     // base point on M
  Vec end;    // point near M on the fiber
  Vec state;  // point at the far end of the tail
  double action = 0.0;  // integral of alpha from the far end towards M (W+) or from M (W-)
  double tail_bound = 0.0;
  double t_cut = 0.0;
};

// Fiber of W+(z0) (stable = true) or W-(z0) through a state whose (x, q) (resp. (y, p)) equals target.
// Unknowns: the free half of z0 and the straightened fiber coordinate near M.
TailSolve solve_tail(const ManifoldChart& chart, const Vec& fixed_half, const Vec& target_half,
                     const Vec& target_fiber, bool stable, const GenFunOptions& opts) {
  const HamiltonianSystem& sys = chart.system();
  const Dims& d = chart.dims();
  const int m = d.m, k = d.k;
  Vec z_init(d.manifold());
  if (stable)
    z_init << target_half, fixed_half;  // (x+, y0)
  else
    z_init << fixed_half, target_half;  // (x0, y-)
  if (!chart.in_domain(z_init)) throw ChartOverflow("generating function query outside the chart box");
  if (target_fiber.norm() > chart.r() * (1 + 1e-12)) throw ChartOverflow("fiber argument exceeds the chart radius");
  const auto graphs = chart.graphs(z_init);
  const StraighteningMap phi(graphs);
  const double lambda = graphs->lambda_at(z_init);
  const double tc = opts.t_cut_factor / lambda;
  const double t = stable ? -tc : tc;
  const auto io = tail_options(opts);

  Vec free_half = target_half;
  Vec fib = target_fiber * std::exp(-lambda * tc);
  const int free_off = stable ? d.x0() : d.y0();
  const int fib_off = stable ? d.q0() : d.p0();
  auto end_point = [&](const Vec& fh, const Vec& fb) {
    Vec z(d.manifold());
    if (stable)
      z << fh, fixed_half;
    else
      z << fixed_half, fh;
    const Vec zero = Vec::Zero(k);
    return phi.inverse(stable ? assemble(d, z, fb, zero) : assemble(d, z, zero, fb));
  };

  Vec e, s;
  double res = kInf;
  for (int it = 0; it <= opts.max_iter; ++it) {
    e = end_point(free_half, fib);
    const Mat Jinv = phi.jacobian(e).inverse();
    Mat De(d.phase(), m + k);
    De.leftCols(m) = Jinv.middleCols(free_off, m);
    De.rightCols(k) = Jinv.middleCols(fib_off, k);
    const auto vf = flow_variational(sys, e, t, io);
    s = vf.state;
    Vec F(m + k);
    F << s.segment(free_off, m) - target_half, s.segment(fib_off, k) - target_fiber;
    res = F.lpNorm<Eigen::Infinity>();
    if (res <= opts.tol) break;
    if (it == opts.max_iter) break;
    Mat J(m + k, m + k);
    J.topRows(m) = vf.stm.middleRows(free_off, m) * De;
    J.bottomRows(k) = vf.stm.middleRows(fib_off, k) * De;
    const Vec dX = -J.fullPivLu().solve(F);
    free_half += dX.head(m);
    fib += dX.tail(k);
  }
  if (!(res <= opts.tol)) throw InnerNewtonFailure("asymptotic tail did not match the boundary data");

  TailSolve out;
  out.z0.resize(d.manifold());
  if (stable)
    out.z0 << free_half, fixed_half;
  else
    out.z0 << fixed_half, free_half;
  out.end = e;
  const auto af = flow_action(sys, e, t, io);
  out.state = af.state;
  out.action = stable ? -af.action : af.action;
  const double u2 = fib.squaredNorm();
  out.tail_bound = (1.0 + out.z0.norm()) * u2;
  out.t_cut = tc;
  return out;
}

Vec slice(const Vec& v, int off, int n) { return v.segment(off, n); }

}  // namespace

GenFunValue genfun_S_plus(const ManifoldChart& chart, const Vec& x_plus, const Vec& y0, const Vec& q_plus,
                          const GenFunOptions& opts) {
  const Dims& d = chart.dims();
  if (x_plus.size() != d.m || y0.size() != d.m || q_plus.size() != d.k)
    throw SpecError("S_plus arguments have wrong sizes");
  const TailSolve t = solve_tail(chart, y0, x_plus, q_plus, true, opts);
  const Vec x0 = xpart(d, on_manifold(d, t.z0));
  GenFunValue out;
  out.value = y0.dot(x0) - t.action;
  out.conjugate.resize(2 * d.m + d.k);
  out.conjugate << ypart(d, t.state), x0, ppart(d, t.state);
  out.aux.resize(2);
  out.aux << t.tail_bound, t.t_cut;
  return out;
}

GenFunValue genfun_S_minus(const ManifoldChart& chart, const Vec& x0, const Vec& y_minus, const Vec& p_minus,
                           const GenFunOptions& opts) {
  const Dims& d = chart.dims();
  if (x0.size() != d.m || y_minus.size() != d.m || p_minus.size() != d.k)
    throw SpecError("S_minus arguments have wrong sizes");
  const TailSolve t = solve_tail(chart, x0, y_minus, p_minus, false, opts);
  const Vec xm = xpart(d, t.state), qm = qpart(d, t.state);
  GenFunValue out;
  out.value = y_minus.dot(xm) + p_minus.dot(qm) - t.action;
  out.conjugate.resize(2 * d.m + d.k);
  out.conjugate << slice(t.z0, d.m, d.m), xm, qm;
  out.aux.resize(2);
  out.aux << t.tail_bound, t.t_cut;
  return out;
}

namespace {

struct ZParts {
  Vec x_plus, y_minus, q_plus, p_minus;
};

ZParts split_Z(const Dims& d, const Vec& Z) {
  if (Z.size() != 2 * d.m + 2 * d.k) throw SpecError("Z = (x+, y-, q+, p-) has wrong size");
  return {Z.segment(0, d.m), Z.segment(d.m, d.m), Z.segment(2 * d.m, d.k), Z.segment(2 * d.m + d.k, d.k)};
}

GenFunValue connection_record(const ManifoldChart& chart, const ConnectionSolution& sol, bool add_energy_term,
                              const GenFunOptions& opts) {
  const Dims& d = chart.dims();
  const double A = connection_action(chart.system(), sol, opts.bvp.rtol, opts.bvp.atol);
  const Vec& ap = sol.A_plus;
  const Vec& am = sol.A_minus;
  GenFunValue out;
  out.value = xpart(d, am).dot(ypart(d, am)) + qpart(d, am).dot(ppart(d, am)) - A;
  if (add_energy_term) out.value += 2.0 * sol.T * sol.mu;
  out.conjugate.resize(2 * d.m + 2 * d.k);
  out.conjugate << ypart(d, ap), xpart(d, am), ppart(d, ap), qpart(d, am);
  out.aux.resize(1 + d.manifold());
  out.aux << (add_energy_term ? sol.mu : sol.T), zpart(d, sol.mid);
  return out;
}

}  // namespace

GenFunValue genfun_L(const ManifoldChart& chart, const Vec& Z, const GenFunOptions& opts) {
  const Dims& d = chart.dims();
  const ZParts z = split_Z(d, Z);
  Vec x0 = z.x_plus, y0 = z.y_minus;
  GenFunValue sp, sm;
  double change = kInf;
  for (int it = 0; it < opts.max_iter; ++it) {
    sp = genfun_S_plus(chart, z.x_plus, y0, z.q_plus, opts);
    sm = genfun_S_minus(chart, x0, z.y_minus, z.p_minus, opts);
    const Vec xn = sp.conjugate.segment(d.m, d.m);
    const Vec yn = sm.conjugate.segment(0, d.m);
    change = (xn - x0).lpNorm<Eigen::Infinity>() + (yn - y0).lpNorm<Eigen::Infinity>();
    x0 = xn;
    y0 = yn;
    if (change <= 1e-14 * (1.0 + x0.norm() + y0.norm())) break;
  }
  if (change > 1e-10) throw InnerNewtonFailure("reflection point iteration did not converge");
  sp = genfun_S_plus(chart, z.x_plus, y0, z.q_plus, opts);
  sm = genfun_S_minus(chart, x0, z.y_minus, z.p_minus, opts);
  GenFunValue out;
  out.value = sp.value + sm.value - x0.dot(y0);
  out.conjugate.resize(Z.size());
  out.conjugate << sp.conjugate.segment(0, d.m), sm.conjugate.segment(d.m, d.m), sp.conjugate.tail(d.k),
      sm.conjugate.tail(d.k);
  out.aux.resize(d.manifold());
  out.aux << x0, y0;
  return out;
}

GenFunValue genfun_L_T(const ManifoldChart& chart, const Vec& Z, double T, const GenFunOptions& opts) {
  const ZParts z = split_Z(chart.dims(), Z);
  const auto sol = solve_endpoint_fixed_time(chart, z.x_plus, z.y_minus, z.q_plus, z.p_minus, T, opts.bvp);
  return connection_record(chart, sol, true, opts);
}

GenFunValue genfun_R_mu(const ManifoldChart& chart, const Vec& Z, double mu, const GenFunOptions& opts) {
  const ZParts z = split_Z(chart.dims(), Z);
  const auto sol = solve_endpoint_fixed_energy(chart, z.x_plus, z.y_minus, z.q_plus, z.p_minus, mu, opts.bvp);
  return connection_record(chart, sol, false, opts);
}

double R_mu_leading(const ManifoldChart& chart, const Vec& Z, double mu, double L_value, const Vec& zeta) {
  const ZParts z = split_Z(chart.dims(), Z);
  return L_value - mu * std::log(std::abs(z.q_plus.dot(z.p_minus))) / chart.lambda(zeta);
}

Vec R_mu_twist(const Vec& q_plus, const Vec& p_minus, double lambda, double mu) {
  return -mu * p_minus / (lambda * q_plus.dot(p_minus));
}

namespace {

std::vector<std::string> labels(const Dims&, std::initializer_list<std::pair<const char*, int>> parts) {
  std::vector<std::string> out;
  for (const auto& [name, n] : parts)
    for (int i = 0; i < n; ++i) out.push_back(std::string(name) + std::to_string(i));
  return out;
}

}  // namespace

GenFunRecord make_S_plus(ChartPtr chart, GenFunOptions opts) {
  const Dims d = chart->dims();
  return GenFunRecord(GenFunKind::S_plus, labels(d, {{"x+", d.m}, {"y0", d.m}, {"q+", d.k}}),
                      [chart, opts, d](const Vec& X) {
                        return genfun_S_plus(*chart, X.segment(0, d.m), X.segment(d.m, d.m), X.tail(d.k), opts);
                      });
}

GenFunRecord make_S_minus(ChartPtr chart, GenFunOptions opts) {
  const Dims d = chart->dims();
  return GenFunRecord(GenFunKind::S_minus, labels(d, {{"x0", d.m}, {"y-", d.m}, {"p-", d.k}}),
                      [chart, opts, d](const Vec& X) {
                        return genfun_S_minus(*chart, X.segment(0, d.m), X.segment(d.m, d.m), X.tail(d.k), opts);
                      });
}

GenFunRecord make_L(ChartPtr chart, GenFunOptions opts) {
  const Dims d = chart->dims();
  return GenFunRecord(GenFunKind::L, labels(d, {{"x+", d.m}, {"y-", d.m}, {"q+", d.k}, {"p-", d.k}}),
                      [chart, opts](const Vec& Z) { return genfun_L(*chart, Z, opts); });
}

GenFunRecord make_L_T(ChartPtr chart, double T, GenFunOptions opts) {
  const Dims d = chart->dims();
  return GenFunRecord(GenFunKind::L_T, labels(d, {{"x+", d.m}, {"y-", d.m}, {"q+", d.k}, {"p-", d.k}}),
                      [chart, opts, T](const Vec& Z) { return genfun_L_T(*chart, Z, T, opts); });
}

GenFunRecord make_R_mu(ChartPtr chart, double mu, GenFunOptions opts) {
  const Dims d = chart->dims();
  return GenFunRecord(GenFunKind::R_mu, labels(d, {{"x+", d.m}, {"y-", d.m}, {"q+", d.k}, {"p-", d.k}}),
                      [chart, opts, mu](const Vec& Z) { return genfun_R_mu(*chart, Z, mu, opts); });
}

double connection_action(const HamiltonianSystem& sys, const ConnectionSolution& sol, double rtol, double atol) {
  IntegratorOptions io;
  io.rtol = rtol;
  io.atol = atol;
  io.dense = false;
  const double h = 0.5 * sol.T;
  const double a1 = flow_action(sys, sol.s_a, -h, io).action;
  const double a2 = flow_action(sys, sol.s_a, 2.0 * h, io).action;
  const double a3 = flow_action(sys, sol.s_b, h, io).action;
  return -a1 + a2 + a3;
}

}  // namespace shilnikov
