#include "shilnikov/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "shilnikov/errors.hpp"

namespace shilnikov {

namespace {

IntegratorOptions integrator_options(const BvpOptions& o) {
  IntegratorOptions io;
  io.rtol = o.rtol;
  io.atol = o.atol;
  io.dense = false;
  return io;
}

struct Evaluation {
  Vec F;
  Mat J;
  Vec dT;  // dF/dT
  Vec A_plus, mid, end, A_minus;
  bool ok = false;
};

void select_rows(const std::vector<int>& idx, const Vec& s, const Vec& target, Vec& F, int& row) {
  for (std::size_t i = 0; i < idx.size(); ++i) F(row++) = s(idx[i]) - target(static_cast<Eigen::Index>(i));
}

void select_jac(const std::vector<int>& idx, const Mat& Phi, const Vec& X, double dtdT, Mat& J, Vec& dT, int col,
                int& row) {
  for (int i : idx) {
    J.block(row, col, 1, Phi.cols()) = Phi.row(i);
    dT(row) = dtdT * X(i);
    ++row;
  }
}

Evaluation evaluate(const HamiltonianSystem& sys, const ShootingBC& bc, double T, const Vec& sa, const Vec& sb,
                    const IntegratorOptions& io) {
  const int n = sys.dims().phase();
  Evaluation e;
  const auto seg1 = flow_variational(sys, sa, -0.5 * T, io);
  const auto seg2a = flow_variational(sys, sa, 0.5 * T, io);
  const auto seg2b = flow_variational(sys, seg2a.state, 0.5 * T, io);
  const auto seg3 = flow_variational(sys, sb, 0.5 * T, io);
  e.A_plus = seg1.state;
  e.mid = seg2a.state;
  e.end = seg2b.state;
  e.A_minus = seg3.state;

  e.F.resize(2 * n);
  e.J = Mat::Zero(2 * n, 2 * n);
  e.dT = Vec::Zero(2 * n);
  int row = 0;
  select_rows(bc.left_idx, e.A_plus, bc.left_val, e.F, row);
  e.F.segment(row, n) = e.end - sb;
  row += n;
  select_rows(bc.mid_idx, e.mid, bc.mid_val, e.F, row);
  select_rows(bc.right_idx, e.A_minus, bc.right_val, e.F, row);
  if (row != 2 * n) throw SpecError("boundary conditions do not match the phase dimension");

  row = 0;
  select_jac(bc.left_idx, seg1.stm, sys.vector_field(e.A_plus), -0.5, e.J, e.dT, 0, row);
  e.J.block(row, 0, n, n) = seg2b.stm * seg2a.stm;
  e.J.block(row, n, n, n) = -Mat::Identity(n, n);
  e.dT.segment(row, n) = sys.vector_field(e.end);
  row += n;
  select_jac(bc.mid_idx, seg2a.stm, sys.vector_field(e.mid), 0.5, e.J, e.dT, 0, row);
  select_jac(bc.right_idx, seg3.stm, sys.vector_field(e.A_minus), 0.5, e.J, e.dT, n, row);
  e.ok = e.F.allFinite() && e.J.allFinite();
  return e;
}

void check_tube(const ManifoldChart* chart, const Evaluation& e) {
  if (!chart) return;
  const Dims& d = chart->dims();
  const double lim = 3.0 * chart->r();
  for (const Vec* s : {&e.A_plus, &e.mid, &e.end, &e.A_minus}) {
    if (qpart(d, *s).norm() > lim || ppart(d, *s).norm() > lim || !chart->in_domain(zpart(d, *s)))
      throw ChartExit("shooting iterate left the chart tube");
  }
}

}  // namespace

void check_cone(const Vec& q_plus, const Vec& p_minus, double r, const ConeParams& cone, int energy_sign) {
  const double nq = q_plus.norm(), np = p_minus.norm();
  const double slack = 1e-12 * r;
  if (nq < cone.nu * r - slack || np < cone.nu * r - slack || nq > r + slack || np > r + slack)
    throw ConeViolation("|q+| and |p-| must lie in [nu r, r]");
  const double ip = q_plus.dot(p_minus);
  const double need = cone.kappa * r * r;
  if (energy_sign >= 0 ? ip > -need + slack * r : ip < need - slack * r)
    throw ConeViolation("<q+, p-> = " + std::to_string(ip) + " is outside the cone for this energy sign");
}

ConnectionSolution shoot(const HamiltonianSystem& sys, const ShootingBC& bc, double T, const Vec& s_a0,
                         const Vec& s_b0, const BvpOptions& opts, const ManifoldChart* chart) {
  const int n = sys.dims().phase();
  const auto io = integrator_options(opts);
  Vec X(2 * n);
  X << s_a0, s_b0;
  Evaluation e = evaluate(sys, bc, T, X.head(n), X.tail(n), io);
  if (!e.ok) throw NoConvergence("shooting residual is not finite at the initial guess", kInf);
  double res = e.F.lpNorm<Eigen::Infinity>();
  int it = 0;
  int polish = 0;
  while (true) {
    if (res <= opts.tol) {
      if (polish >= 1) break;
      ++polish;
    }
    if (it >= opts.max_iter) throw NoConvergence("multiple shooting did not converge", res);
    ++it;
    Eigen::FullPivLU<Mat> lu(e.J);
    if (!lu.isInvertible()) throw NoConvergence("singular shooting Jacobian", res);
    const Vec dX = -lu.solve(e.F);
    double alpha = 1.0;
    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries, alpha *= 0.5) {
      const Vec Xn = X + alpha * dX;
      Evaluation en;
      try {
        en = evaluate(sys, bc, T, Xn.head(n), Xn.tail(n), io);
      } catch (const StepFailure&) {
        continue;
      } catch (const DomainError&) {
        continue;
      }
      if (!en.ok) continue;
      const double rn = en.F.lpNorm<Eigen::Infinity>();
      if (rn < res || (polish > 0 && rn <= 2.0 * opts.tol) || (rn <= opts.tol)) {
        X = Xn;
        e = std::move(en);
        res = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (res <= opts.tol) break;
      throw NoConvergence("line search failed in multiple shooting", res);
    }
    check_tube(chart, e);
  }
  check_tube(chart, e);

  ConnectionSolution sol;
  sol.dims = sys.dims();
  sol.T = T;
  sol.s_a = X.head(n);
  sol.s_b = X.tail(n);
  sol.A_plus = e.A_plus;
  sol.A_minus = e.A_minus;
  sol.mid = e.mid;
  sol.mu = sys.energy(sol.mid);
  sol.residual = res;
  sol.iterations = it;
  Eigen::FullPivLU<Mat> lu(e.J);
  const Vec dX = -lu.solve(e.dT);
  sol.dH_dT = sys.gradient(sol.s_a).dot(dX.head(n));
  return sol;
}

ConnectionSolution shoot(const HamiltonianSystem& sys, const ShootingBC& bc, double T, const Vec& s_a0,
                         const Vec& s_b0, const BvpOptions& opts) {
  return shoot(sys, bc, T, s_a0, s_b0, opts, nullptr);
}

Vec ConnectionSolution::at(double t) const {
  if (pieces.size() != 3) throw SpecError("connection solution has no dense output");
  if (t <= -0.5 * T) return pieces[0].at(t);
  if (t <= 0.5 * T) return pieces[1].at(t);
  return pieces[2].at(t);
}

void ConnectionSolution::build_pieces(const HamiltonianSystem& sys, double tol) {
  auto io = IntegratorOptions::from_tol(std::max(tol, 1e-14));
  io.atol = std::min(io.atol, 1e-17);
  pieces.clear();
  pieces.push_back(integrate(sys, s_a, -0.5 * T, -T, io));
  pieces.push_back(integrate(sys, s_a, -0.5 * T, 0.5 * T, io));
  pieces.push_back(integrate(sys, s_b, 0.5 * T, T, io));
}

namespace {

std::vector<int> range(int start, int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + i;
  return v;
}

struct Guess {
  Vec sa, sb;
};

// gamma_+(t + T) + gamma_-(t - T) - (z, 0, 0) at t = -T/2 and T/2, with the tails taken on the local
// graphs and the fiber coordinates decaying at the linear rate.
Guess asymptotic_guess(const ManifoldChart& chart, const Vec& z, const Vec& q_plus, const Vec& p_minus, double T) {
  const Dims& d = chart.dims();
  const double lambda = chart.lambda(z);
  const Vec base = on_manifold(d, z);
  auto at = [&](double t) {
    return Vec(chart.stable_point(z, q_plus * std::exp(-lambda * (t + T))) +
               chart.unstable_point(z, p_minus * std::exp(lambda * (t - T))) - base);
  };
  return {at(-0.5 * T), at(0.5 * T)};
}

Guess linear_guess(const Dims& d, const Vec& z, const Vec& q_plus, const Vec& p_minus, double lambda, double T) {
  Guess g;
  g.sa = assemble(d, z, q_plus * std::exp(-0.5 * lambda * T), p_minus * std::exp(-1.5 * lambda * T));
  g.sb = assemble(d, z, q_plus * std::exp(-1.5 * lambda * T), p_minus * std::exp(-0.5 * lambda * T));
  return g;
}

ShootingBC midpoint_bc(const Dims& d, const Vec& z0, const Vec& q_plus, const Vec& p_minus) {
  ShootingBC bc;
  bc.left_idx = range(d.q0(), d.k);
  bc.left_val = q_plus;
  bc.mid_idx = range(0, d.manifold());
  bc.mid_val = z0;
  bc.right_idx = range(d.p0(), d.k);
  bc.right_val = p_minus;
  return bc;
}

ShootingBC endpoint_bc(const Dims& d, const Vec& x_plus, const Vec& y_minus, const Vec& q_plus,
                       const Vec& p_minus) {
  ShootingBC bc;
  bc.left_idx = range(d.x0(), d.m);
  for (int i : range(d.q0(), d.k)) bc.left_idx.push_back(i);
  bc.left_val.resize(d.m + d.k);
  bc.left_val << x_plus, q_plus;
  bc.right_idx = range(d.y0(), d.m);
  for (int i : range(d.p0(), d.k)) bc.right_idx.push_back(i);
  bc.right_val.resize(d.m + d.k);
  bc.right_val << y_minus, p_minus;
  return bc;
}

void finalize(ConnectionSolution& sol, const Vec& z0, const Vec& q_plus, const Vec& p_minus) {
  sol.z0 = z0;
  sol.q_plus = q_plus;
  sol.p_minus = p_minus;
}

// Outer Newton on g(T) = ln(H(T) / mu) with a bisection safeguard. solve(T, guess) returns the fixed-time solution.
ConnectionSolution energy_search(double mu, double T0, double lambda, const BvpOptions& opts,
                                 const std::function<ConnectionSolution(double, const Guess*)>& solve,
                                 const std::function<Guess(double)>& base_guess) {
  double lo = 0.0, hi = kInf;
  double T = std::max(T0, 1.0 / lambda);
  std::optional<ConnectionSolution> best;
  Guess shift;
  bool have_shift = false;
  double last_g = kNaN;
  for (int it = 0; it < 60; ++it) {
    ConnectionSolution sol;
    bool ok = false;
    for (int retry = 0; retry < 6 && !ok; ++retry) {
      try {
        Guess gs;
        const Guess* gp = nullptr;
        if (have_shift) {
          gs = base_guess(T);
          gs.sa += shift.sa;
          gs.sb += shift.sb;
          gp = &gs;
        }
        sol = solve(T, gp);
        ok = true;
      } catch (const NoConvergence&) {
        if (!best) throw;
        T = 0.5 * (T + best->T);
      } catch (const ChartExit&) {
        if (!best) throw;
        T = 0.5 * (T + best->T);
      }
    }
    if (!ok) throw NoConvergence("fixed energy search lost the inner solution", std::abs(last_g));
    const Guess b = base_guess(T);
    shift.sa = sol.s_a - b.sa;
    shift.sb = sol.s_b - b.sb;
    have_shift = true;

    const double ratio = sol.mu / mu;
    double g = ratio > 0.0 ? std::log(ratio) : kInf;
    last_g = g;
    if (g > 0.0) lo = std::max(lo, T); else hi = std::min(hi, T);
    best = sol;
    double Tn;
    const double dg = sol.dH_dT / sol.mu;
    if (std::isfinite(g) && std::isfinite(dg) && dg != 0.0)
      Tn = T - g / dg;
    else
      Tn = kNaN;
    if (std::isfinite(g) && std::abs(g) <= opts.tol) break;
    if (std::isfinite(Tn) && std::abs(Tn - T) <= 1e-14 * std::max(1.0, T)) break;
    if (!(Tn > lo && Tn < hi)) {
      if (std::isfinite(hi))
        Tn = 0.5 * (lo + hi);
      else
        Tn = T + 1.0 / lambda;
    }
    T = Tn;
    if (it == 59) throw NoConvergence("fixed energy Newton on T did not converge", std::abs(g));
  }
  return *best;
}

}  // namespace

double asymptotic_T(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus, const Vec& p_minus, double mu,
                    const ConeParams& cone, bool enforce_cone) {
  if (!(mu > 0.0)) throw SpecError("asymptotic_T needs mu > 0");
  if (enforce_cone) check_cone(q_plus, p_minus, chart.r(), cone, 1);
  const double lambda = chart.lambda(z0);
  const Vec vp = limit_direction_plus(chart, z0, q_plus).v;
  const Vec vm = limit_direction_minus(chart, z0, p_minus).v;
  const double a = -lambda * vp.dot(vm);
  if (!(a > 0.0)) throw ConeViolation("-lambda <v+, v-> must be positive");
  return (std::abs(std::log(mu)) + std::log(a)) / (2.0 * lambda);
}

ConnectionSolution solve_fixed_time(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus,
                                    const Vec& p_minus, double T, const BvpOptions& opts) {
  const Dims& d = chart.dims();
  if (z0.size() != d.manifold() || q_plus.size() != d.k || p_minus.size() != d.k)
    throw SpecError("connection data has wrong dimensions");
  const double lambda = chart.lambda(z0);
  if (T < 1.0 / lambda * (1 - 1e-12)) throw SpecError("T must be at least 1/lambda(z0)");
  if (q_plus.norm() > chart.r() * (1 + 1e-12) || p_minus.norm() > chart.r() * (1 + 1e-12))
    throw ChartExit("boundary data outside B_r");
  const Guess g = asymptotic_guess(chart, z0, q_plus, p_minus, T);
  auto sol = shoot(chart.system(), midpoint_bc(d, z0, q_plus, p_minus), T, g.sa, g.sb, opts, &chart);
  finalize(sol, z0, q_plus, p_minus);
  return sol;
}

ConnectionSolution solve_fixed_energy(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus,
                                      const Vec& p_minus, double mu, const BvpOptions& opts) {
  const Dims& d = chart.dims();
  if (mu == 0.0 || !std::isfinite(mu)) throw SpecError("fixed energy needs mu != 0");
  if (opts.check_cone) check_cone(q_plus, p_minus, chart.r(), opts.cone, mu > 0 ? 1 : -1);
  const double lambda = chart.lambda(z0);
  const Vec vp = limit_direction_plus(chart, z0, q_plus).v;
  const Vec vm = limit_direction_minus(chart, z0, p_minus).v;
  const double a = -lambda * vp.dot(vm) / mu;
  if (!(a > 0.0)) throw ConeViolation("energy sign does not match <v+, v->");
  const double T0 = 0.5 * std::log(a) / lambda;
  const auto bc = midpoint_bc(d, z0, q_plus, p_minus);
  auto solve = [&](double T, const Guess* g) {
    const Guess gg = g ? *g : asymptotic_guess(chart, z0, q_plus, p_minus, T);
    return shoot(chart.system(), bc, T, gg.sa, gg.sb, opts, &chart);
  };
  auto base = [&](double T) { return linear_guess(d, z0, q_plus, p_minus, lambda, T); };
  auto sol = energy_search(mu, T0, lambda, opts, solve, base);
  finalize(sol, z0, q_plus, p_minus);
  return sol;
}

ConnectionSolution solve_endpoint_fixed_time(const ManifoldChart& chart, const Vec& x_plus, const Vec& y_minus,
                                             const Vec& q_plus, const Vec& p_minus, double T,
                                             const BvpOptions& opts) {
  const Dims& d = chart.dims();
  Vec z(d.manifold());
  z << x_plus, y_minus;
  const Guess g = asymptotic_guess(chart, z, q_plus, p_minus, T);
  auto sol = shoot(chart.system(), endpoint_bc(d, x_plus, y_minus, q_plus, p_minus), T, g.sa, g.sb, opts, &chart);
  finalize(sol, zpart(d, sol.mid), q_plus, p_minus);
  return sol;
}

ConnectionSolution solve_endpoint_fixed_energy(const ManifoldChart& chart, const Vec& x_plus,
                                               const Vec& y_minus, const Vec& q_plus, const Vec& p_minus,
                                               double mu, const BvpOptions& opts) {
  const Dims& d = chart.dims();
  if (mu == 0.0 || !std::isfinite(mu)) throw SpecError("fixed energy needs mu != 0");
  if (opts.check_cone) check_cone(q_plus, p_minus, chart.r(), opts.cone, mu > 0 ? 1 : -1);
  Vec z(d.manifold());
  z << x_plus, y_minus;
  const double lambda = chart.lambda(z);
  const double a = -lambda * q_plus.dot(p_minus) / mu;
  if (!(a > 0.0)) throw ConeViolation("energy sign does not match <q+, p->");
  const double T0 = 0.5 * std::log(a) / lambda;
  const auto bc = endpoint_bc(d, x_plus, y_minus, q_plus, p_minus);
  auto solve = [&](double T, const Guess* g) {
    const Guess gg = g ? *g : asymptotic_guess(chart, z, q_plus, p_minus, T);
    return shoot(chart.system(), bc, T, gg.sa, gg.sb, opts, &chart);
  };
  auto base = [&](double T) { return linear_guess(d, z, q_plus, p_minus, lambda, T); };
  auto sol = energy_search(mu, T0, lambda, opts, solve, base);
  finalize(sol, zpart(d, sol.mid), q_plus, p_minus);
  return sol;
}

}  // namespace shilnikov
