#include "shilnikov/shadow.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "shilnikov/errors.hpp"

namespace shilnikov {

BranchFunction branch_function(std::shared_ptr<const ScatteringBranch> branch) {
  return [branch](const Vec& x, const Vec& y_next) {
    const BranchPoint b = branch->evaluate(x, y_next);
    const int m = branch->dims().m;
    return BranchEval{b.S, b.z_minus.tail(m), b.z_plus.head(m)};
  };
}

// ---------------------------------------------------------------------------

Vec discrete_action_gradient(const DiscreteOrbitProblem& problem, const Vec& z) {
  const int n = problem.n(), m = problem.m;
  if (z.size() != 2 * m * n) throw SpecError("corner vector has wrong size");
  Vec g = Vec::Zero(z.size());
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Vec x = z.segment(2 * m * i, m);
    const Vec y_next = z.segment(2 * m * j + m, m);
    const BranchEval be = problem.branches[i](x, y_next);
    g.segment(2 * m * i, m) += be.y_minus - z.segment(2 * m * i + m, m);
    g.segment(2 * m * j + m, m) += be.x_plus - z.segment(2 * m * j, m);
  }
  return g;
}

namespace {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
  Mat J;
  for (int j = 0; j < x.size(); ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    const Vec col = (f(a) - f(b)) / (2 * h);
    if (j == 0) J.resize(col.size(), x.size());
    J.col(j) = col;
  }
  return J;
}

}  // namespace

DiscreteOrbit solve_discrete_action(const DiscreteOrbitProblem& problem, double tol) {
  const int n = problem.n(), m = problem.m;
  if (n < 1 || static_cast<int>(problem.guesses.size()) != n) throw SpecError("one guess per branch is required");
  Vec z(2 * m * n);
  for (int i = 0; i < n; ++i) z.segment(2 * m * i, 2 * m) = problem.guesses[i];
  auto grad = [&](const Vec& v) { return discrete_action_gradient(problem, v); };

  DiscreteOrbit out;
  Vec g = grad(z);
  int it = 0;
  for (; it < problem.max_iter && g.lpNorm<Eigen::Infinity>() > tol; ++it) {
    Mat H = fd_jacobian(grad, z, problem.fd_step);
    H = (0.5 * (H + H.transpose())).eval();
    z -= H.fullPivLu().solve(g);
    g = grad(z);
  }
  out.gradient_norm = g.lpNorm<Eigen::Infinity>();
  if (!(out.gradient_norm <= tol)) throw NewtonFailure("discrete action critical point", out.gradient_norm);
  out.iterations = it;
  out.hessian = fd_jacobian(grad, z, problem.fd_step);
  out.hessian = (0.5 * (out.hessian + out.hessian.transpose())).eval();
  const Vec sv = Eigen::JacobiSVD<Mat>(out.hessian).singularValues();
  out.hessian_cond = sv.minCoeff() > 0 ? sv.maxCoeff() / sv.minCoeff() : kInf;
  for (int i = 0; i < n; ++i) out.corners.push_back(z.segment(2 * m * i, 2 * m));

  out.DFn = Mat::Identity(2 * m, 2 * m);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    Vec a(2 * m);
    a << z.segment(2 * m * i, m), z.segment(2 * m * j + m, m);
    auto conj = [&](const Vec& v) {
      const BranchEval be = problem.branches[i](v.head(m), v.tail(m));
      Vec c(2 * m);
      c << be.y_minus, be.x_plus;
      return c;
    };
    Mat Hs = fd_jacobian(conj, a, problem.fd_step);
    Hs = (0.5 * (Hs + Hs.transpose())).eval();
    out.DFn = branch_jacobian(Hs, m) * out.DFn;
  }
  out.det_DFn_minus_I = (out.DFn - Mat::Identity(2 * m, 2 * m)).determinant();
  out.nondegenerate = out.hessian_cond <= problem.degeneracy_cond;
  if (!out.nondegenerate) throw DegenerateOrbit("Hessian of the discrete action is singular");
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Layout {
  int m, n;
  std::vector<int> offset;  // start of X_i
  int size = 0;
};

Layout layout(const ShadowProblem& P) {
  Layout L;
  L.m = P.system->dims().m;
  L.n = P.n();
  for (const auto& map : P.maps) {
    L.offset.push_back(L.size);
    L.size += map->arity();
  }
  return L;
}

}  // namespace

ShadowEval shadow_gradient(const ShadowProblem& P, const Vec& X, const ShadowEval* warm) {
  const Dims d = P.system->dims();
  const int m = d.m, k = d.k;
  const Layout L = layout(P);
  if (X.size() != L.size) throw SpecError("shadow variables have wrong size");
  if (static_cast<int>(P.charts.size()) != L.n) throw SpecError("one chart per corner is required");
  ShadowEval out;
  out.global.resize(L.n);
  out.local.resize(L.n);
  for (int i = 0; i < L.n; ++i) {
    const Vec Xi = X.segment(L.offset[i], P.maps[i]->arity());
    out.global[i] = P.maps[i]->solve(Xi, P.mu, warm ? &warm->global[i] : nullptr);
  }
  for (int i = 0; i < L.n; ++i) {
    const int h = (i + L.n - 1) % L.n;
    const PoincareMap& in = *P.maps[h];
    const PoincareMap& outm = *P.maps[i];
    const Vec Xh = X.segment(L.offset[h], in.arity());
    const Vec Xi = X.segment(L.offset[i], outm.arity());
    const Vec x_plus = Xh.segment(m + in.exit_chart().dim(), m);
    const Vec q_plus = in.entry_chart().point(Xh.tail(in.entry_chart().dim()));
    const Vec p_minus = outm.exit_chart().point(Xi.segment(m, outm.exit_chart().dim()));
    const Mat& H = outm.shear();
    Vec y_minus = Xi.head(m);
    ConnectionSolution sol =
        solve_endpoint_fixed_energy(*P.charts[i], x_plus, y_minus, q_plus, p_minus, P.mu, P.bvp);
    if (H.cwiseAbs().maxCoeff() > 0) {
      for (int it = 0; it < 50; ++it) {
        const Vec yn = Xi.head(m) + H * xpart(d, sol.A_minus);
        const double ch = (yn - y_minus).lpNorm<Eigen::Infinity>();
        y_minus = yn;
        sol = solve_endpoint_fixed_energy(*P.charts[i], x_plus, y_minus, q_plus, p_minus, P.mu, P.bvp);
        if (ch < 1e-15) break;
      }
    }
    out.local[i] = std::move(sol);
  }
  out.gradient.resize(L.size);
  for (int i = 0; i < L.n; ++i) {
    const int j = (i + 1) % L.n;
    const PoincareMap& map = *P.maps[i];
    const int e1 = map.exit_chart().dim(), e2 = map.entry_chart().dim();
    const Vec Xi = X.segment(L.offset[i], map.arity());
    const PoincareSolve& F = out.global[i];
    const ConnectionSolution& Ri = out.local[i];
    const ConnectionSolution& Rj = out.local[j];
    Vec g(map.arity());
    g << xpart(d, Ri.A_minus) - F.conjugate.head(m),
        map.exit_chart().conjugate(Xi.segment(m, e1), qpart(d, Ri.A_minus)) - F.conjugate.segment(m, e1),
        ypart(d, Rj.A_plus) - F.conjugate.segment(m + e1, m),
        map.entry_chart().conjugate(Xi.tail(e2), ppart(d, Rj.A_plus)) - F.conjugate.tail(e2);
    out.gradient.segment(L.offset[i], map.arity()) = g;
  }
  (void)k;
  return out;
}

ShadowOrbit solve_shadow(const ShadowProblem& P, const ShadowOptions& opts) {
  if (!(P.mu > 0)) throw SpecError("shadowing orbits need mu > 0");
  const Dims d = P.system->dims();
  const Layout L = layout(P);
  Vec X = P.X0;
  ShadowEval ev = shadow_gradient(P, X);
  auto phi = [](const ShadowEval& e) { return 0.5 * e.gradient.squaredNorm(); };
  int it = 0;
  for (; it < opts.max_iter && ev.gradient.lpNorm<Eigen::Infinity>() > opts.tol; ++it) {
    Mat J(L.size, L.size);
    for (int j = 0; j < L.size; ++j) {
      Vec a = X, b = X;
      a[j] += opts.fd_step;
      b[j] -= opts.fd_step;
      J.col(j) = (shadow_gradient(P, a, &ev).gradient - shadow_gradient(P, b, &ev).gradient) / (2 * opts.fd_step);
    }
    J = (0.5 * (J + J.transpose())).eval();
    const Vec step = -J.fullPivLu().solve(ev.gradient);
    const double f0 = phi(ev);
    double lam = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, lam *= 0.5) {
      try {
        ShadowEval trial = shadow_gradient(P, X + lam * step, &ev);
        if (phi(trial) <= (1.0 - 2.0 * opts.armijo * lam) * f0) {
          X += lam * step;
          ev = std::move(trial);
          accepted = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) break;
  }
  const double gn = ev.gradient.lpNorm<Eigen::Infinity>();
  if (!(gn <= opts.tol)) throw NewtonFailure("shadowing orbit at mu = " + std::to_string(P.mu), gn);

  ShadowOrbit out;
  out.mu = P.mu;
  out.X = X;
  out.gradient_norm = gn;
  out.iterations = it;
  for (int i = 0; i < L.n; ++i) {
    const int j = (i + 1) % L.n;
    CornerPassage cp{ev.local[i], ev.global[i]};
    if (opts.build_pieces) cp.local.build_pieces(*P.system, opts.integrator_tol);
    out.closure = std::max(out.closure, (cp.local.A_minus - cp.global.B_minus).lpNorm<Eigen::Infinity>());
    out.closure = std::max(out.closure, (cp.global.B_plus - ev.local[j].A_plus).lpNorm<Eigen::Infinity>());
    for (const Vec* s : {&cp.local.A_plus, &cp.local.A_minus, &cp.global.B_minus, &cp.global.B_plus})
      out.energy_defect = std::max(out.energy_defect, std::abs(P.system->energy(*s) - P.mu));
    out.passage_times.push_back(2.0 * cp.local.T);
    out.period += 2.0 * cp.local.T + cp.global.tau;
    if (opts.build_pieces)
      out.global_pieces.push_back(integrate(*P.system, cp.global.B_minus, 0.0, cp.global.tau, opts.integrator_tol));
    out.passages.push_back(std::move(cp));
  }
  (void)d;
  return out;
}

std::vector<Vec> ShadowOrbit::samples(double dt) const {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const ConnectionSolution& loc = passages[i].local;
    if (loc.pieces.empty()) throw SpecError("orbit samples need the local pieces");
    const int nl = std::max(2, static_cast<int>(std::ceil(2 * loc.T / dt)));
    for (int j = 0; j < nl; ++j) out.push_back(loc.at(-loc.T + 2 * loc.T * j / nl));
    const Trajectory& gl = global_pieces.at(i);
    const int ng = std::max(2, static_cast<int>(std::ceil(gl.t1() / dt)));
    for (int j = 0; j < ng; ++j) out.push_back(gl.at(gl.t1() * j / ng));
  }
  return out;
}

// ---------------------------------------------------------------------------

ChainCurve chain_curve(const HamiltonianSystem& sys, const HeteroclinicChain& chain, double tail_time,
                       double tol) {
  const Dims& d = sys.dims();
  ChainCurve c;
  for (const auto& o : chain.orbits) {
    c.pieces.push_back(o.trajectory(sys, tol));
    c.pieces.push_back(integrate(sys, o.exit_state, 0.0, -tail_time, tol));
    c.pieces.push_back(integrate(sys, o.entry_state, 0.0, tail_time, tol));
    c.points.push_back(on_manifold(d, o.c_minus));
    c.points.push_back(on_manifold(d, o.c_plus));
  }
  return c;
}

namespace {

struct Polyline {
  const Trajectory* traj;
  std::vector<double> t;
  std::vector<Vec> y;
};

double segment_distance(const Vec& a, const Vec& b, const Vec& x) {
  const Vec ab = b - a;
  const double L2 = ab.squaredNorm();
  double s = L2 > 0 ? (x - a).dot(ab) / L2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * ab - x).norm();
}

}  // namespace

ShadowDistance shadowing_distance(const ShadowOrbit& orbit, const ChainCurve& curve, double tube_radius,
                                  double dt) {
  const double curve_dt = 0.01;
  std::vector<Polyline> lines;
  for (const auto& tr : curve.pieces) {
    Polyline pl{&tr, {}, {}};
    const double a = std::min(tr.t0(), tr.t1()), b = std::max(tr.t0(), tr.t1());
    const int n = std::max(2, static_cast<int>(std::ceil((b - a) / curve_dt)));
    for (int i = 0; i <= n; ++i) {
      const double t = a + (b - a) * i / n;
      pl.t.push_back(t);
      pl.y.push_back(tr.at(t));
    }
    lines.push_back(std::move(pl));
  }
  const auto samples = orbit.samples(dt);
  ShadowDistance out;
  for (const Vec& x : samples) {
    double best = kInf;
    for (const Vec& p : curve.points) best = std::min(best, (p - x).norm());
    for (const auto& pl : lines) {
      double cb = kInf;
      std::size_t ib = 0;
      for (std::size_t i = 0; i + 1 < pl.y.size(); ++i) {
        const double dd = segment_distance(pl.y[i], pl.y[i + 1], x);
        if (dd < cb) {
          cb = dd;
          ib = i;
        }
      }
      if (cb > 2.0 * best + 1e-3) continue;
      const double lo = pl.t[ib > 0 ? ib - 1 : 0];
      const double hi = pl.t[std::min(ib + 2, pl.t.size() - 1)];
      auto f = [&](double t) { return (pl.traj->at(t) - x).norm(); };
      const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 50);
      best = std::min({best, cb, r.second});
    }
    const Dims& d = orbit.passages.front().local.dims;
    Vec qp(2 * d.k);
    qp << qpart(d, x), ppart(d, x);
    out.d_global = std::max(out.d_global, best);
    if (qp.norm() > tube_radius) out.d_outside = std::max(out.d_outside, best);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct OrthIteration {
  Vec logs;
  Eigen::VectorXi signs;
  int rounds = 0;
};

// Dominant spectrum of last * S_N ... S_1 * B by orthogonal iteration.
OrthIteration periodic_orthogonal_iteration(const Mat& B, const std::vector<Mat>& factors, const Mat& last) {
  const int nb = static_cast<int>(B.cols());
  OrthIteration out;
  Mat Z = Mat::Identity(nb, nb);
  Vec prev = Vec::Constant(nb, kInf);
  for (int round = 1; round <= 200; ++round) {
    Mat Q = B * Z;
    Vec lr = Vec::Zero(nb);
    Eigen::VectorXi sg = Eigen::VectorXi::Ones(nb);
    auto absorb = [&](const Mat& Y) {
      Eigen::HouseholderQR<Mat> qr(Y);
      const Mat R = qr.matrixQR().topRows(nb).triangularView<Eigen::Upper>();
      Q = qr.householderQ() * Mat::Identity(Y.rows(), nb);
      for (int i = 0; i < nb; ++i) {
        lr[i] += std::log(std::abs(R(i, i)));
        if (R(i, i) < 0) sg[i] = -sg[i];
      }
    };
    for (const Mat& S : factors) absorb(S * Q);
    absorb(last * Q);
    const Mat D = Z.transpose() * Q;
    for (int i = 0; i < nb; ++i)
      if (D(i, i) < 0) sg[i] = -sg[i];
    Z = Q;
    out.logs = lr;
    out.signs = sg;
    out.rounds = round;
    const Mat off = D - Mat(D.diagonal().asDiagonal());
    if (round > 3 && (lr - prev).lpNorm<Eigen::Infinity>() < 1e-10 && off.lpNorm<Eigen::Infinity>() < 1e-8) break;
    prev = lr;
  }
  return out;
}

}  // namespace

MultiplierSpectrum multiplier_spectrum(const HamiltonianSystem& sys, const ShadowOrbit& orbit,
                                       double max_dt, double tol) {
  const Dims& d = sys.dims();
  const int N = d.phase();
  const int n = static_cast<int>(orbit.passages.size());
  if (static_cast<int>(orbit.global_pieces.size()) != n) throw SpecError("multipliers need the orbit pieces");
  // Period starting at the exit of corner 0: global 0, local 1, global 1, ..., local 0.
  // Forward factors for the expanding half, backward ones for the contracting half.
  std::vector<Mat> fwd, bwd;
  auto chunks = [&](const std::function<Vec(double)>& at, double t0, double t1) {
    const int nc = std::max(1, static_cast<int>(std::ceil((t1 - t0) / max_dt)));
    for (int j = 0; j < nc; ++j) {
      const double a = t0 + (t1 - t0) * j / nc, b = t0 + (t1 - t0) * (j + 1) / nc;
      fwd.push_back(flow_variational(sys, at(a), b - a, tol).stm);
      bwd.push_back(flow_variational(sys, at(b), a - b, tol).stm);
    }
  };
  for (int i = 0; i < n; ++i) {
    const Trajectory& gl = orbit.global_pieces[i];
    chunks([&](double t) { return gl.at(t); }, 0.0, gl.t1());
    const ConnectionSolution& loc = orbit.passages[(i + 1) % n].local;
    if (loc.pieces.empty()) throw SpecError("multipliers need the local pieces");
    chunks([&](double t) { return loc.at(t); }, -loc.T, loc.T);
  }
  std::reverse(bwd.begin(), bwd.end());

  const Vec s0 = orbit.global_pieces[0].at(0.0);
  Vec dg = Vec::Zero(N);
  dg.segment(d.p0(), d.k) = ppart(d, s0).normalized();
  Mat C(2, N);
  C.row(0) = dg.transpose();
  C.row(1) = sys.gradient(s0).transpose();
  Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV);
  const Mat B = svd.matrixV().rightCols(N - 2);
  const Vec X = sys.vector_field(s0);
  const Mat Pr = Mat::Identity(N, N) - X * dg.transpose() / dg.dot(X);
  const Mat last = B.transpose() * Pr;
  const int nb = N - 2;

  MultiplierSpectrum out;
  Mat M = Mat::Identity(N, N);
  for (const Mat& S : fwd) M = S * M;
  out.monodromy_defect = symplecticity_defect(M, omega_matrix(d)) / std::max(1.0, M.squaredNorm());

  const OrthIteration f = periodic_orthogonal_iteration(B, fwd, last);
  const OrthIteration b = periodic_orthogonal_iteration(B, bwd, last);
  out.rounds = std::max(f.rounds, b.rounds);
  auto sorted = [nb](const OrthIteration& it) {
    std::vector<int> idx(nb);
    for (int i = 0; i < nb; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int c) { return it.logs[a] > it.logs[c]; });
    return idx;
  };
  const auto fi = sorted(f), bi = sorted(b);
  const int half = nb / 2;
  for (int i = 0; i < half; ++i) {
    out.log_abs.push_back(f.logs[fi[i]]);
    out.sign.push_back(f.signs[fi[i]]);
  }
  for (int i = half - 1; i >= 0; --i) {
    out.log_abs.push_back(-b.logs[bi[i]]);
    out.sign.push_back(b.signs[bi[i]]);
  }
  for (int i = 0; i < nb; ++i)
    out.pairing_defect = std::max(out.pairing_defect, std::abs(out.log_abs[i] + out.log_abs[nb - 1 - i]));
  return out;
}

}  // namespace shilnikov
