#include "shilnikov/scattering.hpp"

#include <cmath>
#include <random>

#include "shilnikov/errors.hpp"

namespace shilnikov {

SphereChart::SphereChart(const Vec& pole, double r) : r_(r) {
  if (!(pole.norm() > 0)) throw SpecError("sphere chart pole must be nonzero");
  if (!(r > 0)) throw SpecError("sphere radius must be positive");
  e_ = pole.normalized();
  const int k = static_cast<int>(e_.size());
  Eigen::HouseholderQR<Mat> qr(e_);
  const Mat Q = qr.householderQ() * Mat::Identity(k, k);
  U_ = Q.rightCols(k - 1);
}

Vec SphereChart::point(const Vec& xi) const {
  const double n2 = xi.squaredNorm();
  return r_ * ((1.0 - n2) * e_ + 2.0 * U_ * xi) / (1.0 + n2);
}

Mat SphereChart::jacobian(const Vec& xi) const {
  const double a = 1.0 + xi.squaredNorm();
  const Vec v = point(xi);
  return (r_ * (2.0 * U_ - 2.0 * e_ * xi.transpose()) - 2.0 * v * xi.transpose()) / a;
}

Vec SphereChart::coords(const Vec& v) const {
  const Vec w = v.normalized();
  const double den = 1.0 + e_.dot(w);
  if (den < 1e-8) throw DomainError("point at the projection pole of the sphere chart");
  return U_.transpose() * w / den;
}

// ---------------------------------------------------------------------------

Trajectory HeteroclinicOrbit::trajectory(const HamiltonianSystem& sys, double tol) const {
  return integrate(sys, exit_state, 0.0, flight_time, tol);
}

namespace {

// |q| - r and p - f+(z, q) at a landing state.
Vec landing_residual(const LocalGraphs& g, const Dims& d, double r, const Vec& s) {
  Vec out(d.k + 1);
  const Vec q = qpart(d, s);
  out[0] = q.norm() - r;
  out.tail(d.k) = ppart(d, s) - g.f_plus(zpart(d, s), q);
  return out;
}

}  // namespace

HeteroclinicOrbit find_heteroclinic(const ManifoldChart& chart_minus, const ManifoldChart& chart_plus,
                                    const HeteroclinicGuess& guess, const HeteroclinicOptions& opts) {
  const HamiltonianSystem& sys = chart_minus.system();
  const Dims& d = sys.dims();
  if (chart_plus.dims() != d) throw SpecError("charts belong to different systems");
  if (guess.z_minus.size() != d.manifold() || guess.p_exit.size() != d.k)
    throw SpecError("heteroclinic guess has wrong sizes");
  if (!(guess.flight_time > 0)) throw SpecError("flight time guess must be positive");
  const double r_minus = chart_minus.r(), r_plus = chart_plus.r();
  const SphereChart sphere(guess.p_exit, r_minus);
  const auto g_plus = chart_plus.center_graphs();
  const auto g_minus = chart_minus.graphs(guess.z_minus);
  const int nx = d.k - 1;

  auto start = [&](const Vec& xi) {
    const Vec p = sphere.point(xi);
    return assemble(d, guess.z_minus, g_minus->f_minus(guess.z_minus, p), p);
  };

  Vec xi = Vec::Zero(nx);
  double tau = guess.flight_time;
  Vec s, F;
  Mat J(d.k + 1, nx + 1);
  double res = kInf;
  int it = 0;
  for (;; ++it) {
    const Vec s0 = start(xi);
    const auto vf = flow_variational(sys, s0, tau, opts.integrator_tol);
    s = vf.state;
    F = landing_residual(*g_plus, d, r_plus, s);
    // Residual derivative in the landing state.
    Mat Dr(d.k + 1, d.phase());
    for (int j = 0; j < d.phase(); ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(s[j]));
      Vec a = s, b = s;
      a[j] += h;
      b[j] -= h;
      Dr.col(j) = (landing_residual(*g_plus, d, r_plus, a) - landing_residual(*g_plus, d, r_plus, b)) / (2 * h);
    }
    Mat ds0(d.phase(), nx);
    for (int j = 0; j < nx; ++j) {
      const double h = 1e-7;
      Vec a = xi, b = xi;
      a[j] += h;
      b[j] -= h;
      ds0.col(j) = (start(a) - start(b)) / (2 * h);
    }
    J.leftCols(nx) = Dr * vf.stm * ds0;
    J.col(nx) = Dr * sys.vector_field(s);
    res = F.lpNorm<Eigen::Infinity>();
    if (res <= opts.tol || it >= opts.max_iter) break;
    const Vec step = -J.colPivHouseholderQr().solve(F);
    double lam = 1.0;
    if (std::abs(step[nx]) > 0.5 * tau) lam = 0.5 * tau / std::abs(step[nx]);
    xi += lam * step.head(nx);
    tau += lam * step[nx];
  }
  if (!(res <= opts.tol)) throw NewtonFailure("heteroclinic matching did not converge", res);

  Eigen::JacobiSVD<Mat> svd(J);
  HeteroclinicOrbit out;
  out.min_singular_value = svd.singularValues().minCoeff();
  if (out.min_singular_value < opts.transversality_threshold)
    throw Tangency("stable and unstable manifolds do not meet transversely");
  out.c_minus = guess.z_minus;
  out.exit_state = start(xi);
  out.entry_state = s;
  out.flight_time = tau;
  out.residual = res;
  out.iterations = it;
  const StraighteningMap phi(g_plus);
  out.c_plus = zpart(d, phi.forward(s));
  out.v_plus = limit_direction_plus(chart_plus, zpart(d, s), qpart(d, s)).v;
  out.v_minus = limit_direction_minus(chart_minus, out.c_minus, ppart(d, out.exit_state)).v;
  return out;
}

Vec HeteroclinicChain::corner(int i) const {
  const int n = size();
  return orbits[((i % n) + n) % n].c_minus;
}

double HeteroclinicChain::corner_mismatch() const {
  const int n = size();
  double out = 0.0;
  for (int i = periodic ? 0 : 1; i < n; ++i)
    out = std::max(out, (orbits[(i + n - 1) % n].c_plus - orbits[i].c_minus).norm());
  return out;
}

double symplectic_angle(const Vec& v_plus, const Vec& v_minus) { return -v_plus.dot(v_minus); }

double symplectic_angle(const HeteroclinicChain& chain, int i) {
  const int n = chain.size();
  const int j = ((i % n) + n) % n;
  return symplectic_angle(chain.orbits[(j + n - 1) % n].v_plus, chain.orbits[j].v_minus);
}

Positivity chain_positive(const HeteroclinicChain& chain) {
  Positivity out;
  out.margin = kInf;
  for (int i = chain.periodic ? 0 : 1; i < chain.size(); ++i)
    out.margin = std::min(out.margin, symplectic_angle(chain, i));
  out.positive = out.margin > 0;
  return out;
}

// ---------------------------------------------------------------------------

PoincareMap::PoincareMap(SystemPtr sys, SphereChart exit, SphereChart entry, Vec exit_state, double tau,
                         PoincareOptions opts)
    : sys_(std::move(sys)),
      exit_(std::move(exit)),
      entry_(std::move(entry)),
      exit0_(std::move(exit_state)),
      tau0_(tau),
      opts_(opts) {
  const int m = sys_->dims().m;
  shear_ = Mat::Zero(m, m);
  IntegratorOptions io;
  io.rtol = opts_.rtol;
  io.atol = opts_.atol;
  io.dense = false;
  entry0_ = flow_variational(*sys_, exit0_, tau0_, io).state;
}

Vec PoincareMap::variables(const Vec& B_minus, const Vec& B_plus) const {
  const Dims& d = sys_->dims();
  Vec X(arity());
  X << ypart(d, B_minus) - shear_ * xpart(d, B_minus), exit_.coords(ppart(d, B_minus)), xpart(d, B_plus),
      entry_.coords(qpart(d, B_plus));
  return X;
}

Vec PoincareMap::exit_point(const Vec& X, const Vec& x_minus, const Vec& q_minus) const {
  const Dims& d = sys_->dims();
  Vec s(d.phase());
  s << x_minus, X.head(d.m) + shear_ * x_minus, q_minus, exit_.point(X.segment(d.m, exit_.dim()));
  return s;
}

PoincareSolve PoincareMap::solve(const Vec& X, double mu, const PoincareSolve* warm) const {
  const Dims& d = sys_->dims();
  const int m = d.m, k = d.k;
  if (X.size() != arity()) throw SpecError("Poincare map variables have wrong size");
  const Vec x_plus = X.segment(m + exit_.dim(), m);
  const Vec xi_plus = X.tail(entry_.dim());
  const Vec q_plus = entry_.point(xi_plus);
  IntegratorOptions io;
  io.rtol = opts_.rtol;
  io.atol = opts_.atol;
  io.dense = false;

  const Vec& B0 = warm ? warm->B_minus : exit0_;
  Vec xm = xpart(d, B0), qm = qpart(d, B0);
  double tau = warm ? warm->tau : tau0_;
  const int n = m + k + 1;
  Mat dB = Mat::Zero(d.phase(), m + k);
  dB.block(d.x0(), 0, m, m) = Mat::Identity(m, m);
  dB.block(d.y0(), 0, m, m) = shear_;
  dB.block(d.q0(), m, k, k) = Mat::Identity(k, k);

  PoincareSolve out;
  Mat J(n, n);
  double res = kInf;
  int it = 0;
  for (;; ++it) {
    const Vec Bm = exit_point(X, xm, qm);
    const auto vf = flow_variational(*sys_, Bm, tau, io);
    const Vec& Bp = vf.state;
    Vec E(n);
    E << sys_->energy(Bm) - mu, xpart(d, Bp) - x_plus, qpart(d, Bp) - q_plus;
    J.setZero();
    J.block(0, 0, 1, m + k) = sys_->gradient(Bm).transpose() * dB;
    const Vec Xp = sys_->vector_field(Bp);
    J.block(1, 0, m, m + k) = vf.stm.middleRows(d.x0(), m) * dB;
    J.block(1, m + k, m, 1) = Xp.segment(d.x0(), m);
    J.block(1 + m, 0, k, m + k) = vf.stm.middleRows(d.q0(), k) * dB;
    J.block(1 + m, m + k, k, 1) = Xp.segment(d.q0(), k);
    res = E.lpNorm<Eigen::Infinity>();
    out.B_minus = Bm;
    out.B_plus = Bp;
    if (res <= opts_.tol || it >= opts_.max_iter) break;
    Eigen::FullPivLU<Mat> lu(J);
    if (std::abs(lu.determinant()) < opts_.twist_threshold)
      throw TransversalityFailure("twist condition fails for the section variables");
    const Vec step = -lu.solve(E);
    xm += step.head(m);
    qm += step.segment(m, k);
    tau += step[m + k];
  }
  if (!(res <= opts_.tol)) throw NewtonFailure("Poincare map section points did not converge", res);
  out.twist_det = J.determinant();
  if (std::abs(out.twist_det) < opts_.twist_threshold)
    throw TransversalityFailure("twist condition fails for the section variables");
  out.tau = tau;
  out.residual = res;
  out.iterations = it;
  const auto af = flow_action(*sys_, out.B_minus, tau, io);
  const Vec& Bm = out.B_minus;
  const Vec xmv = xpart(d, Bm);
  out.value = xmv.dot(ypart(d, Bm)) + qpart(d, Bm).dot(ppart(d, Bm)) + af.action -
              0.5 * xmv.dot(shear_ * xmv);
  const Vec xi_minus = X.segment(m, exit_.dim());
  out.conjugate.resize(arity());
  out.conjugate << xmv, exit_.conjugate(xi_minus, qpart(d, Bm)), ypart(d, out.B_plus),
      entry_.conjugate(xi_plus, ppart(d, out.B_plus));
  return out;
}

GenFunValue poincare_F_mu(const PoincareMap& map, const Vec& X, double mu) {
  const auto s = map.solve(X, mu);
  GenFunValue out;
  out.value = s.value;
  out.conjugate = s.conjugate;
  out.aux.resize(2);
  out.aux << s.tau, s.twist_det;
  return out;
}

GenFunRecord make_F_mu(std::shared_ptr<const PoincareMap> map, double mu) {
  const Dims d = map->system().dims();
  std::vector<std::string> labels;
  for (int i = 0; i < d.m; ++i) labels.push_back("y-" + std::to_string(i));
  for (int i = 0; i < map->exit_chart().dim(); ++i) labels.push_back("xi-" + std::to_string(i));
  for (int i = 0; i < d.m; ++i) labels.push_back("x+" + std::to_string(i));
  for (int i = 0; i < map->entry_chart().dim(); ++i) labels.push_back("xi+" + std::to_string(i));
  return GenFunRecord(mu == 0.0 ? GenFunKind::F : GenFunKind::F_mu, labels,
                      [map, mu](const Vec& X) { return poincare_F_mu(*map, X, mu); });
}

std::shared_ptr<PoincareMap> poincare_map_for(SystemPtr sys, const HeteroclinicOrbit& orbit, double r,
                                              std::uint64_t seed, int max_tries, PoincareOptions opts) {
  const Dims d = sys->dims();
  auto map = std::make_shared<PoincareMap>(sys, SphereChart(ppart(d, orbit.exit_state), r),
                                           SphereChart(qpart(d, orbit.entry_state), r), orbit.exit_state,
                                           orbit.flight_time, opts);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt <= max_tries; ++attempt) {
    try {
      map->solve(map->base_variables(), 0.0);
      return map;
    } catch (const TransversalityFailure&) {
      if (attempt == max_tries) break;
      Mat A(d.m, d.m);
      for (int i = 0; i < d.m; ++i)
        for (int j = 0; j < d.m; ++j) A(i, j) = normal(rng);
      map->set_shear(0.5 * (A + A.transpose()));
    }
  }
  throw TransversalityFailure("no shear of the exit coordinates satisfies the twist condition");
}

// ---------------------------------------------------------------------------

ScatteringBranch::ScatteringBranch(ChartPtr chart_minus, ChartPtr chart_plus,
                                   std::shared_ptr<const PoincareMap> map, BranchOptions opts)
    : chart_minus_(std::move(chart_minus)),
      chart_plus_(std::move(chart_plus)),
      map_(std::move(map)),
      opts_(opts) {
  X0_ = map_->base_variables();
}

double ScatteringBranch::G(const Vec& x_minus, const Vec& y_plus, const Vec& X, Vec* grad, Vec* z_minus,
                           Vec* z_plus) const {
  const Dims& d = dims();
  const int m = d.m;
  const SphereChart& ex = map_->exit_chart();
  const SphereChart& en = map_->entry_chart();
  const Vec xi_m = X.segment(m, ex.dim());
  const Vec x_p = X.segment(m + ex.dim(), m);
  const Vec xi_p = X.tail(en.dim());
  const Vec p_minus = ex.point(xi_m);
  const Vec q_plus = en.point(xi_p);
  const Mat& H = map_->shear();

  // With a shear the exit coordinate y- = y~ + H x- depends on the x- read off S-.
  Vec y_minus = X.head(m);
  GenFunValue sm = genfun_S_minus(*chart_minus_, x_minus, y_minus, p_minus, opts_.genfun);
  if (H.cwiseAbs().maxCoeff() > 0) {
    for (int it = 0; it < 50; ++it) {
      const Vec yn = X.head(m) + H * sm.conjugate.segment(m, m);
      const double ch = (yn - y_minus).lpNorm<Eigen::Infinity>();
      y_minus = yn;
      sm = genfun_S_minus(*chart_minus_, x_minus, y_minus, p_minus, opts_.genfun);
      if (ch < 1e-15) break;
    }
  }
  const GenFunValue sp = genfun_S_plus(*chart_plus_, x_p, y_plus, q_plus, opts_.genfun);
  const PoincareSolve F = map_->solve(X, 0.0);

  const Vec xm_S = sm.conjugate.segment(m, m);
  const double value = sm.value - 0.5 * xm_S.dot(H * xm_S) - F.value + sp.value;
  if (grad) {
    Vec g(X.size());
    g << xm_S - F.conjugate.head(m),
        ex.conjugate(xi_m, sm.conjugate.tail(d.k)) - F.conjugate.segment(m, ex.dim()),
        sp.conjugate.head(m) - F.conjugate.segment(m + ex.dim(), m),
        en.conjugate(xi_p, sp.conjugate.tail(d.k)) - F.conjugate.tail(en.dim());
    *grad = g;
  }
  if (z_minus) {
    z_minus->resize(2 * m);
    *z_minus << x_minus, sm.conjugate.head(m);
  }
  if (z_plus) {
    z_plus->resize(2 * m);
    *z_plus << sp.conjugate.segment(m, m), y_plus;
  }
  return value;
}

BranchPoint ScatteringBranch::evaluate(const Vec& x_minus, const Vec& y_plus, const Vec* X_guess) const {
  const int n = static_cast<int>(X0_.size());
  Vec X = X_guess ? *X_guess : X0_;
  Vec g;
  double res = kInf;
  Mat Hs(n, n);
  auto hessian = [&](const Vec& Xc) {
    for (int j = 0; j < n; ++j) {
      Vec a = Xc, b = Xc, ga, gb;
      a[j] += opts_.fd_step;
      b[j] -= opts_.fd_step;
      G(x_minus, y_plus, a, &ga);
      G(x_minus, y_plus, b, &gb);
      Hs.col(j) = (ga - gb) / (2 * opts_.fd_step);
    }
    Hs = (0.5 * (Hs + Hs.transpose())).eval();
  };
  int it = 0;
  for (;; ++it) {
    G(x_minus, y_plus, X, &g);
    res = g.lpNorm<Eigen::Infinity>();
    if (res <= opts_.tol || it >= opts_.max_iter) break;
    hessian(X);
    X -= Hs.fullPivLu().solve(g);
  }
  if (!(res <= opts_.tol)) throw InnerNewtonFailure("inner critical point of the branch did not converge");
  hessian(X);
  BranchPoint out;
  out.X = X;
  out.inner_hessian = Hs;
  out.inner_min_singular = Eigen::JacobiSVD<Mat>(Hs).singularValues().minCoeff();
  out.iterations = it;
  if (out.inner_min_singular < opts_.degeneracy_threshold)
    throw DegenerateCriticalPoint("inner critical point of the branch is degenerate");
  out.S = G(x_minus, y_plus, X, nullptr, &out.z_minus, &out.z_plus);
  return out;
}

Mat ScatteringBranch::S_hessian(const Vec& x_minus, const Vec& y_plus, double h) const {
  const int m = dims().m;
  Mat Hs(2 * m, 2 * m);
  const BranchPoint base = evaluate(x_minus, y_plus);
  auto conj = [&](const Vec& xm, const Vec& yp) {
    const BranchPoint b = evaluate(xm, yp, &base.X);
    Vec c(2 * m);
    c << b.z_minus.tail(m), b.z_plus.head(m);
    return c;
  };
  for (int j = 0; j < 2 * m; ++j) {
    Vec xa = x_minus, ya = y_plus, xb = x_minus, yb = y_plus;
    if (j < m) {
      xa[j] += h;
      xb[j] -= h;
    } else {
      ya[j - m] += h;
      yb[j - m] -= h;
    }
    Hs.col(j) = (conj(xa, ya) - conj(xb, yb)) / (2 * h);
  }
  return 0.5 * (Hs + Hs.transpose());
}

Mat branch_jacobian(const Mat& S_hess, int m) {
  const Mat a = S_hess.topLeftCorner(m, m);
  const Mat b = S_hess.topRightCorner(m, m);
  const Mat c = S_hess.bottomRightCorner(m, m);
  Eigen::FullPivLU<Mat> lu(b);
  if (!lu.isInvertible()) throw DegenerateCriticalPoint("mixed block of the scattering generating function is singular");
  const Mat bi = lu.inverse();
  Mat DF(2 * m, 2 * m);
  DF.topLeftCorner(m, m) = b.transpose() - c * bi * a;
  DF.topRightCorner(m, m) = c * bi;
  DF.bottomLeftCorner(m, m) = -bi * a;
  DF.bottomRightCorner(m, m) = bi;
  return DF;
}

Mat ScatteringBranch::DF(const Vec& x_minus, const Vec& y_plus, double h) const {
  return branch_jacobian(S_hessian(x_minus, y_plus, h), dims().m);
}

GenFunRecord ScatteringBranch::record() const {
  const int m = dims().m;
  std::vector<std::string> labels;
  for (int i = 0; i < m; ++i) labels.push_back("x-" + std::to_string(i));
  for (int i = 0; i < m; ++i) labels.push_back("y+" + std::to_string(i));
  return GenFunRecord(GenFunKind::S, labels, [this, m](const Vec& A) {
    const BranchPoint b = evaluate(A.head(m), A.tail(m));
    GenFunValue out;
    out.value = b.S;
    out.conjugate.resize(2 * m);
    out.conjugate << b.z_minus.tail(m), b.z_plus.head(m);
    out.aux = b.z_plus;
    return out;
  });
}

}  // namespace shilnikov
