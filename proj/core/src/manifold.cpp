#include "shilnikov/manifold.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace shilnikov {

double eigenvalue_lambda(const HamiltonianSystem& sys, const Vec& z) {
  const Dims& d = sys.dims();
  const int k = d.k;
  const Mat A = sys.jacobian(on_manifold(d, z));
  const Mat At = A.bottomRightCorner(2 * k, 2 * k);
  Eigen::EigenSolver<Mat> es(At, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  const double scale = std::max(1.0, At.cwiseAbs().maxCoeff());
  double lam = 0.0;
  int npos = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].real()) < 1e-8 * scale) throw NotHyperbolic("transverse eigenvalue with zero real part");
    if (ev[i].real() > 0) {
      lam += ev[i].real();
      ++npos;
    }
  }
  if (npos != k) throw NotEqualEigenvalues("unequal numbers of stable and unstable eigenvalues");
  lam /= k;
  for (int i = 0; i < ev.size(); ++i) {
    const double target = ev[i].real() > 0 ? lam : -lam;
    if (std::abs(ev[i] - target) > 1e-6 * lam) throw NotEqualEigenvalues("transverse eigenvalues are not +-lambda");
  }
  const Mat sq = At * At - lam * lam * Mat::Identity(2 * k, 2 * k);
  if (sq.cwiseAbs().maxCoeff() > 1e-6 * lam * lam) throw NotEqualEigenvalues("transverse linearization is not semisimple");
  return lam;
}

namespace {

class Fitter {
 public:
  Fitter(const HamiltonianSystem& sys, const Vec& z0, int N, LocalGraphs::Data& out)
      : d_(sys.dims()), N_(N), nz_(2 * d_.m), k_(d_.k), out_(out) {
    if (N < 2) throw SpecError("graph order must be >= 2");
    if (!sys.has_jets()) throw SpecError("graph fitting needs a system with jet evaluation");
    lam_ = eigenvalue_lambda(sys, z0);
    const int n = d_.phase();
    const Jet H = sys.taylor(on_manifold(d_, z0), N + 1);
    check_structure(H);
    for (int i = 0; i < d_.m; ++i) zdot_.push_back(H.derivative(d_.y0() + i));
    for (int i = 0; i < d_.m; ++i) zdot_.push_back(-H.derivative(d_.x0() + i));
    for (int i = 0; i < k_; ++i) qdot_.push_back(H.derivative(d_.p0() + i));
    for (int i = 0; i < k_; ++i) pdot_.push_back(-H.derivative(d_.q0() + i));
    S_ = JetSpace::get(nz_ + k_, N);
    for (int i = 0; i < nz_; ++i) avar_.push_back(Jet::variable(S_, i, 0.0));
    for (int i = 0; i < k_; ++i) svar_.push_back(Jet::variable(S_, nz_ + i, 0.0));

    // lambda(z0 + dz) from the q1 p1 coefficient
    Jet L(S_, 0.0);
    const JetSpace& hs = H.space();
    std::vector<int> e(nz_ + k_, 0);
    for (int idx = 0; idx < hs.size(); ++idx) {
      const int* ex = hs.exponent(idx);
      bool ok = ex[d_.q0()] == 1 && ex[d_.p0()] == 1;
      for (int i = 0; ok && i < k_; ++i)
        if ((i > 0 && ex[d_.q0() + i] != 0) || (i > 0 && ex[d_.p0() + i] != 0)) ok = false;
      if (!ok || hs.degree_of(idx) - 2 > N) continue;
      std::fill(e.begin(), e.end(), 0);
      for (int i = 0; i < nz_; ++i) e[i] = ex[i];
      L[S_->index(e.data())] = -H[idx];
    }
    out_.lambda_poly = L;
    out_.lambda = lam_;
    out_.z0 = z0;
    out_.order = N;
    out_.dims = d_;
    (void)n;
  }

  void run() {
    out_.f_plus = fit_graph(+1);
    out_.f_minus = fit_graph(-1);
    side(+1, out_.eta_plus, out_.phi_plus, out_.phi_plus_inv);
    side(-1, out_.eta_minus, out_.phi_minus, out_.phi_minus_inv);
    out_.structure_defect = defect_;
  }

 private:
  int sdeg(int idx) const {
    const int* ex = S_->exponent(idx);
    int n = 0;
    for (int i = 0; i < k_; ++i) n += ex[nz_ + i];
    return n;
  }

  void check_structure(const Jet& H) {
    const JetSpace& hs = H.space();
    double dev = 0.0;
    const int n = d_.phase();
    for (int idx = hs.begin_degree(1); idx < hs.end_degree(2); ++idx) {
      const int* ex = hs.exponent(idx);
      double expected = 0.0;
      if (hs.degree_of(idx) == 2) {
        for (int i = 0; i < k_; ++i)
          if (ex[d_.q0() + i] == 1 && ex[d_.p0() + i] == 1) expected = -lam_;
      }
      dev = std::max(dev, std::abs(H[idx] - expected));
    }
    (void)n;
    if (dev > 1e-8 * std::max(1.0, lam_))
      throw NotEqualEigenvalues("quadratic part at the base point is not -lambda <q, p>");
    defect_ = std::max(defect_, dev);
  }

  PolyMap args_for(int side, const PolyMap& graph) const {
    PolyMap args(d_.phase());
    for (int i = 0; i < nz_; ++i) args[i] = avar_[i];
    for (int j = 0; j < k_; ++j) {
      args[d_.q0() + j] = side > 0 ? svar_[j] : graph[j];
      args[d_.p0() + j] = side > 0 ? graph[j] : svar_[j];
    }
    return args;
  }

  struct Flow {
    PolyMap Z, F, O;  // zdot, fiber-variable dot, graph-variable dot
  };

  Flow flow_on(int side, const PolyMap& graph) const {
    const PolyMap args = args_for(side, graph);
    Flow fl;
    for (const Jet& p : zdot_) fl.Z.push_back(compose(p, args));
    for (int j = 0; j < k_; ++j) {
      fl.F.push_back(compose(side > 0 ? qdot_[j] : pdot_[j], args));
      fl.O.push_back(compose(side > 0 ? pdot_[j] : qdot_[j], args));
    }
    return fl;
  }

  // Sum over variables of dF/dvar * V, for fiber variables (and z variables if Z given).
  Jet transport(const Jet& F, const PolyMap& V, const PolyMap* Z) const {
    Jet r(S_, 0.0);
    for (int l = 0; l < k_; ++l) r += F.derivative(nz_ + l) * V[l];
    if (Z)
      for (int i = 0; i < nz_; ++i) r += F.derivative(i) * (*Z)[i];
    return r;
  }

  PolyMap fit_graph(int side) {
    PolyMap f(k_, Jet(S_, 0.0));
    for (int deg = 2; deg <= N_; ++deg) {
      const Flow fl = flow_on(side, f);
      for (int j = 0; j < k_; ++j) {
        const Jet R = fl.O[j] - transport(f[j], fl.F, &fl.Z);
        for (int idx = S_->begin_degree(deg); idx < S_->end_degree(deg); ++idx) {
          const int n = sdeg(idx);
          if (n >= 2)
            f[j][idx] = -side * R[idx] / ((n + 1) * lam_);
          else
            defect_ = std::max(defect_, std::abs(R[idx]));
        }
      }
    }
    return f;
  }

  PolyMap substitute(const PolyMap& F, const PolyMap& a, const PolyMap& s) const {
    PolyMap args(a);
    args.insert(args.end(), s.begin(), s.end());
    PolyMap out;
    for (const Jet& p : F) out.push_back(compose(p, args));
    return out;
  }

  static bool same(const PolyMap& a, const PolyMap& b) {
    for (size_t i = 0; i < a.size(); ++i)
      if ((a[i] - b[i]).max_abs() != 0.0) return false;
    return true;
  }

  void side(int side, PolyMap& eta_out, PolyMap& phi_out, PolyMap& phi_inv_out) {
    const PolyMap& graph = side > 0 ? out_.f_plus : out_.f_minus;
    const PolyMap& other = side > 0 ? out_.f_minus : out_.f_plus;
    const Flow fl = flow_on(side, graph);

    // eta~ as a function of (z, fiber variable) on the manifold
    PolyMap eta(nz_, Jet(S_, 0.0));
    for (int deg = 1; deg <= N_; ++deg) {
      for (int i = 0; i < nz_; ++i) {
        const Jet R = fl.Z[i] + transport(eta[i], fl.F, &fl.Z);
        for (int idx = S_->begin_degree(deg); idx < S_->end_degree(deg); ++idx) {
          const int n = sdeg(idx);
          if (n >= 1)
            eta[i][idx] = side * R[idx] / (n * lam_);
          else
            defect_ = std::max(defect_, std::abs(R[idx]));
        }
      }
    }

    // straightened fiber coordinate u0(z, s) = s - other(z, graph(z, s)) and its inverse in s
    const PolyMap g_of_s = graph;
    PolyMap U0(k_);
    {
      const PolyMap og = substitute(other, avar_, g_of_s);
      for (int j = 0; j < k_; ++j) U0[j] = svar_[j] - og[j];
    }
    PolyMap srev = svar_;
    for (int it = 0; it <= N_ + 1; ++it) {
      const PolyMap og = substitute(other, avar_, substitute(graph, avar_, srev));
      PolyMap nxt(k_);
      for (int j = 0; j < k_; ++j) nxt[j] = svar_[j] + og[j];
      const bool done = same(nxt, srev);
      srev = nxt;
      if (done) break;
    }
    eta_out = substitute(eta, avar_, srev);

    // z as a function of (w, u0): dz = dw - eta(dz, u0)
    PolyMap arev = avar_;
    for (int it = 0; it <= N_ + 1; ++it) {
      const PolyMap e = substitute(eta_out, arev, svar_);
      PolyMap nxt(nz_);
      for (int i = 0; i < nz_; ++i) nxt[i] = avar_[i] - e[i];
      const bool done = same(nxt, arev);
      arev = nxt;
      if (done) break;
    }
    const PolyMap s_wu = substitute(srev, arev, svar_);

    // u0 dynamics in (w, u0)
    PolyMap Gas(k_);
    for (int j = 0; j < k_; ++j) Gas[j] = transport(U0[j], fl.F, &fl.Z);
    const PolyMap G = substitute(Gas, arev, s_wu);

    const Jet& Lam = out_.lambda_poly;
    PolyMap phi = svar_;
    for (int deg = 2; deg <= N_; ++deg) {
      for (int j = 0; j < k_; ++j) {
        const Jet R = transport(phi[j], G, nullptr) + side * (Lam * phi[j]);
        for (int idx = S_->begin_degree(deg); idx < S_->end_degree(deg); ++idx) {
          const int n = sdeg(idx);
          if (n >= 2)
            phi[j][idx] = side * R[idx] / ((n - 1) * lam_);
          else
            defect_ = std::max(defect_, std::abs(R[idx]));
        }
      }
    }
    phi_out = phi;

    PolyMap inv = svar_;
    for (int it = 0; it <= N_ + 1; ++it) {
      const PolyMap pv = substitute(phi, avar_, inv);
      PolyMap nxt(k_);
      for (int j = 0; j < k_; ++j) nxt[j] = svar_[j] - (pv[j] - inv[j]);
      const bool done = same(nxt, inv);
      inv = nxt;
      if (done) break;
    }
    phi_inv_out = inv;
  }

  Dims d_;
  int N_;
  int nz_;
  int k_;
  double lam_ = 1.0;
  double defect_ = 0.0;
  LocalGraphs::Data& out_;
  std::shared_ptr<const JetSpace> S_;
  PolyMap avar_, svar_;
  PolyMap zdot_, qdot_, pdot_;
};

}  // namespace

LocalGraphs::LocalGraphs(const HamiltonianSystem& sys, const Vec& z0, int order) {
  Fitter f(sys, z0, order, d_);
  f.run();
}

double LocalGraphs::lambda_at(const Vec& z) const {
  Vec pt = Vec::Zero(d_.dims.manifold() + d_.dims.k);
  pt.head(d_.dims.manifold()) = z - d_.z0;
  return d_.lambda_poly.evaluate(pt.data());
}

Vec LocalGraphs::eval(const PolyMap& F, const Vec& z, const Vec& s) const {
  const int nz = d_.dims.manifold();
  Vec pt(nz + s.size());
  pt.head(nz) = z - d_.z0;
  pt.tail(s.size()) = s;
  Vec out(F.size());
  for (size_t j = 0; j < F.size(); ++j) out[j] = F[j].evaluate(pt.data());
  return out;
}

Mat LocalGraphs::eval_jacobian(const PolyMap& F, const Vec& z, const Vec& s) const {
  const int nz = d_.dims.manifold();
  const int nv = nz + static_cast<int>(s.size());
  Vec pt(nv);
  pt.head(nz) = z - d_.z0;
  pt.tail(s.size()) = s;
  Mat J(F.size(), nv);
  for (size_t j = 0; j < F.size(); ++j)
    for (int v = 0; v < nv; ++v) J(j, v) = F[j].derivative(v).evaluate(pt.data());
  return J;
}

ManifoldChart::ManifoldChart(SystemPtr sys, ChartParams params) : sys_(std::move(sys)), params_(std::move(params)) {
  if (params_.center.size() != sys_->dims().manifold()) throw SpecError("chart center must have 2m entries");
  if (!(params_.r > 0)) throw SpecError("chart radius must be positive");
  if (params_.order < 2) throw SpecError("chart order must be >= 2");
}

bool ManifoldChart::in_domain(const Vec& z) const {
  return (z - params_.center).cwiseAbs().maxCoeff() <= params_.box;
}

std::shared_ptr<const LocalGraphs> ManifoldChart::graphs(const Vec& z) const {
  const std::vector<double> key(z.data(), z.data() + z.size());
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto g = std::make_shared<const LocalGraphs>(*sys_, z, params_.order);
  std::lock_guard<std::mutex> lock(mu_);
  if (cache_.size() > 512) cache_.clear();
  cache_.emplace(key, g);
  return g;
}

Vec ManifoldChart::stable_point(const Vec& z, const Vec& q) const {
  return assemble(dims(), z, q, f_plus(z, q));
}

Vec ManifoldChart::unstable_point(const Vec& z, const Vec& p) const {
  return assemble(dims(), z, f_minus(z, p), p);
}

double ManifoldChart::invariance_residual_plus(const Vec& z, const Vec& q) const {
  const Dims& d = dims();
  const auto g = graphs(z);
  const Vec s = stable_point(z, q);
  const Vec X = sys_->vector_field(s);
  const Mat Df = g->f_plus_jacobian(z, q);
  Vec zq(d.manifold() + d.k);
  zq << X.head(d.manifold()), X.segment(d.q0(), d.k);
  return (X.segment(d.p0(), d.k) - Df * zq).norm();
}

double ManifoldChart::invariance_residual_minus(const Vec& z, const Vec& p) const {
  const Dims& d = dims();
  const auto g = graphs(z);
  const Vec s = unstable_point(z, p);
  const Vec X = sys_->vector_field(s);
  const Mat Df = g->f_minus_jacobian(z, p);
  Vec zp(d.manifold() + d.k);
  zp << X.head(d.manifold()), X.segment(d.p0(), d.k);
  return (X.segment(d.q0(), d.k) - Df * zp).norm();
}

ChartPtr fit_local_graphs(SystemPtr sys, const ChartParams& params) {
  auto chart = std::make_shared<ManifoldChart>(std::move(sys), params);
  chart->center_graphs();
  return chart;
}

LimitDirection limit_direction_plus(const ManifoldChart& chart, const Vec& z0, const Vec& q) {
  if (q.norm() > chart.r() * (1 + 1e-12)) throw ChartOverflow("|q+| exceeds the chart radius");
  const auto g = chart.graphs(z0);
  const Vec u0 = q - g->f_minus(z0, g->f_plus(z0, q));
  const Vec w = z0 + g->eta_plus(z0, u0);
  return {z0, g->phi_plus(w, u0), true};
}

LimitDirection limit_direction_minus(const ManifoldChart& chart, const Vec& z0, const Vec& p) {
  if (p.norm() > chart.r() * (1 + 1e-12)) throw ChartOverflow("|p-| exceeds the chart radius");
  const auto g = chart.graphs(z0);
  const Vec v0 = p - g->f_plus(z0, g->f_minus(z0, p));
  const Vec w = z0 + g->eta_minus(z0, v0);
  return {z0, g->phi_minus(w, v0), false};
}

Vec StraighteningMap::forward(const Vec& s) const {
  const LocalGraphs& g = *g_;
  const Dims& d = g.dims();
  const Vec z = zpart(d, s), q = qpart(d, s), p = ppart(d, s);
  const Vec u0 = q - g.f_minus(z, p);
  const Vec v0 = p - g.f_plus(z, q);
  const Vec w = z + g.eta_plus(z, u0) + g.eta_minus(z, v0);
  return assemble(d, w, g.phi_plus(w, u0), g.phi_minus(w, v0));
}

Vec StraighteningMap::inverse(const Vec& t) const {
  const LocalGraphs& g = *g_;
  const Dims& d = g.dims();
  const Vec w = zpart(d, t);
  const Vec u0 = g.phi_plus_inv(w, qpart(d, t));
  const Vec v0 = g.phi_minus_inv(w, ppart(d, t));
  Vec z = w, q = u0, p = v0;
  for (int it = 0; it < 200; ++it) {
    const Vec zn = w - g.eta_plus(z, u0) - g.eta_minus(z, v0);
    const Vec qn = u0 + g.f_minus(zn, p);
    const Vec pn = v0 + g.f_plus(zn, qn);
    const double ch = (zn - z).norm() + (qn - q).norm() + (pn - p).norm();
    z = zn;
    q = qn;
    p = pn;
    if (ch <= 1e-16 * (1.0 + w.norm())) break;
  }
  return assemble(d, z, q, p);
}

Mat StraighteningMap::jacobian(const Vec& s) const {
  const LocalGraphs& g = *g_;
  const Dims& d = g.dims();
  const int nz = d.manifold(), k = d.k, n = d.phase();
  const Vec z = zpart(d, s), q = qpart(d, s), p = ppart(d, s);
  const auto& D = g.data();
  const Vec u0 = q - g.f_minus(z, p);
  const Vec v0 = p - g.f_plus(z, q);
  // columns ordered (z, q, p)
  Mat Dz = Mat::Zero(nz, n);
  Dz.leftCols(nz).setIdentity();
  const Mat Fm = g.eval_jacobian(D.f_minus, z, p);  // k x (nz + k) in (z, p)
  const Mat Fp = g.eval_jacobian(D.f_plus, z, q);   // in (z, q)
  Mat Du0 = Mat::Zero(k, n), Dv0 = Mat::Zero(k, n);
  Du0.leftCols(nz) = -Fm.leftCols(nz);
  Du0.block(0, nz, k, k).setIdentity();
  Du0.rightCols(k) = -Fm.rightCols(k);
  Dv0.leftCols(nz) = -Fp.leftCols(nz);
  Dv0.block(0, nz, k, k) = -Fp.rightCols(k);
  Dv0.rightCols(k).setIdentity();
  const Mat Ep = g.eval_jacobian(D.eta_plus, z, u0);
  const Mat Em = g.eval_jacobian(D.eta_minus, z, v0);
  const Mat Dw = Dz + Ep.leftCols(nz) * Dz + Ep.rightCols(k) * Du0 + Em.leftCols(nz) * Dz + Em.rightCols(k) * Dv0;
  const Vec w = z + g.eta_plus(z, u0) + g.eta_minus(z, v0);
  const Mat Pp = g.eval_jacobian(D.phi_plus, w, u0);
  const Mat Pm = g.eval_jacobian(D.phi_minus, w, v0);
  Mat J(n, n);
  J.topRows(nz) = Dw;
  J.middleRows(nz, k) = Pp.leftCols(nz) * Dw + Pp.rightCols(k) * Du0;
  J.bottomRows(k) = Pm.leftCols(nz) * Dw + Pm.rightCols(k) * Dv0;
  return J;
}

StraighteningMap straighten(const ManifoldChart& chart, const Vec& z0) {
  return StraighteningMap(chart.graphs(z0));
}

}  // namespace shilnikov
