#include "shilnikov/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "dop853_tableau.hpp"

namespace shilnikov {

namespace {

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
constexpr double kErrorExponent = -1.0 / 8.0;

double rms_norm(const Vec& v) { return v.norm() / std::sqrt(static_cast<double>(v.size())); }

double initial_step(const OdeRhs& f, double t0, const Vec& y0, const Vec& f0, double dir,
                    const IntegratorOptions& o) {
  const Vec scale = (o.atol + y0.array().abs() * o.rtol).matrix();
  const double d0 = rms_norm(y0.cwiseQuotient(scale));
  const double d1 = rms_norm(f0.cwiseQuotient(scale));
  const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Vec y1 = y0 + h0 * dir * f0;
  Vec f1(y0.size());
  f(t0 + h0 * dir, y1, f1);
  const double d2 = rms_norm((f1 - f0).cwiseQuotient(scale)) / h0;
  double h1;
  if (d1 <= 1e-15 && d2 <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
  return std::min(100 * h0, h1);
}

}  // namespace

IntegratorOptions IntegratorOptions::from_tol(double tol) {
  if (!(tol >= 1e-14 * 0.999 && tol <= 1e-6 * 1.001))
    throw SpecError("integrator tolerance must lie in [1e-14, 1e-6]");
  IntegratorOptions o;
  o.rtol = tol;
  o.atol = tol;
  return o;
}

Vec DenseSegment::operator()(double t) const {
  const double h = t_new - t_old;
  const double x = h == 0.0 ? 0.0 : (t - t_old) / h;
  Vec y = Vec::Zero(y_old.size());
  const int p = static_cast<int>(F.cols());
  for (int i = 0; i < p; ++i) {
    y += F.col(p - 1 - i);
    y *= (i % 2 == 0) ? x : (1.0 - x);
  }
  return y + y_old;
}

Vec OdeSolution::operator()(double tq) const {
  if (segments.empty()) {
    if (t.size() == 1 || tq == t.back()) return y.back();
    if (tq == t.front()) return y.front();
    throw SpecError("dense output not recorded");
  }
  const bool forward = t.back() >= t.front();
  // segments are ordered along the integration direction
  auto cmp = [forward](const DenseSegment& s, double v) { return forward ? s.t_new < v : s.t_new > v; };
  auto it = std::lower_bound(segments.begin(), segments.end(), tq, cmp);
  if (it == segments.end()) --it;
  return (*it)(tq);
}

OdeSolution solve_ode(const OdeRhs& f, double t0, const Vec& y0, double t1,
                      const IntegratorOptions& o, const OdeEvent* event) {
  namespace T = dop853;
  OdeSolution sol;
  sol.t.push_back(t0);
  sol.y.push_back(y0);
  if (t1 == t0) return sol;
  const int n = static_cast<int>(y0.size());
  const double dir = t1 > t0 ? 1.0 : -1.0;
  Mat K(n, T::kStagesExtended);
  Vec fcur(n);
  f(t0, y0, fcur);
  ++sol.nfev;
  double h_abs = o.first_step > 0 ? o.first_step : initial_step(f, t0, y0, fcur, dir, o);
  ++sol.nfev;
  h_abs = std::min(h_abs, o.max_step);
  double t = t0;
  Vec y = y0;
  Vec ynew(n), fnew(n), dy(n), tmp(n);
  double g_old = event ? event->g(t, y) : 0.0;
  long steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > o.max_steps) throw StepFailure("maximum number of steps exceeded");
    const double min_step = 10 * std::abs(std::nextafter(t, dir * kInf) - t);
    h_abs = std::max(h_abs, min_step);
    bool rejected = false;
    double h = 0.0;
    for (;;) {
      if (h_abs < min_step || !std::isfinite(h_abs)) throw StepFailure("step size underflow");
      h = h_abs * dir;
      double t_new = t + h;
      if (dir * (t_new - t1) > 0) t_new = t1;
      h = t_new - t;
      h_abs = std::abs(h);
      K.col(0) = fcur;
      for (int s = 1; s < T::kStages; ++s) {
        dy.setZero();
        for (int j = 0; j < s; ++j)
          if (T::A[s][j] != 0.0) dy += T::A[s][j] * K.col(j);
        tmp = y + h * dy;
        Vec ks(n);
        f(t + T::C[s] * h, tmp, ks);
        K.col(s) = ks;
      }
      dy.setZero();
      for (int j = 0; j < T::kStages; ++j) dy += T::B[j] * K.col(j);
      ynew = y + h * dy;
      f(t + h, ynew, fnew);
      K.col(T::kStages) = fnew;
      sol.nfev += T::kStages;
      bool finite = ynew.allFinite() && fnew.allFinite();
      double err = kInf;
      if (finite) {
        const Vec scale = (o.atol + y.array().abs().max(ynew.array().abs()) * o.rtol).matrix();
        Vec e5 = Vec::Zero(n), e3 = Vec::Zero(n);
        for (int j = 0; j <= T::kStages; ++j) {
          e5 += T::E5[j] * K.col(j);
          e3 += T::E3[j] * K.col(j);
        }
        e5 = e5.cwiseQuotient(scale);
        e3 = e3.cwiseQuotient(scale);
        const double n5 = e5.squaredNorm(), n3 = e3.squaredNorm();
        if (n5 == 0.0 && n3 == 0.0)
          err = 0.0;
        else
          err = h_abs * n5 / std::sqrt((n5 + 0.01 * n3) * n);
      }
      if (err < 1.0) {
        double factor = err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, kErrorExponent));
        if (rejected) factor = std::min(1.0, factor);
        h_abs = std::min(h_abs * factor, o.max_step);
        break;
      }
      ++sol.rejected;
      rejected = true;
      h_abs *= finite ? std::max(kMinFactor, kSafety * std::pow(err, kErrorExponent)) : 0.25;
    }
    const double t_new = t + h;
    const bool need_dense = o.dense || event;
    DenseSegment seg;
    if (need_dense) {
      for (int s = T::kStages + 1; s < T::kStagesExtended; ++s) {
        dy.setZero();
        for (int j = 0; j < s; ++j)
          if (T::A[s][j] != 0.0) dy += T::A[s][j] * K.col(j);
        tmp = y + h * dy;
        Vec ks(n);
        f(t + T::C[s] * h, tmp, ks);
        K.col(s) = ks;
      }
      sol.nfev += T::kStagesExtended - T::kStages - 1;
      seg.t_old = t;
      seg.t_new = t_new;
      seg.y_old = y;
      seg.F.resize(n, T::kInterpolatorPower);
      const Vec dlt = ynew - y;
      seg.F.col(0) = dlt;
      seg.F.col(1) = h * fcur - dlt;
      seg.F.col(2) = 2 * dlt - h * (fnew + fcur);
      for (int r = 0; r < 4; ++r) {
        dy.setZero();
        for (int j = 0; j < T::kStagesExtended; ++j)
          if (T::D[r][j] != 0.0) dy += T::D[r][j] * K.col(j);
        seg.F.col(3 + r) = h * dy;
      }
    }
    if (event) {
      const double g_new = event->g(t_new, ynew);
      const bool up = g_old < 0 && g_new >= 0;
      const bool down = g_old > 0 && g_new <= 0;
      const bool hit = (event->direction >= 0 && up) || (event->direction <= 0 && down);
      if (hit) {
        auto gt = [&](double tq) { return event->g(tq, seg(tq)); };
        double a = t, b = t_new, ga = g_old, gb = g_new;
        if (a > b) {
          std::swap(a, b);
          std::swap(ga, gb);
        }
        double root;
        if (gb == 0.0) {
          root = b;
        } else if (ga == 0.0) {
          root = a;
        } else {
          boost::uintmax_t iters = 200;
          auto tolf = [&](double lo, double hi) {
            return std::abs(hi - lo) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
          };
          auto br = boost::math::tools::toms748_solve(gt, a, b, ga, gb, tolf, iters);
          const double g1 = std::abs(gt(br.first)), g2 = std::abs(gt(br.second));
          root = g1 <= g2 ? br.first : br.second;
        }
        sol.event_hit = true;
        sol.event_t = root;
        sol.event_y = seg(root);
        if (need_dense) {
          seg.t_new = t_new;
          sol.segments.push_back(seg);
        }
        sol.t.push_back(t_new);
        sol.y.push_back(ynew);
        return sol;
      }
      g_old = g_new;
    }
    if (o.dense) sol.segments.push_back(std::move(seg));
    t = t_new;
    y = ynew;
    fcur = fnew;
    sol.t.push_back(t);
    sol.y.push_back(y);
  }
  return sol;
}

Trajectory::Trajectory(Dims dims, OdeSolution sol, double energy0, double max_drift)
    : dims_(dims), sol_(std::move(sol)), energy0_(energy0), max_drift_(max_drift) {}

void Trajectory::write_csv(const std::string& path, const HamiltonianSystem& sys, int samples_per_step) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "t";
  const char* names[] = {"x", "y", "q", "p"};
  const int counts[] = {dims_.m, dims_.m, dims_.k, dims_.k};
  for (int b = 0; b < 4; ++b)
    for (int i = 0; i < counts[b]; ++i) out << "," << names[b] << i + 1;
  out << ",H\n";
  out.precision(17);
  auto row = [&](double t, const Vec& s) {
    out << t;
    for (int i = 0; i < s.size(); ++i) out << "," << s[i];
    out << "," << sys.energy(s) << "\n";
  };
  const auto& T = sol_.t;
  for (size_t i = 0; i < T.size(); ++i) {
    row(T[i], sol_.y[i]);
    if (i + 1 < T.size() && samples_per_step > 1 && !sol_.segments.empty()) {
      for (int j = 1; j < samples_per_step; ++j) {
        const double tq = T[i] + (T[i + 1] - T[i]) * j / samples_per_step;
        row(tq, sol_(tq));
      }
    }
  }
}

Trajectory integrate(const HamiltonianSystem& sys, const Vec& s0, double t0, double t1, double tol) {
  return integrate(sys, s0, t0, t1, IntegratorOptions::from_tol(tol));
}

Trajectory integrate(const HamiltonianSystem& sys, const Vec& s0, double t0, double t1,
                     const IntegratorOptions& opts) {
  OdeRhs f = [&sys](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); };
  OdeSolution sol = solve_ode(f, t0, s0, t1, opts);
  const double H0 = sys.energy(s0);
  double drift = 0.0;
  for (const Vec& y : sol.y) drift = std::max(drift, std::abs(sys.energy(y) - H0));
  return Trajectory(sys.dims(), std::move(sol), H0, drift);
}

Vec flow(const HamiltonianSystem& sys, const Vec& s0, double t, double tol) {
  auto opts = IntegratorOptions::from_tol(tol);
  opts.dense = false;
  OdeRhs f = [&sys](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); };
  return solve_ode(f, 0.0, s0, t, opts).final_state();
}

VariationalFlow flow_variational(const HamiltonianSystem& sys, const Vec& s0, double t, double tol) {
  return flow_variational(sys, s0, t, IntegratorOptions::from_tol(tol));
}

VariationalFlow flow_variational(const HamiltonianSystem& sys, const Vec& s0, double t,
                                 IntegratorOptions opts) {
  opts.dense = false;
  const int n = sys.dims().phase();
  const Mat Jm = poisson_matrix(sys.dims());
  OdeRhs f = [&](double, const Vec& y, Vec& dy) {
    const Vec s = y.head(n);
    dy.resize(y.size());
    dy.head(n) = sys.vector_field(s);
    const Mat A = Jm * sys.hessian(s);
    Eigen::Map<const Mat> Phi(y.data() + n, n, n);
    Eigen::Map<Mat> dPhi(dy.data() + n, n, n);
    dPhi = A * Phi;
  };
  Vec y0(n + n * n);
  y0.head(n) = s0;
  Eigen::Map<Mat>(y0.data() + n, n, n).setIdentity();
  const Vec yt = solve_ode(f, 0.0, y0, t, opts).final_state();
  return {yt.head(n), Eigen::Map<const Mat>(yt.data() + n, n, n)};
}

ActionFlow flow_action(const HamiltonianSystem& sys, const Vec& s0, double t, double tol) {
  return flow_action(sys, s0, t, IntegratorOptions::from_tol(tol));
}

ActionFlow flow_action(const HamiltonianSystem& sys, const Vec& s0, double t, IntegratorOptions opts) {
  opts.dense = false;
  const Dims d = sys.dims();
  const int n = d.phase();
  OdeRhs f = [&](double, const Vec& y, Vec& dy) {
    const Vec s = y.head(n);
    const Vec v = sys.vector_field(s);
    dy.resize(n + 1);
    dy.head(n) = v;
    dy[n] = s.segment(d.y0(), d.m).dot(v.segment(d.x0(), d.m)) +
            s.segment(d.p0(), d.k).dot(v.segment(d.q0(), d.k));
  };
  Vec y0(n + 1);
  y0.head(n) = s0;
  y0[n] = 0.0;
  const Vec yt = solve_ode(f, 0.0, y0, t, opts).final_state();
  return {yt.head(n), yt[n]};
}

double SectionSpec::eval(const Dims& d, const Vec& s) const {
  switch (kind) {
    case Kind::QNorm: return s.segment(d.q0(), d.k).norm() - r;
    case Kind::PNorm: return s.segment(d.p0(), d.k).norm() - r;
    case Kind::Custom: return g(s);
  }
  return kNaN;
}

SectionHit integrate_to_section(const HamiltonianSystem& sys, const Vec& s0,
                                const SectionSpec& section, double max_time, double tol) {
  if (section.kind != SectionSpec::Kind::Custom && !(section.r > 0))
    throw SpecError("section radius must be positive");
  auto opts = IntegratorOptions::from_tol(tol);
  opts.dense = false;
  const Dims d = sys.dims();
  OdeRhs f = [&sys](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); };
  OdeEvent ev;
  ev.g = [&](double, const Vec& y) { return section.eval(d, y); };
  // In backward time a crossing in the requested direction shows up reversed.
  ev.direction = max_time >= 0 ? section.direction : -section.direction;
  const OdeSolution sol = solve_ode(f, 0.0, s0, max_time, opts, &ev);
  if (!sol.event_hit) throw NoCrossing("section not reached within max_time");
  SectionHit hit;
  hit.time = sol.event_t;
  hit.state = sol.event_y;
  const Vec v = sys.vector_field(hit.state);
  const double scale = std::max(1e-300, hit.state.norm());
  const double eps = 1e-7 * scale / std::max(1e-300, v.norm());
  hit.rate = (section.eval(d, hit.state + eps * v) - section.eval(d, hit.state - eps * v)) / (2 * eps);
  if (std::abs(hit.rate) < 1e-8 * section.r) throw Tangency("non-transverse section crossing");
  return hit;
}

}  // namespace shilnikov
