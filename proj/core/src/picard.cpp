#include "shilnikov/picard.hpp"

#include <cmath>

#include "shilnikov/errors.hpp"

namespace shilnikov {

StraightenedSystem::StraightenedSystem(const ManifoldChart& chart, const Vec& z0)
    : sys_(&chart.system()), phi_(straighten(chart, z0)) {}

Vec StraightenedSystem::rhs(const Vec& t) const {
  const Vec s = phi_.inverse(t);
  const Vec X = sys_->vector_field(s);
  return phi_.push_forward(s, X) / lambda(zpart(dims(), t));
}

Vec StraightenedSolution::state(std::size_t i) const {
  const auto c = static_cast<Eigen::Index>(i);
  return assemble(dims, w.col(c), u.col(c), v.col(c));
}

Mat cumulative_integral(const Mat& f, double h) {
  const Eigen::Index M = f.cols() - 1;
  if (M < 3) throw SpecError("cumulative quadrature needs at least four nodes");
  Mat out = Mat::Zero(f.rows(), f.cols());
  for (Eigen::Index i = 0; i < M; ++i) {
    Vec panel;
    if (i == 0)
      panel = 9 * f.col(0) + 19 * f.col(1) - 5 * f.col(2) + f.col(3);
    else if (i == M - 1)
      panel = f.col(M - 3) - 5 * f.col(M - 2) + 19 * f.col(M - 1) + 9 * f.col(M);
    else
      panel = -f.col(i - 1) + 13 * f.col(i) + 13 * f.col(i + 1) - f.col(i + 2);
    out.col(i + 1) = out.col(i) + (h / 24.0) * panel;
  }
  return out;
}

StraightenedSolution shilnikov_iterate(const StraightenedSystem& sys, const Vec& w0, const Vec& u_plus,
                                       const Vec& v_minus, double calT, const PicardOptions& opts) {
  const Dims& d = sys.dims();
  if (w0.size() != d.manifold() || u_plus.size() != d.k || v_minus.size() != d.k)
    throw SpecError("straightened boundary data has wrong dimensions");
  if (!(calT >= 1.0)) throw SpecError("rescaled half time must be at least 1");
  int M = static_cast<int>(std::ceil(2 * calT / opts.h));
  M = std::max(M + (M % 2), 4);
  const double h = 2 * calT / M;
  const int mid = M / 2;
  const int nz = d.manifold(), k = d.k;
  const double r = std::max(u_plus.norm(), v_minus.norm());

  StraightenedSolution sol;
  sol.dims = d;
  sol.calT = calT;
  sol.tau.resize(static_cast<std::size_t>(M + 1));
  for (int i = 0; i <= M; ++i) sol.tau[static_cast<std::size_t>(i)] = -calT + i * h;

  Mat W = w0.replicate(1, M + 1);
  Mat Xi = u_plus.replicate(1, M + 1);
  Mat Eta = v_minus.replicate(1, M + 1);
  Mat fw(nz, M + 1), fxi(k, M + 1), feta(k, M + 1);

  double prev = kInf;
  int growth = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (int i = 0; i <= M; ++i) {
      const double tau = sol.tau[static_cast<std::size_t>(i)];
      const double eu = std::exp(-tau - calT), ev = std::exp(tau - calT);
      const Vec u = eu * Xi.col(i), v = ev * Eta.col(i);
      const Vec R = sys.rhs(assemble(d, W.col(i), u, v));
      fw.col(i) = R.head(nz);
      fxi.col(i) = (R.segment(nz, k) + u) / eu;
      feta.col(i) = (R.tail(k) - v) / ev;
    }
    const Mat Iw = cumulative_integral(fw, h);
    const Mat Ixi = cumulative_integral(fxi, h);
    const Mat Ieta = cumulative_integral(feta, h);
    Mat Wn(nz, M + 1), Xin(k, M + 1), Etan(k, M + 1);
    for (int i = 0; i <= M; ++i) {
      Wn.col(i) = w0 + Iw.col(i) - Iw.col(mid);
      Xin.col(i) = u_plus + Ixi.col(i);
      Etan.col(i) = v_minus + Ieta.col(i) - Ieta.col(M);
    }
    const double diff = std::max({(Wn - W).cwiseAbs().maxCoeff(), (Xin - Xi).cwiseAbs().maxCoeff(),
                                  (Etan - Eta).cwiseAbs().maxCoeff()});
    W = std::move(Wn);
    Xi = std::move(Xin);
    Eta = std::move(Etan);
    sol.increments.push_back(diff);
    sol.iterations = it;
    if (std::isfinite(prev) && prev > 0) sol.lipschitz = std::max(sol.lipschitz, diff / prev);
    if (!std::isfinite(diff)) throw ContractionFailure("Picard iterate is not finite");
    if (diff <= opts.tol) break;
    growth = diff > prev ? growth + 1 : 0;
    const double ball = std::max({(W.colwise() - w0).cwiseAbs().maxCoeff(), Xi.cwiseAbs().maxCoeff(),
                                  Eta.cwiseAbs().maxCoeff()});
    if (growth >= 3 || (r > 0 && ball > 4 * r))
      throw ContractionFailure("Picard iterates diverge, Lipschitz estimate " + std::to_string(diff / prev));
    prev = diff;
    if (it == opts.max_iter)
      throw ContractionFailure("Picard iteration did not reach tolerance, Lipschitz estimate " +
                               std::to_string(sol.lipschitz));
  }

  sol.w = W;
  sol.u.resize(k, M + 1);
  sol.v.resize(k, M + 1);
  for (int i = 0; i <= M; ++i) {
    const double tau = sol.tau[static_cast<std::size_t>(i)];
    sol.u.col(i) = std::exp(-tau - calT) * Xi.col(i);
    sol.v.col(i) = std::exp(tau - calT) * Eta.col(i);
  }
  return sol;
}

std::vector<double> time_reparametrization(const StraightenedSolution& sol,
                                           const std::function<double(const Vec&)>& lambda) {
  const auto n = static_cast<Eigen::Index>(sol.size());
  Mat f(1, n);
  for (Eigen::Index i = 0; i < n; ++i) f(0, i) = 1.0 / lambda(sol.w.col(i));
  const double h = sol.tau[1] - sol.tau[0];
  const Mat I = cumulative_integral(f, h);
  const double at0 = I(0, static_cast<Eigen::Index>(sol.mid_index()));
  std::vector<double> t(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = I(0, i) - at0;
  return t;
}

std::vector<double> time_reparametrization(const StraightenedSolution& sol, const StraightenedSystem& sys) {
  return time_reparametrization(sol, [&sys](const Vec& w) { return sys.lambda(w); });
}

}  // namespace shilnikov
