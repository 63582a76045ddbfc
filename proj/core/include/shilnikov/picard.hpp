#pragma once

#include <functional>
#include <vector>

#include "shilnikov/manifold.hpp"

namespace shilnikov {

// Flow of a system in straightened coordinates (w, u, v) after the time change d tau = lambda(w) dt.
class StraightenedSystem {
 public:
  StraightenedSystem(const ManifoldChart& chart, const Vec& z0);

  const Dims& dims() const { return phi_.graphs().dims(); }
  const StraighteningMap& map() const { return phi_; }
  double lambda(const Vec& w) const { return phi_.graphs().lambda_at(w); }
  // d/d tau of (w, u, v).
  Vec rhs(const Vec& t) const;

 private:
  const HamiltonianSystem* sys_;
  StraighteningMap phi_;
};

struct PicardOptions {
  double tol = 1e-12;  // sup-norm distance between successive iterates
  double h = 0.01;     // grid spacing in tau
  int max_iter = 200;
};

struct StraightenedSolution {
  Dims dims;
  double calT = 0.0;
  std::vector<double> tau;
  Mat w, u, v;  // one column per grid point
  int iterations = 0;
  double lipschitz = 0.0;  // largest ratio of successive increments
  std::vector<double> increments;

  Vec state(std::size_t i) const;
  std::size_t size() const { return tau.size(); }
  std::size_t mid_index() const { return tau.size() / 2; }
  // Boundary records: index 0 is tau = -calT, the last is tau = calT.
  Vec w_plus() const { return w.col(0); }
  Vec w_minus() const { return w.col(w.cols() - 1); }
  Vec u_plus() const { return u.col(0); }
  Vec u_minus() const { return u.col(u.cols() - 1); }
  Vec v_plus() const { return v.col(0); }
  Vec v_minus() const { return v.col(v.cols() - 1); }
};

// Fixed point of the integral equations for w(0) = w0, u(-calT) = u_plus, v(calT) = v_minus in the rescaled
// variables u = e^{-tau - calT} xi, v = e^{tau - calT} eta.
StraightenedSolution shilnikov_iterate(const StraightenedSystem& sys, const Vec& w0, const Vec& u_plus,
                                       const Vec& v_minus, double calT, const PicardOptions& opts = {});

// Physical times t = int_0^tau ds / lambda(w(s)) at the grid points.
std::vector<double> time_reparametrization(const StraightenedSolution& sol,
                                           const std::function<double(const Vec&)>& lambda);
std::vector<double> time_reparametrization(const StraightenedSolution& sol, const StraightenedSystem& sys);

// Cumulative fourth order quadrature on a uniform grid; out[i] = integral from tau[0] to tau[i].
Mat cumulative_integral(const Mat& f, double h);

}  // namespace shilnikov
