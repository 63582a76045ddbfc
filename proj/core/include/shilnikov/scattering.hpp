#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shilnikov/genfun.hpp"

namespace shilnikov {

// Stereographic chart of the sphere |v| = r in R^k, projecting from -pole:
//   v(xi) = r ((1 - |xi|^2) e + 2 U xi) / (1 + |xi|^2),  xi in R^(k-1)
// with e the unit pole and the columns of U an orthonormal basis of e^perp.
class SphereChart {
 public:
  SphereChart() = default;
  SphereChart(const Vec& pole, double r);

  int k() const { return static_cast<int>(e_.size()); }
  int dim() const { return k() - 1; }
  double r() const { return r_; }
  const Vec& pole() const { return e_; }

  Vec point(const Vec& xi) const;
  Mat jacobian(const Vec& xi) const;  // k x (k - 1)
  Vec coords(const Vec& v) const;     // v is projected radially first
  // Momentum conjugate to xi: eta = Dv(xi)^T w.
  Vec conjugate(const Vec& xi, const Vec& w) const { return jacobian(xi).transpose() * w; }

 private:
  Vec e_;
  Mat U_;
  double r_ = 0.1;
};

struct HeteroclinicGuess {
  Vec z_minus;      // corner the orbit leaves
  Vec p_exit;       // exit point on |p| = r, projected onto the sphere
  double flight_time = 0.0;
};

struct HeteroclinicOptions {
  double tol = 1e-10;
  double integrator_tol = 1e-12;
  int max_iter = 30;
  double transversality_threshold = 1e-6;
};

struct HeteroclinicOrbit {
  Vec c_minus, c_plus;
  Vec exit_state;   // on W-_loc(c_minus) with |p| = r
  Vec entry_state;  // on W+_loc(c_plus) with |q| = r
  double flight_time = 0.0;
  Vec v_minus, v_plus;  // limit directions at the two ends
  double residual = 0.0;
  double min_singular_value = 0.0;
  int iterations = 0;

  Trajectory trajectory(const HamiltonianSystem& sys, double tol = 1e-12) const;
};

// Gauss-Newton on (exit direction, flight time) so that the orbit from the
// W- graph lands on the W+ graph at |q| = r. Raises Tangency when the
// smallest singular value of the matching Jacobian is below the threshold.
HeteroclinicOrbit find_heteroclinic(const ManifoldChart& chart_minus, const ManifoldChart& chart_plus,
                                    const HeteroclinicGuess& guess, const HeteroclinicOptions& opts = {});

struct HeteroclinicChain {
  std::vector<HeteroclinicOrbit> orbits;  // orbit i leaves corner i and arrives at corner i + 1 (mod n)
  bool periodic = true;

  int size() const { return static_cast<int>(orbits.size()); }
  Vec corner(int i) const;
  // max over corners of |c_plus(i - 1) - c_minus(i)|
  double corner_mismatch() const;
};

// omega(v+, v-) = -<v+, v->.
double symplectic_angle(const Vec& v_plus, const Vec& v_minus);
// Angle at corner i between the arrival of orbit i - 1 and the departure of orbit i.
double symplectic_angle(const HeteroclinicChain& chain, int i);

struct Positivity {
  bool positive = false;
  double margin = 0.0;  // min_i a_i
};
Positivity chain_positive(const HeteroclinicChain& chain);

// Poincare map between the exit sphere |p| = r around one corner and the entry
// sphere |q| = r around the next, in mixed variables
//   X = (y-, xi-, x+, xi+),  p- = S-(xi-), q+ = S+(xi+).
// An optional symmetric shear on the exit block replaces y- by y- - shear x-.
struct PoincareSolve {
  Vec B_minus, B_plus;
  double tau = 0.0;
  double value = 0.0;  // <x-, y-> + <q-, p-> + int alpha (- x-^T shear x- / 2)
  Vec conjugate;       // (x-, eta-, y+, eta+)
  double twist_det = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct PoincareOptions {
  double tol = 1e-12;
  double rtol = 1e-13;
  double atol = 1e-16;
  int max_iter = 30;
  double twist_threshold = 1e-8;
};

class PoincareMap {
 public:
  PoincareMap(SystemPtr sys, SphereChart exit, SphereChart entry, Vec exit_state, double tau,
              PoincareOptions opts = {});

  const HamiltonianSystem& system() const { return *sys_; }
  const SphereChart& exit_chart() const { return exit_; }
  const SphereChart& entry_chart() const { return entry_; }
  int arity() const { return 2 * sys_->dims().m + exit_.dim() + entry_.dim(); }
  const Vec& base_exit() const { return exit0_; }
  const Vec& base_entry() const { return entry0_; }
  double base_time() const { return tau0_; }
  Vec base_variables() const { return variables(exit0_, entry0_); }
  const Mat& shear() const { return shear_; }
  void set_shear(const Mat& shear) { shear_ = shear; }

  // Mixed variables of a pair of section points.
  Vec variables(const Vec& B_minus, const Vec& B_plus) const;
  // Exit point for given y-, p- and unknowns x-, q- (shear applied).
  Vec exit_point(const Vec& X, const Vec& x_minus, const Vec& q_minus) const;

  PoincareSolve solve(const Vec& X, double mu, const PoincareSolve* warm = nullptr) const;

 private:
  SystemPtr sys_;
  SphereChart exit_, entry_;
  Vec exit0_, entry0_;
  double tau0_;
  PoincareOptions opts_;
  Mat shear_;
};

GenFunValue poincare_F_mu(const PoincareMap& map, const Vec& X, double mu);
GenFunRecord make_F_mu(std::shared_ptr<const PoincareMap> map, double mu);

// Map for the global part of a heteroclinic orbit with spheres centred on its section points.
// The twist condition is checked at the base; when it fails a random shear is tried up to
// max_tries times (seeded), raising TransversalityFailure if none works.
std::shared_ptr<PoincareMap> poincare_map_for(SystemPtr sys, const HeteroclinicOrbit& orbit, double r,
                                              std::uint64_t seed = 0, int max_tries = 8,
                                              PoincareOptions opts = {});

struct BranchOptions {
  double tol = 1e-11;
  int max_iter = 20;
  double fd_step = 1e-6;
  double degeneracy_threshold = 1e-10;
  GenFunOptions genfun;
};

struct BranchPoint {
  Vec z_minus, z_plus;  // (x-, y-) and its image (x+, y+)
  double S = 0.0;
  Vec X;                // inner critical point
  Mat inner_hessian;
  double inner_min_singular = 0.0;
  int iterations = 0;
};

// Local scattering map near a heteroclinic orbit given by its generating
// function S(x-, y+), dS = y- dx- + x+ dy+, as the critical value over X of
//   G(X) = S-(x-, y-, p-) - F0(X) + S+(x+, y+, q+).
class ScatteringBranch {
 public:
  ScatteringBranch(ChartPtr chart_minus, ChartPtr chart_plus, std::shared_ptr<const PoincareMap> map,
                   BranchOptions opts = {});

  const Dims& dims() const { return chart_minus_->dims(); }
  const PoincareMap& map() const { return *map_; }
  const ManifoldChart& chart_minus() const { return *chart_minus_; }
  const ManifoldChart& chart_plus() const { return *chart_plus_; }

  // Value and gradient of G at X for corner data (x-, y+).
  double G(const Vec& x_minus, const Vec& y_plus, const Vec& X, Vec* grad = nullptr, Vec* z_minus = nullptr,
           Vec* z_plus = nullptr) const;

  BranchPoint evaluate(const Vec& x_minus, const Vec& y_plus, const Vec* X_guess = nullptr) const;

  // (d y- / d(x-, y+), d x+ / d(x-, y+)) as the Hessian of S, by central differences.
  Mat S_hessian(const Vec& x_minus, const Vec& y_plus, double h = 1e-5) const;
  // Jacobian of (x-, y-) -> (x+, y+).
  Mat DF(const Vec& x_minus, const Vec& y_plus, double h = 1e-5) const;

  GenFunRecord record() const;

 private:
  ChartPtr chart_minus_, chart_plus_;
  std::shared_ptr<const PoincareMap> map_;
  BranchOptions opts_;
  Vec X0_;
};

// Jacobian of the map from the Hessian blocks a = S_xx, b = S_xy, c = S_yy.
Mat branch_jacobian(const Mat& S_hess, int m);

}  // namespace shilnikov
