#pragma once

#include <vector>

#include "shilnikov/integrator.hpp"
#include "shilnikov/manifold.hpp"

namespace shilnikov {

struct ConeParams {
  double nu = 0.3;
  double kappa = 0.3;
};

// Throws ConeViolation unless nu r <= |q+|, |p-| <= r and sign * <q+, p-> >= kappa r^2,
// with sign = -1 for positive energy and +1 for negative energy.
void check_cone(const Vec& q_plus, const Vec& p_minus, double r, const ConeParams& cone, int energy_sign = 1);

struct BvpOptions {
  double tol = 1e-12;   // Newton residual
  double rtol = 1e-13;  // integrator
  double atol = 1e-17;
  int max_iter = 40;
  ConeParams cone;
  bool check_cone = true;
};

// Boundary conditions on components of the state at -T (left), 0 (mid) and T (right).
struct ShootingBC {
  std::vector<int> left_idx, mid_idx, right_idx;
  Vec left_val, mid_val, right_val;
};

struct ConnectionSolution {
  Dims dims;
  double T = 0.0;   // half time: the orbit runs over [-T, T]
  double mu = 0.0;  // energy along the orbit
  Vec z0, q_plus, p_minus;
  Vec A_plus, A_minus, mid;  // states at -T, T and 0
  Vec s_a, s_b;              // states at -T/2 and T/2
  double residual = 0.0;
  int iterations = 0;
  double dH_dT = kNaN;
  std::vector<Trajectory> pieces;  // [-T, -T/2], [-T/2, T/2], [T/2, T] when requested

  // Dense evaluation; requires pieces.
  Vec at(double t) const;
  void build_pieces(const HamiltonianSystem& sys, double tol);
};

// Multiple shooting on [-T, -T/2], [-T/2, T/2], [T/2, T].
ConnectionSolution shoot(const HamiltonianSystem& sys, const ShootingBC& bc, double T, const Vec& s_a0,
                         const Vec& s_b0, const BvpOptions& opts);
// Same, raising ChartExit when an iterate leaves the chart tube.
ConnectionSolution shoot(const HamiltonianSystem& sys, const ShootingBC& bc, double T, const Vec& s_a0,
                         const Vec& s_b0, const BvpOptions& opts, const ManifoldChart* chart);

ConnectionSolution solve_fixed_time(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus,
                                    const Vec& p_minus, double T, const BvpOptions& opts = {});

ConnectionSolution solve_fixed_energy(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus,
                                      const Vec& p_minus, double mu, const BvpOptions& opts = {});

// Endpoint problem x(-T) = x+, q(-T) = q+, y(T) = y-, p(T) = p-.
ConnectionSolution solve_endpoint_fixed_time(const ManifoldChart& chart, const Vec& x_plus, const Vec& y_minus,
                                             const Vec& q_plus, const Vec& p_minus, double T,
                                             const BvpOptions& opts = {});

ConnectionSolution solve_endpoint_fixed_energy(const ManifoldChart& chart, const Vec& x_plus,
                                               const Vec& y_minus, const Vec& q_plus, const Vec& p_minus,
                                               double mu, const BvpOptions& opts = {});

// Leading-order passage half time (|ln mu| + ln(-lambda <v+, v->)) / (2 lambda).
double asymptotic_T(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus, const Vec& p_minus, double mu,
                    const ConeParams& cone = {}, bool enforce_cone = true);

}  // namespace shilnikov
