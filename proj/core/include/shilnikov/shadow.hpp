#pragma once

#include <functional>
#include <vector>

#include "shilnikov/scattering.hpp"

namespace shilnikov {

// One corner-to-corner branch S(x, y'), dS = y dx + x' dy', returning the
// value with y = dS/dx and x' = dS/dy'.
struct BranchEval {
  double S = 0.0;
  Vec y_minus;
  Vec x_plus;
};
using BranchFunction = std::function<BranchEval(const Vec& x, const Vec& y_next)>;

BranchFunction branch_function(std::shared_ptr<const ScatteringBranch> branch);

struct DiscreteOrbitProblem {
  int m = 1;
  std::vector<BranchFunction> branches;  // branch i maps corner i to corner i + 1 (mod n)
  std::vector<Vec> guesses;              // corners z_i = (x_i, y_i)
  double fd_step = 1e-5;
  int max_iter = 30;
  double degeneracy_cond = 1e10;

  int n() const { return static_cast<int>(branches.size()); }
};

struct DiscreteOrbit {
  std::vector<Vec> corners;
  Mat hessian;              // of sum_i S_i(x_i, y_{i+1}) - <x_i, y_i>
  Mat DFn;                  // composed branch Jacobian at the corners
  double det_DFn_minus_I = 0.0;
  double hessian_cond = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool nondegenerate = false;
};

Vec discrete_action_gradient(const DiscreteOrbitProblem& problem, const Vec& z);
// Raises DegenerateOrbit when the Hessian condition number exceeds the threshold.
DiscreteOrbit solve_discrete_action(const DiscreteOrbitProblem& problem, double tol);

// Shadowing periodic orbit of a chain with n corners at energy mu. Corner i
// carries a chart; map i runs from the exit sphere at corner i to the entry
// sphere at corner i + 1. Unknowns X = (X_0, ..., X_{n-1}) in the variables of the maps.
struct ShadowProblem {
  SystemPtr system;
  std::vector<ChartPtr> charts;
  std::vector<std::shared_ptr<const PoincareMap>> maps;
  double mu = 1e-4;
  Vec X0;
  BvpOptions bvp;

  int n() const { return static_cast<int>(maps.size()); }
};

struct ShadowOptions {
  double tol = 1e-11;  // on the gradient of the shadow functional
  int max_iter = 25;
  double fd_step = 1e-7;
  double armijo = 1e-4;
  bool build_pieces = true;
  double integrator_tol = 1e-12;
};

struct CornerPassage {
  ConnectionSolution local;
  PoincareSolve global;  // segment leaving this corner
};

struct ShadowOrbit {
  double mu = 0.0;
  Vec X;
  std::vector<CornerPassage> passages;
  std::vector<Trajectory> global_pieces;
  std::vector<double> passage_times;  // 2 T_i
  double period = 0.0;
  double gradient_norm = 0.0;
  double closure = 0.0;
  double energy_defect = 0.0;
  int iterations = 0;

  // Uniform samples of the closed orbit; local pieces need build_pieces.
  std::vector<Vec> samples(double dt) const;
};

struct ShadowEval {
  Vec gradient;
  std::vector<ConnectionSolution> local;
  std::vector<PoincareSolve> global;
};

// Gradient of A_mu(X) = sum_i R_i(Z_i) - F_i(X_i): mismatches of conjugate coordinates.
ShadowEval shadow_gradient(const ShadowProblem& problem, const Vec& X, const ShadowEval* warm = nullptr);

ShadowOrbit solve_shadow(const ShadowProblem& problem, const ShadowOptions& opts = {});

// Curve of a chain: corner points, global orbits and asymptotic tails.
struct ChainCurve {
  std::vector<Trajectory> pieces;
  std::vector<Vec> points;
};
ChainCurve chain_curve(const HamiltonianSystem& sys, const HeteroclinicChain& chain, double tail_time,
                       double tol = 1e-12);

struct ShadowDistance {
  double d_global = 0.0;
  double d_outside = 0.0;
};

// Distances from orbit samples to the chain curve; d_outside uses samples
// with |(q, p)| > tube_radius.
ShadowDistance shadowing_distance(const ShadowOrbit& orbit, const ChainCurve& curve, double tube_radius,
                                  double dt = 0.01);

struct MultiplierSpectrum {
  std::vector<double> log_abs;  // log |rho|, sorted decreasing
  std::vector<int> sign;        // sign of rho (real multipliers)
  double pairing_defect = 0.0;  // max |log|rho_i| + log|rho_{N-1-i}||
  double monodromy_defect = 0.0;  // |M^T Omega M - Omega| / |M|^2
  int rounds = 0;

  double value(int i) const { return sign[i] * std::exp(log_abs[i]); }
};

// Nontrivial multipliers of the return map to {|p| = r} within H = mu at the exit of corner 0, by periodic
// orthogonal iteration over short-segment transition matrices: the expanding half from the forward
// factors, the contracting half as the dominant part of the inverse map from backward ones.
MultiplierSpectrum multiplier_spectrum(const HamiltonianSystem& sys, const ShadowOrbit& orbit,
                                       double max_dt = 1.0, double tol = 1e-12);

}  // namespace shilnikov
