#pragma once

#include "shilnikov/system.hpp"

namespace shilnikov {

// Synthetic system with m = 1, k = 2 used for shadowing studies. With
// Q = (q + p)/sqrt(2), P = (p - q)/sqrt(2), s = |Q|^2, G(z) = (y^2 - x^2)/2:
//   H = lambda(z) K,  lambda(z) = 1 + lambda2 |z|^2
//   K = |P|^2/2 - s/2 + step(s; 0.09, 0.49) s^2/4
//       + delta bump(s; 0.3, 2.4) (Q1^4 - 6 Q1^2 Q2^2 + Q2^4)/4
//       + omega bump(s; 0.6, 1.8) (Q1 P2 - Q2 P1)
//       + eps_z bump(s; 0.5, 1.9) G(z)
// For s < 0.09 the Hamiltonian is exactly -lambda(z) <q, p>. The radial
// homoclinic loops of the rotation invariant part are turned by omega and
// selected by the anisotropy delta; z = 0 is invariant and the scattering map
// linearizes there to exp(c [[0, 1], [1, 0]]).
struct GluedParams {
  double omega = 3.0;
  double delta = 0.15;
  double eps_z = 0.4;
  double lambda2 = 0.1;
};

class GluedSystem : public HamiltonianSystem {
 public:
  explicit GluedSystem(GluedParams params = {});

  double energy(const Vec& s) const override;
  Vec gradient(const Vec& s) const override;
  Mat hessian(const Vec& s) const override;
  bool has_jets() const override { return true; }
  Jet energy_jet(const std::vector<Jet>& s) const override;

  const GluedParams& params() const { return params_; }
  double lambda_at(const Vec& z) const { return 1.0 + params_.lambda2 * z.squaredNorm(); }
  // Weight of the z coupling at state s; its time integral along a loop at z = 0 is the exponent c.
  double coupling_weight(const Vec& s) const;

 private:
  GluedParams params_;
};

// Smooth step 0 -> 1 on [a, b] and bump with peak 1 at (a + b)/2, supported on (a, b).
double smooth_step(double s, double a, double b);
double smooth_bump(double s, double a, double b);

}  // namespace shilnikov
