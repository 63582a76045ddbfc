#pragma once

#include <complex>

#include "shilnikov/system.hpp"

namespace shilnikov {

struct ThreeBodyParams {
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double mu = 0.0;
  double E = 0.0;

  void validate() const;
};

struct LeviCivitaImage {
  std::complex<double> q1, q2, p1, p2;
};

LeviCivitaImage levi_civita_forward(std::complex<double> x, std::complex<double> y,
                                    std::complex<double> xi, std::complex<double> eta,
                                    const ThreeBodyParams& params);

// Regularized (x, y, xi, eta) -> unregularized (q1, p1, q2, p2).
Vec levi_civita_state(const Vec& s, const ThreeBodyParams& params);

// Regularized planar 3-body Hamiltonian on (x, y, xi, eta), m = k = 2.
class ThreeBodySystem : public HamiltonianSystem {
 public:
  explicit ThreeBodySystem(ThreeBodyParams params);

  double energy(const Vec& s) const override;
  Vec gradient(const Vec& s) const override;
  bool has_jets() const override { return true; }
  Jet energy_jet(const std::vector<Jet>& s) const override;

  const ThreeBodyParams& params() const { return params_; }

 private:
  ThreeBodyParams params_;
};

double regularized_hamiltonian(const Vec& s, const ThreeBodyParams& params);

// Two Kepler problems plus the mu coupling, canonical pairs (q1, p1), (q2, p2).
class KeplerPairSystem : public HamiltonianSystem {
 public:
  explicit KeplerPairSystem(ThreeBodyParams params);

  double energy(const Vec& s) const override;
  Vec gradient(const Vec& s) const override;

  const ThreeBodyParams& params() const { return params_; }

 private:
  ThreeBodyParams params_;
};

// sqrt((E + 1/|x| - (1+mu)|y|^2/2) / (2 alpha1 alpha2)); NotHyperbolic off M_E.
double three_body_lambda(const ThreeBodyParams& params, const Vec& z);

// The regularized system in coordinates where the transverse quadratic part
// is -lambda(z) <q, p>. The change of variables is symplectic, generated by
// <x, y'> + s(x, y') <xi, eta'> with s = (c / a)^(1/4).
class AdaptedThreeBodySystem : public HamiltonianSystem {
 public:
  explicit AdaptedThreeBodySystem(ThreeBodyParams params);

  double energy(const Vec& s) const override;
  bool has_jets() const override { return true; }
  Jet energy_jet(const std::vector<Jet>& s) const override;

  Vec to_regularized(const Vec& s) const;
  Vec from_regularized(const Vec& r) const;

  const ThreeBodySystem& regularized() const { return base_; }

 private:
  ThreeBodySystem base_;
};

}  // namespace shilnikov
