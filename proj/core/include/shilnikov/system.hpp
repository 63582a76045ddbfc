#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shilnikov/errors.hpp"
#include "shilnikov/jet.hpp"
#include "shilnikov/types.hpp"

namespace shilnikov {

class HamiltonianSystem {
 public:
  HamiltonianSystem(Dims dims, std::string label);
  virtual ~HamiltonianSystem() = default;

  const Dims& dims() const { return dims_; }
  const std::string& label() const { return label_; }

  virtual double energy(const Vec& s) const = 0;
  virtual Vec gradient(const Vec& s) const;
  virtual Mat hessian(const Vec& s) const;

  // Systems whose energy can be evaluated on jets support Taylor expansion.
  virtual bool has_jets() const { return false; }
  virtual Jet energy_jet(const std::vector<Jet>& s) const;

  Vec vector_field(const Vec& s) const;
  Mat jacobian(const Vec& s) const;

  // Taylor polynomial of H around s in all phase variables.
  Jet taylor(const Vec& s, int degree) const;

  double fd_step() const { return fd_step_; }
  void set_fd_step(double h) { fd_step_ = h; }

 protected:
  Vec gradient_from_jets(const Vec& s) const;

 private:
  Dims dims_;
  std::string label_;
  double fd_step_ = 1e-6;
};

using SystemPtr = std::shared_ptr<const HamiltonianSystem>;

Vec central_difference_gradient(const HamiltonianSystem& sys, const Vec& s, double h);

// User supplied energy; gradients by central differences.
class FunctionSystem : public HamiltonianSystem {
 public:
  FunctionSystem(Dims dims, std::function<double(const Vec&)> H, std::string label = "function");
  double energy(const Vec& s) const override { return H_(s); }

 private:
  std::function<double(const Vec&)> H_;
};

struct PolyTerm {
  std::vector<int> exp;
  double coeff = 0.0;
};

// Polynomial in the full state (x, y, q, p).
class PolynomialSystem : public HamiltonianSystem {
 public:
  PolynomialSystem(Dims dims, std::vector<PolyTerm> terms, std::string label = "polynomial");

  double energy(const Vec& s) const override;
  Vec gradient(const Vec& s) const override;
  bool has_jets() const override { return true; }
  Jet energy_jet(const std::vector<Jet>& s) const override;

  const std::vector<PolyTerm>& terms() const { return terms_; }

 private:
  std::vector<PolyTerm> terms_;
  std::vector<std::vector<PolyTerm>> grad_terms_;
};

struct ModelSpec {
  Dims dims;
  // lambda(z) as a polynomial in z = (x, y).
  std::vector<PolyTerm> lambda;
  // Perturbation monomials in (q, p); each must contain a q and a p factor.
  std::vector<PolyTerm> cubic;

  static ModelSpec linear(Dims d, double lambda);
};

double eval_poly(const std::vector<PolyTerm>& terms, const Vec& v);

// H = -lambda(z) <q, p> + cubic(q, p).
class ModelSystem : public PolynomialSystem {
 public:
  explicit ModelSystem(ModelSpec spec);
  const ModelSpec& spec() const { return spec_; }
  double lambda_at(const Vec& z) const { return eval_poly(spec_.lambda, z); }

 private:
  ModelSpec spec_;
};

std::shared_ptr<ModelSystem> build_model(const ModelSpec& spec);

}  // namespace shilnikov
