#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "shilnikov/system.hpp"

namespace shilnikov {

// Positive transverse eigenvalue of the linearization at (z, 0, 0).
double eigenvalue_lambda(const HamiltonianSystem& sys, const Vec& z);

using PolyMap = std::vector<Jet>;

// Local invariant-manifold data fitted at a base point z0 of M. Every
// polynomial lives in variables (dz, s) with dz = z - z0 (2m) and s a fiber
// coordinate (k), truncated at total degree N.
//   W+ = {p = f_plus(z, q)},  W- = {q = f_minus(z, p)}
//   u0 = q - f_minus(z, p),   v0 = p - f_plus(z, q)
//   w  = z + eta_plus(z, u0) + eta_minus(z, v0)
//   u  = phi_plus(w, u0),     v  = phi_minus(w, v0)
class LocalGraphs {
 public:
  struct Data {
    Dims dims;
    int order = 3;
    Vec z0;
    double lambda = 1.0;
    Jet lambda_poly;  // lambda(z0 + dz)
    PolyMap f_plus, f_minus;
    PolyMap eta_plus, eta_minus;
    PolyMap phi_plus, phi_minus;
    PolyMap phi_plus_inv, phi_minus_inv;
    double structure_defect = 0.0;
  };

  LocalGraphs(const HamiltonianSystem& sys, const Vec& z0, int order);
  explicit LocalGraphs(Data data) : d_(std::move(data)) {}

  const Data& data() const { return d_; }
  const Dims& dims() const { return d_.dims; }
  const Vec& base() const { return d_.z0; }
  double lambda() const { return d_.lambda; }
  int order() const { return d_.order; }

  double lambda_at(const Vec& z) const;
  Vec f_plus(const Vec& z, const Vec& q) const { return eval(d_.f_plus, z, q); }
  Vec f_minus(const Vec& z, const Vec& p) const { return eval(d_.f_minus, z, p); }
  Vec eta_plus(const Vec& z, const Vec& u0) const { return eval(d_.eta_plus, z, u0); }
  Vec eta_minus(const Vec& z, const Vec& v0) const { return eval(d_.eta_minus, z, v0); }
  Vec phi_plus(const Vec& w, const Vec& u0) const { return eval(d_.phi_plus, w, u0); }
  Vec phi_minus(const Vec& w, const Vec& v0) const { return eval(d_.phi_minus, w, v0); }
  Vec phi_plus_inv(const Vec& w, const Vec& u) const { return eval(d_.phi_plus_inv, w, u); }
  Vec phi_minus_inv(const Vec& w, const Vec& v) const { return eval(d_.phi_minus_inv, w, v); }

  // Derivatives of f_plus with respect to (z, q) at a point, k x (2m + k).
  Mat f_plus_jacobian(const Vec& z, const Vec& q) const { return eval_jacobian(d_.f_plus, z, q); }
  Mat f_minus_jacobian(const Vec& z, const Vec& p) const { return eval_jacobian(d_.f_minus, z, p); }

  // Any of the maps above at (z, s), and its Jacobian in (z, s).
  Vec eval(const PolyMap& F, const Vec& z, const Vec& s) const;
  Mat eval_jacobian(const PolyMap& F, const Vec& z, const Vec& s) const;

 private:

  Data d_;
};

struct ChartParams {
  Vec center;
  double r = 0.1;
  int order = 3;
  double box = 0.5;  // half width of the z box V0 around center
};

class ManifoldChart {
 public:
  ManifoldChart(SystemPtr sys, ChartParams params);

  const HamiltonianSystem& system() const { return *sys_; }
  const SystemPtr& system_ptr() const { return sys_; }
  const ChartParams& params() const { return params_; }
  const Dims& dims() const { return sys_->dims(); }
  double r() const { return params_.r; }
  int order() const { return params_.order; }

  bool in_domain(const Vec& z) const;
  double lambda(const Vec& z) const { return eigenvalue_lambda(*sys_, z); }

  // Graphs refitted at z (cached).
  std::shared_ptr<const LocalGraphs> graphs(const Vec& z) const;
  std::shared_ptr<const LocalGraphs> center_graphs() const { return graphs(params_.center); }

  Vec f_plus(const Vec& z, const Vec& q) const { return graphs(z)->f_plus(z, q); }
  Vec f_minus(const Vec& z, const Vec& p) const { return graphs(z)->f_minus(z, p); }

  // Point on W+_loc (resp. W-_loc) over z.
  Vec stable_point(const Vec& z, const Vec& q) const;
  Vec unstable_point(const Vec& z, const Vec& p) const;

  // |pdot - Df_plus (zdot, qdot)| at (z, q, f_plus(z, q)).
  double invariance_residual_plus(const Vec& z, const Vec& q) const;
  double invariance_residual_minus(const Vec& z, const Vec& p) const;

 private:
  SystemPtr sys_;
  ChartParams params_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, std::shared_ptr<const LocalGraphs>> cache_;
};

using ChartPtr = std::shared_ptr<const ManifoldChart>;

ChartPtr fit_local_graphs(SystemPtr sys, const ChartParams& params);

struct LimitDirection {
  Vec base;
  Vec v;
  bool stable = true;
};

LimitDirection limit_direction_plus(const ManifoldChart& chart, const Vec& z0, const Vec& q_plus);
LimitDirection limit_direction_minus(const ManifoldChart& chart, const Vec& z0, const Vec& p_minus);

class StraighteningMap {
 public:
  explicit StraighteningMap(std::shared_ptr<const LocalGraphs> g) : g_(std::move(g)) {}

  // (z, q, p) -> (w, u, v)
  Vec forward(const Vec& s) const;
  Vec inverse(const Vec& t) const;
  Mat jacobian(const Vec& s) const;
  // Vector field X at s pushed forward to (w, u, v).
  Vec push_forward(const Vec& s, const Vec& X) const { return jacobian(s) * X; }
  const LocalGraphs& graphs() const { return *g_; }

 private:
  std::shared_ptr<const LocalGraphs> g_;
};

StraighteningMap straighten(const ManifoldChart& chart, const Vec& z0);

}  // namespace shilnikov
