#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shilnikov/system.hpp"

namespace shilnikov {

struct IntegratorOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double max_step = kInf;
  double first_step = 0.0;
  long max_steps = 5000000;
  bool dense = true;

  static IntegratorOptions from_tol(double tol);
};

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dy)>;

// One step of 7th order dense output.
struct DenseSegment {
  double t_old = 0.0;
  double t_new = 0.0;
  Vec y_old;
  Mat F;  // rows are state components, 7 columns

  Vec operator()(double t) const;
};

struct OdeEvent {
  std::function<double(double t, const Vec& y)> g;
  int direction = 0;  // +1: g increasing through zero, -1: decreasing, 0: any
  double xtol = 0.0;  // absolute tolerance on |g| at the refined root
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vec> y;
  std::vector<DenseSegment> segments;
  long nfev = 0;
  long rejected = 0;
  bool event_hit = false;
  double event_t = kNaN;
  Vec event_y;

  double t0() const { return t.front(); }
  double t1() const { return t.back(); }
  const Vec& final_state() const { return y.back(); }
  Vec operator()(double tq) const;
};

OdeSolution solve_ode(const OdeRhs& f, double t0, const Vec& y0, double t1,
                      const IntegratorOptions& opts, const OdeEvent* event = nullptr);

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(Dims dims, OdeSolution sol, double energy0, double max_drift);

  const Dims& dims() const { return dims_; }
  double t0() const { return sol_.t0(); }
  double t1() const { return sol_.t1(); }
  const std::vector<double>& times() const { return sol_.t; }
  const std::vector<Vec>& states() const { return sol_.y; }
  const Vec& final_state() const { return sol_.final_state(); }
  Vec at(double t) const { return sol_(t); }
  double energy0() const { return energy0_; }
  double max_energy_drift() const { return max_drift_; }
  const OdeSolution& solution() const { return sol_; }

  // Columns t, x..., y..., q..., p..., H.
  void write_csv(const std::string& path, const HamiltonianSystem& sys, int samples_per_step = 1) const;

 private:
  Dims dims_;
  OdeSolution sol_;
  double energy0_ = 0.0;
  double max_drift_ = 0.0;
};

Trajectory integrate(const HamiltonianSystem& sys, const Vec& s0, double t0, double t1, double tol);
Trajectory integrate(const HamiltonianSystem& sys, const Vec& s0, double t0, double t1,
                     const IntegratorOptions& opts);

Vec flow(const HamiltonianSystem& sys, const Vec& s0, double t, double tol);

struct VariationalFlow {
  Vec state;
  Mat stm;
};

VariationalFlow flow_variational(const HamiltonianSystem& sys, const Vec& s0, double t, double tol);
VariationalFlow flow_variational(const HamiltonianSystem& sys, const Vec& s0, double t, IntegratorOptions opts);

struct ActionFlow {
  Vec state;
  double action = 0.0;  // integral of <y, xdot> + <p, qdot>
};

ActionFlow flow_action(const HamiltonianSystem& sys, const Vec& s0, double t, double tol);
ActionFlow flow_action(const HamiltonianSystem& sys, const Vec& s0, double t, IntegratorOptions opts);

struct SectionSpec {
  enum class Kind { QNorm, PNorm, Custom };
  Kind kind = Kind::QNorm;
  double r = 0.1;
  int direction = 0;
  std::function<double(const Vec&)> g;

  static SectionSpec q_norm(double r, int direction = 0) { return {Kind::QNorm, r, direction, {}}; }
  static SectionSpec p_norm(double r, int direction = 0) { return {Kind::PNorm, r, direction, {}}; }
  static SectionSpec custom(std::function<double(const Vec&)> g, double scale, int direction = 0) {
    return {Kind::Custom, scale, direction, std::move(g)};
  }

  double eval(const Dims& d, const Vec& s) const;
};

struct SectionHit {
  Vec state;
  double time = 0.0;
  double rate = 0.0;  // d/dt of the section function at the hit
};

// max_time < 0 integrates backward.
SectionHit integrate_to_section(const HamiltonianSystem& sys, const Vec& s0,
                                const SectionSpec& section, double max_time, double tol);

}  // namespace shilnikov
