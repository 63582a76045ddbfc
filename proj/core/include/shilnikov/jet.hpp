#pragma once

#include <memory>
#include <vector>

namespace shilnikov {

// Monomials in nvars variables of total degree <= degree, graded order.
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> get(int nvars, int degree);

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(degrees_.size()); }

  const int* exponent(int idx) const { return exps_.data() + static_cast<size_t>(idx) * nvars_; }
  int degree_of(int idx) const { return degrees_[idx]; }
  int index(const int* exp) const;
  int begin_degree(int d) const { return offsets_[d]; }
  int end_degree(int d) const { return offsets_[d + 1]; }

  // idx == pred(idx) + e_{pred_var(idx)} for idx > 0.
  int pred(int idx) const { return pred_[idx]; }
  int pred_var(int idx) const { return pred_var_[idx]; }

  struct Pair {
    int j;
    int k;
  };
  // For left factor index i, pairs (j, k) with monomial_i * monomial_j = monomial_k.
  const Pair* pairs_begin(int i) const { return pairs_.data() + pair_offsets_[i]; }
  const Pair* pairs_end(int i) const { return pairs_.data() + pair_offsets_[i + 1]; }

  struct DerivEntry {
    int src;
    int dst;
    double factor;
  };
  const std::vector<DerivEntry>& derivative_table(int var) const { return deriv_[var]; }

  JetSpace(int nvars, int degree);

 private:
  long long key(const int* exp) const;

  int nvars_;
  int degree_;
  std::vector<int> exps_;
  std::vector<int> degrees_;
  std::vector<int> offsets_;
  std::vector<int> pred_;
  std::vector<int> pred_var_;
  std::vector<Pair> pairs_;
  std::vector<int> pair_offsets_;
  std::vector<std::vector<DerivEntry>> deriv_;
  std::vector<std::pair<long long, int>> lookup_;
};

// Truncated Taylor polynomial. A Jet without a space is a plain constant and
// combines with any other jet.
class Jet {
 public:
  Jet() : c_(1, 0.0) {}
  Jet(double v) : c_(1, v) {}  // NOLINT(google-explicit-constructor)
  Jet(std::shared_ptr<const JetSpace> sp, double v);

  static Jet variable(std::shared_ptr<const JetSpace> sp, int var, double value);
  static Jet zero(std::shared_ptr<const JetSpace> sp) { return Jet(std::move(sp), 0.0); }

  bool is_constant_only() const { return !sp_; }
  const std::shared_ptr<const JetSpace>& space_ptr() const { return sp_; }
  const JetSpace& space() const { return *sp_; }
  int size() const { return static_cast<int>(c_.size()); }

  double value() const { return c_[0]; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }
  const std::vector<double>& coeffs() const { return c_; }
  double coeff(const std::vector<int>& exp) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double v) { c_[0] += v; return *this; }
  Jet& operator-=(double v) { c_[0] -= v; return *this; }
  Jet& operator*=(double v);
  Jet& operator/=(double v) { return *this *= (1.0 / v); }
  Jet operator-() const;

  Jet derivative(int var) const;
  Jet homogeneous(int d) const;
  Jet truncate(int d) const;
  // Lowest degree carrying a coefficient above tol (returns degree()+1 if none).
  int order(double tol = 0.0) const;
  double evaluate(const double* x) const;
  double max_abs() const;

 private:
  void promote(const std::shared_ptr<const JetSpace>& sp);

  std::shared_ptr<const JetSpace> sp_;
  std::vector<double> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double b);
Jet operator+(double a, Jet b);
Jet operator-(Jet a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(Jet a, double b);
Jet operator*(double a, Jet b);
Jet operator/(Jet a, double b);
Jet operator/(double a, const Jet& b);

// f(x0 + h) = sum_j taylor[j] h^j, with x0 = x.value().
Jet taylor_apply(const Jet& x, const std::vector<double>& taylor);

Jet sqrt(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet pow(const Jet& x, double a);
Jet inverse(const Jet& x);

// P(args): P lives in a space with args.size() variables; the result lives in
// the args' space.
Jet compose(const Jet& P, const std::vector<Jet>& args);

inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.value(); }

}  // namespace shilnikov
