#include "shilnikov/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace shilnikov {

namespace {

void enumerate(int nvars, int remaining, int var, std::vector<int>& cur, std::vector<int>& out) {
  if (var == nvars - 1) {
    cur[var] = remaining;
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[var] = e;
    enumerate(nvars, remaining - e, var + 1, cur, out);
  }
}

}  // namespace

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, degree}];
  if (!slot) slot = std::make_shared<JetSpace>(nvars, degree);
  return slot;
}

JetSpace::JetSpace(int nvars, int degree) : nvars_(nvars), degree_(degree) {
  if (nvars < 1 || degree < 0) throw std::invalid_argument("JetSpace: bad shape");
  std::vector<int> cur(nvars, 0);
  offsets_.push_back(0);
  for (int d = 0; d <= degree; ++d) {
    enumerate(nvars, d, 0, cur, exps_);
    offsets_.push_back(static_cast<int>(exps_.size()) / nvars);
  }
  const int n = offsets_.back();
  degrees_.resize(n);
  for (int d = 0; d <= degree; ++d)
    for (int i = offsets_[d]; i < offsets_[d + 1]; ++i) degrees_[i] = d;

  lookup_.reserve(n);
  for (int i = 0; i < n; ++i) lookup_.emplace_back(key(exponent(i)), i);
  std::sort(lookup_.begin(), lookup_.end());

  pred_.assign(n, -1);
  pred_var_.assign(n, -1);
  std::vector<int> e(nvars);
  for (int i = 1; i < n; ++i) {
    std::copy(exponent(i), exponent(i) + nvars, e.begin());
    int v = 0;
    while (e[v] == 0) ++v;
    e[v] -= 1;
    pred_[i] = index(e.data());
    pred_var_[i] = v;
  }

  pair_offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    pair_offsets_[i] = static_cast<int>(pairs_.size());
    for (int j = 0; j < offsets_[degree - degrees_[i] + 1]; ++j) {
      for (int v = 0; v < nvars; ++v) e[v] = exponent(i)[v] + exponent(j)[v];
      pairs_.push_back({j, index(e.data())});
    }
  }
  pair_offsets_[n] = static_cast<int>(pairs_.size());

  deriv_.resize(nvars);
  for (int v = 0; v < nvars; ++v) {
    for (int i = 0; i < n; ++i) {
      const int ev = exponent(i)[v];
      if (ev == 0) continue;
      std::copy(exponent(i), exponent(i) + nvars, e.begin());
      e[v] -= 1;
      deriv_[v].push_back({i, index(e.data()), static_cast<double>(ev)});
    }
  }
}

long long JetSpace::key(const int* exp) const {
  long long k = 0;
  for (int v = 0; v < nvars_; ++v) k = k * (degree_ + 1) + exp[v];
  return k;
}

int JetSpace::index(const int* exp) const {
  int d = 0;
  for (int v = 0; v < nvars_; ++v) {
    if (exp[v] < 0) return -1;
    d += exp[v];
  }
  if (d > degree_) return -1;
  const long long k = key(exp);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(k, -1));
  if (it == lookup_.end() || it->first != k) return -1;
  return it->second;
}

Jet::Jet(std::shared_ptr<const JetSpace> sp, double v) : sp_(std::move(sp)) {
  c_.assign(sp_ ? sp_->size() : 1, 0.0);
  c_[0] = v;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> sp, int var, double value) {
  Jet j(sp, value);
  if (sp->degree() >= 1) j.c_[1 + var] = 1.0;
  return j;
}

double Jet::coeff(const std::vector<int>& exp) const {
  if (!sp_) {
    for (int e : exp)
      if (e != 0) return 0.0;
    return c_[0];
  }
  const int i = sp_->index(exp.data());
  return i < 0 ? 0.0 : c_[i];
}

void Jet::promote(const std::shared_ptr<const JetSpace>& sp) {
  const double v = c_[0];
  sp_ = sp;
  c_.assign(sp->size(), 0.0);
  c_[0] = v;
}

Jet& Jet::operator+=(const Jet& o) {
  if (!o.sp_) {
    c_[0] += o.c_[0];
    return *this;
  }
  if (!sp_) promote(o.sp_);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (!o.sp_) {
    c_[0] -= o.c_[0];
    return *this;
  }
  if (!sp_) promote(o.sp_);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double v) {
  for (double& c : c_) c *= v;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  *this = *this / o;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& c : r.c_) c = -c;
  return r;
}

Jet Jet::derivative(int var) const {
  if (!sp_) return Jet(0.0);
  Jet r(sp_, 0.0);
  for (const auto& e : sp_->derivative_table(var)) r.c_[e.dst] += e.factor * c_[e.src];
  return r;
}

Jet Jet::homogeneous(int d) const {
  if (!sp_) return d == 0 ? *this : Jet(0.0);
  Jet r(sp_, 0.0);
  if (d > sp_->degree()) return r;
  for (int i = sp_->begin_degree(d); i < sp_->end_degree(d); ++i) r.c_[i] = c_[i];
  return r;
}

Jet Jet::truncate(int d) const {
  if (!sp_) return *this;
  Jet r = *this;
  if (d >= sp_->degree()) return r;
  for (int i = sp_->begin_degree(d + 1); i < sp_->size(); ++i) r.c_[i] = 0.0;
  return r;
}

int Jet::order(double tol) const {
  const int D = sp_ ? sp_->degree() : 0;
  for (int i = 0; i < size(); ++i)
    if (std::abs(c_[i]) > tol) return sp_ ? sp_->degree_of(i) : 0;
  return D + 1;
}

double Jet::evaluate(const double* x) const {
  if (!sp_) return c_[0];
  const int n = sp_->size();
  std::vector<double> mono(n);
  mono[0] = 1.0;
  double acc = c_[0];
  for (int i = 1; i < n; ++i) {
    mono[i] = mono[sp_->pred(i)] * x[sp_->pred_var(i)];
    acc += c_[i] * mono[i];
  }
  return acc;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (double c : c_) m = std::max(m, std::abs(c));
  return m;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_constant_only()) return b * a.value();
  if (b.is_constant_only()) return a * b.value();
  const JetSpace& sp = a.space();
  Jet r(a.space_ptr(), 0.0);
  for (int i = 0; i < sp.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (const auto* p = sp.pairs_begin(i); p != sp.pairs_end(i); ++p) r[p->k] += ai * b[p->j];
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant_only()) return a * (1.0 / b.value());
  return a * inverse(b);
}

Jet operator+(Jet a, double b) { return a += b; }
Jet operator+(double a, Jet b) { return b += a; }
Jet operator-(Jet a, double b) { return a -= b; }
Jet operator-(double a, const Jet& b) { return (-b) + a; }
Jet operator*(Jet a, double b) { return a *= b; }
Jet operator*(double a, Jet b) { return b *= a; }
Jet operator/(Jet a, double b) { return a /= b; }
Jet operator/(double a, const Jet& b) { return inverse(b) * a; }

Jet taylor_apply(const Jet& x, const std::vector<double>& taylor) {
  if (x.is_constant_only()) return Jet(taylor[0]);
  Jet h = x;
  h[0] = 0.0;
  const int D = x.space().degree();
  Jet r(x.space_ptr(), D < static_cast<int>(taylor.size()) ? taylor[D] : 0.0);
  for (int j = D - 1; j >= 0; --j) {
    r = r * h;
    r[0] += j < static_cast<int>(taylor.size()) ? taylor[j] : 0.0;
  }
  return r;
}

namespace {

int jet_degree(const Jet& x) { return x.is_constant_only() ? 0 : x.space().degree(); }

std::vector<double> pow_series(double x0, double a, int D) {
  std::vector<double> t(D + 1);
  t[0] = std::pow(x0, a);
  double binom = 1.0;
  for (int j = 1; j <= D; ++j) {
    binom *= (a - (j - 1)) / j;
    t[j] = binom * std::pow(x0, a - j);
  }
  return t;
}

}  // namespace

Jet pow(const Jet& x, double a) {
  const int D = jet_degree(x);
  return taylor_apply(x, pow_series(x.value(), a, D));
}

Jet sqrt(const Jet& x) { return pow(x, 0.5); }

Jet inverse(const Jet& x) {
  if (x.value() == 0.0) throw std::domain_error("Jet inverse of zero");
  return pow(x, -1.0);
}

Jet exp(const Jet& x) {
  const int D = jet_degree(x);
  std::vector<double> t(D + 1);
  const double e = std::exp(x.value());
  double f = 1.0;
  for (int j = 0; j <= D; ++j) {
    if (j > 0) f *= j;
    t[j] = e / f;
  }
  return taylor_apply(x, t);
}

Jet log(const Jet& x) {
  const int D = jet_degree(x);
  std::vector<double> t(D + 1);
  const double x0 = x.value();
  t[0] = std::log(x0);
  for (int j = 1; j <= D; ++j) t[j] = ((j % 2) ? 1.0 : -1.0) / (j * std::pow(x0, j));
  return taylor_apply(x, t);
}

Jet compose(const Jet& P, const std::vector<Jet>& args) {
  if (P.is_constant_only()) return Jet(P.value());
  const JetSpace& ps = P.space();
  if (static_cast<int>(args.size()) != ps.nvars())
    throw std::invalid_argument("compose: argument count mismatch");
  std::shared_ptr<const JetSpace> target;
  bool nilpotent = true;
  for (const Jet& a : args) {
    if (!a.is_constant_only() && !target) target = a.space_ptr();
    if (a.value() != 0.0) nilpotent = false;
  }
  if (!target) {
    std::vector<double> x(args.size());
    for (size_t i = 0; i < args.size(); ++i) x[i] = args[i].value();
    return Jet(P.evaluate(x.data()));
  }
  int last = ps.size();
  if (nilpotent && ps.degree() > target->degree()) last = ps.end_degree(target->degree());
  int top = 0;
  for (int i = 0; i < last; ++i)
    if (P[i] != 0.0) top = i;
  std::vector<Jet> mono;
  mono.reserve(top + 1);
  mono.emplace_back(target, 1.0);
  Jet r(target, P[0]);
  for (int i = 1; i <= top; ++i) {
    mono.push_back(mono[ps.pred(i)] * args[ps.pred_var(i)]);
    if (P[i] != 0.0) r += mono.back() * P[i];
  }
  return r;
}

}  // namespace shilnikov
