#include "shilnikov/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shilnikov/errors.hpp"

#ifndef SHILNIKOV_VERSION
#define SHILNIKOV_VERSION "unknown"
#endif

namespace shilnikov {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec json_vec(const json& a) {
  if (!a.is_array()) throw SpecError("expected an array of numbers");
  Vec v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

std::vector<PolyTerm> json_terms(const json& a, int nvars, const char* what) {
  std::vector<PolyTerm> out;
  if (!a.is_array()) throw SpecError(std::string(what) + " must be a list of [exponents, coefficient]");
  for (const auto& t : a) {
    if (!t.is_array() || t.size() != 2) throw SpecError(std::string(what) + " term must be [exponents, coefficient]");
    PolyTerm p{t[0].get<std::vector<int>>(), t[1].get<double>()};
    if (static_cast<int>(p.exp.size()) != nvars)
      throw SpecError(std::string(what) + " exponent tuple has length " + std::to_string(p.exp.size()) +
                      ", expected " + std::to_string(nvars));
    out.push_back(std::move(p));
  }
  return out;
}

json terms_json(const std::vector<PolyTerm>& terms) {
  json a = json::array();
  for (const auto& t : terms) a.push_back(json::array({t.exp, t.coeff}));
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed JSON: ") + e.what());
  }
}

json jet_json(const Jet& j) {
  json o;
  json terms = json::array();
  if (j.is_constant_only()) {
    o["nvars"] = 0;
    o["degree"] = 0;
    terms.push_back(json::array({json::array(), j.value()}));
  } else {
    const JetSpace& sp = j.space();
    o["nvars"] = sp.nvars();
    o["degree"] = sp.degree();
    for (int i = 0; i < sp.size(); ++i) {
      if (j[i] == 0.0) continue;
      std::vector<int> e(sp.exponent(i), sp.exponent(i) + sp.nvars());
      terms.push_back(json::array({e, j[i]}));
    }
  }
  o["terms"] = terms;
  return o;
}

Jet json_jet(const json& o) {
  const int nvars = o.at("nvars").get<int>();
  const int degree = o.at("degree").get<int>();
  if (nvars == 0) {
    const auto& t = o.at("terms");
    return Jet(t.empty() ? 0.0 : t[0][1].get<double>());
  }
  auto sp = JetSpace::get(nvars, degree);
  Jet j = Jet::zero(sp);
  for (const auto& t : o.at("terms")) {
    const auto e = t[0].get<std::vector<int>>();
    if (static_cast<int>(e.size()) != nvars) throw SpecError("chart monomial has wrong length");
    const int idx = sp->index(e.data());
    if (idx < 0) throw SpecError("chart monomial exceeds the stored degree");
    j[idx] = t[1].get<double>();
  }
  return j;
}

json polymap_json(const PolyMap& P) {
  json a = json::array();
  for (const auto& j : P) a.push_back(jet_json(j));
  return a;
}

PolyMap json_polymap(const json& a) {
  PolyMap P;
  for (const auto& o : a) P.push_back(json_jet(o));
  return P;
}

}  // namespace

std::string library_version() { return SHILNIKOV_VERSION; }

SystemConfig parse_system_config(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw SpecError("system config must be an object");
  SystemConfig c;
  try {
    c.kind = j.value("kind", std::string("model"));
    if (c.kind == "model") {
      c.model.dims = Dims{j.value("m", 1), j.value("k", 1)};
      if (c.model.dims.m < 1 || c.model.dims.k < 1) throw SpecError("m and k must be positive");
      if (j.contains("lambda")) {
        if (j["lambda"].is_number()) {
          c.model.lambda = {{std::vector<int>(c.model.dims.manifold(), 0), j["lambda"].get<double>()}};
        } else {
          c.model.lambda = json_terms(j["lambda"], c.model.dims.manifold(), "lambda");
        }
      } else {
        c.model.lambda = {{std::vector<int>(c.model.dims.manifold(), 0), 1.0}};
      }
      if (j.contains("cubic")) c.model.cubic = json_terms(j["cubic"], c.model.dims.fiber(), "cubic");
    } else if (c.kind == "glued") {
      c.glued.omega = j.value("omega", c.glued.omega);
      c.glued.delta = j.value("delta", c.glued.delta);
      c.glued.eps_z = j.value("eps_z", c.glued.eps_z);
      c.glued.lambda2 = j.value("lambda2", c.glued.lambda2);
    } else if (c.kind == "three_body" || c.kind == "adapted_three_body") {
      c.three_body.alpha1 = j.value("alpha1", c.three_body.alpha1);
      c.three_body.alpha2 = j.value("alpha2", c.three_body.alpha2);
      c.three_body.mu = j.value("mu", c.three_body.mu);
      c.three_body.E = j.value("E", c.three_body.E);
      c.three_body.validate();
    } else {
      throw SpecError("unknown system kind '" + c.kind + "'");
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad system config: ") + e.what());
  }
  return c;
}

std::string to_json(const SystemConfig& c) {
  json j;
  j["kind"] = c.kind;
  if (c.kind == "model") {
    j["m"] = c.model.dims.m;
    j["k"] = c.model.dims.k;
    j["lambda"] = terms_json(c.model.lambda);
    j["cubic"] = terms_json(c.model.cubic);
  } else if (c.kind == "glued") {
    j["omega"] = c.glued.omega;
    j["delta"] = c.glued.delta;
    j["eps_z"] = c.glued.eps_z;
    j["lambda2"] = c.glued.lambda2;
  } else {
    j["alpha1"] = c.three_body.alpha1;
    j["alpha2"] = c.three_body.alpha2;
    j["mu"] = c.three_body.mu;
    j["E"] = c.three_body.E;
  }
  return j.dump();
}

SystemPtr build_system(const SystemConfig& c) {
  if (c.kind == "model") return build_model(c.model);
  if (c.kind == "glued") return std::make_shared<GluedSystem>(c.glued);
  if (c.kind == "three_body") return std::make_shared<ThreeBodySystem>(c.three_body);
  if (c.kind == "adapted_three_body") return std::make_shared<AdaptedThreeBodySystem>(c.three_body);
  throw SpecError("unknown system kind '" + c.kind + "'");
}

void write_state(const std::string& path, const Vec& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (int i = 0; i < s.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(s[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

Vec read_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> vals;
  char buf[8];
  while (in.read(buf, 8)) {
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    vals.push_back(std::bit_cast<double>(bits));
  }
  if (in.gcount() != 0) throw IoError(path + " is not a whole number of float64 values");
  return Eigen::Map<Vec>(vals.data(), static_cast<int>(vals.size()));
}

void save_chart(const std::string& path, const LocalGraphs& g) {
  const auto& d = g.data();
  json j;
  j["m"] = d.dims.m;
  j["k"] = d.dims.k;
  j["order"] = d.order;
  j["z0"] = vec_json(d.z0);
  j["lambda"] = d.lambda;
  j["lambda_poly"] = jet_json(d.lambda_poly);
  j["f_plus"] = polymap_json(d.f_plus);
  j["f_minus"] = polymap_json(d.f_minus);
  j["eta_plus"] = polymap_json(d.eta_plus);
  j["eta_minus"] = polymap_json(d.eta_minus);
  j["phi_plus"] = polymap_json(d.phi_plus);
  j["phi_minus"] = polymap_json(d.phi_minus);
  j["phi_plus_inv"] = polymap_json(d.phi_plus_inv);
  j["phi_minus_inv"] = polymap_json(d.phi_minus_inv);
  j["structure_defect"] = d.structure_defect;
  write_file(path, j.dump(1));
}

LocalGraphs load_chart(const std::string& path) {
  const json j = parse(read_file(path));
  try {
    LocalGraphs::Data d;
    d.dims = Dims{j.at("m").get<int>(), j.at("k").get<int>()};
    d.order = j.at("order").get<int>();
    d.z0 = json_vec(j.at("z0"));
    d.lambda = j.at("lambda").get<double>();
    d.lambda_poly = json_jet(j.at("lambda_poly"));
    d.f_plus = json_polymap(j.at("f_plus"));
    d.f_minus = json_polymap(j.at("f_minus"));
    d.eta_plus = json_polymap(j.at("eta_plus"));
    d.eta_minus = json_polymap(j.at("eta_minus"));
    d.phi_plus = json_polymap(j.at("phi_plus"));
    d.phi_minus = json_polymap(j.at("phi_minus"));
    d.phi_plus_inv = json_polymap(j.at("phi_plus_inv"));
    d.phi_minus_inv = json_polymap(j.at("phi_minus_inv"));
    d.structure_defect = j.value("structure_defect", 0.0);
    return LocalGraphs(std::move(d));
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad chart file: ") + e.what());
  }
}

std::string connection_summary(const ConnectionSolution& s) {
  json j;
  j["T"] = s.T;
  j["mu"] = s.mu;
  j["z0"] = vec_json(s.z0);
  j["q_plus"] = vec_json(s.q_plus);
  j["p_minus"] = vec_json(s.p_minus);
  j["endpoints"] = {{"minus_T", vec_json(s.A_plus)}, {"zero", vec_json(s.mid)}, {"plus_T", vec_json(s.A_minus)}};
  j["residuals"] = {{"newton", s.residual}, {"iterations", s.iterations}};
  return j.dump(2);
}

namespace {

void csv_header(std::ostream& out, const Dims& d) {
  out << "t";
  for (int i = 0; i < d.m; ++i) out << ",x" << i;
  for (int i = 0; i < d.m; ++i) out << ",y" << i;
  for (int i = 0; i < d.k; ++i) out << ",q" << i;
  for (int i = 0; i < d.k; ++i) out << ",p" << i;
  out << ",H\n";
}

void csv_row(std::ostream& out, double t, const Vec& s, double H) {
  out << t;
  for (int i = 0; i < s.size(); ++i) out << ',' << s[i];
  out << ',' << H << '\n';
}

}  // namespace

void write_connection_csv(const std::string& path, const ConnectionSolution& sol, const HamiltonianSystem& sys,
                          int samples) {
  if (sol.pieces.empty()) throw SpecError("connection has no dense pieces");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  csv_header(out, sys.dims());
  for (int i = 0; i <= samples; ++i) {
    const double t = -sol.T + 2.0 * sol.T * i / samples;
    const Vec s = sol.at(t);
    csv_row(out, t, s, sys.energy(s));
  }
}

void save_chain(const std::string& path, const HeteroclinicChain& chain) {
  json j;
  j["periodic"] = chain.periodic;
  json orbits = json::array();
  for (int i = 0; i < chain.size(); ++i) {
    const auto& o = chain.orbits[i];
    orbits.push_back({{"c_minus", vec_json(o.c_minus)},
                      {"c_plus", vec_json(o.c_plus)},
                      {"exit_state", vec_json(o.exit_state)},
                      {"entry_state", vec_json(o.entry_state)},
                      {"flight_time", o.flight_time},
                      {"v_minus", vec_json(o.v_minus)},
                      {"v_plus", vec_json(o.v_plus)},
                      {"residual", o.residual},
                      {"min_singular_value", o.min_singular_value},
                      {"angle", symplectic_angle(chain, i)}});
  }
  j["orbits"] = orbits;
  write_file(path, j.dump(2));
}

HeteroclinicChain load_chain(const std::string& path) {
  const json j = parse(read_file(path));
  HeteroclinicChain c;
  try {
    c.periodic = j.value("periodic", true);
    for (const auto& o : j.at("orbits")) {
      HeteroclinicOrbit h;
      h.c_minus = json_vec(o.at("c_minus"));
      h.c_plus = json_vec(o.at("c_plus"));
      h.exit_state = json_vec(o.at("exit_state"));
      h.entry_state = json_vec(o.at("entry_state"));
      h.flight_time = o.at("flight_time").get<double>();
      h.v_minus = json_vec(o.at("v_minus"));
      h.v_plus = json_vec(o.at("v_plus"));
      h.residual = o.value("residual", 0.0);
      h.min_singular_value = o.value("min_singular_value", 0.0);
      c.orbits.push_back(std::move(h));
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad chain file: ") + e.what());
  }
  return c;
}

std::string shadow_summary(const ShadowOrbit& orbit, const ShadowDistance& dist, const MultiplierSpectrum& spec) {
  json j;
  j["mu"] = orbit.mu;
  j["period"] = orbit.period;
  j["passage_times"] = orbit.passage_times;
  j["newton_iterations"] = orbit.iterations;
  j["gradient_norm"] = orbit.gradient_norm;
  j["closure"] = orbit.closure;
  j["energy_defect"] = orbit.energy_defect;
  j["d_global"] = dist.d_global;
  j["d_outside"] = dist.d_outside;
  json mult = json::array();
  for (std::size_t i = 0; i < spec.log_abs.size(); ++i) mult.push_back(spec.value(static_cast<int>(i)));
  j["multipliers"] = mult;
  j["multiplier_log_abs"] = spec.log_abs;
  j["pairing_defect"] = spec.pairing_defect;
  j["X"] = vec_json(orbit.X);
  return j.dump(2);
}

void write_orbit_csv(const std::string& path, const ShadowOrbit& orbit, const HamiltonianSystem& sys, double dt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  csv_header(out, sys.dims());
  double t0 = 0.0;
  for (std::size_t i = 0; i < orbit.passages.size(); ++i) {
    const auto& loc = orbit.passages[i].local;
    const int nl = std::max(2, static_cast<int>(std::ceil(2 * loc.T / dt)));
    for (int j = 0; j < nl; ++j) {
      const double t = -loc.T + 2 * loc.T * j / nl;
      const Vec s = loc.at(t);
      csv_row(out, t0 + t + loc.T, s, sys.energy(s));
    }
    t0 += 2 * loc.T;
    const Trajectory& gl = orbit.global_pieces.at(i);
    const int ng = std::max(2, static_cast<int>(std::ceil(gl.t1() / dt)));
    for (int j = 0; j < ng; ++j) {
      const double t = gl.t1() * j / ng;
      const Vec s = gl.at(t);
      csv_row(out, t0 + t, s, sys.energy(s));
    }
    t0 += gl.t1();
  }
}

std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_manifest(const std::string& dir, const std::string& config_text, std::uint64_t seed,
                    const std::string& extra_json) {
  std::filesystem::create_directories(dir);
  json j;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(config_text)));
  j["config_hash"] = hex;
  j["version"] = library_version();
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["seed"] = seed;
  j["extra"] = parse(extra_json);
  write_file((std::filesystem::path(dir) / "manifest.json").string(), j.dump(2));
}

}  // namespace shilnikov
