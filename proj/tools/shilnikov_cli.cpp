#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "shilnikov/io.hpp"

using namespace shilnikov;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct RunFlags {
  std::string config;
  std::string out = "out";
  int workers = 1;
  std::uint64_t seed = 0;
  double tol = 0.0;  // 0 keeps the solver defaults
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

Vec to_vec(const json& a) {
  Vec v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

std::vector<double> ladder_of(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("config needs a '") + key + "' ladder");
  auto L = cfg[key].get<std::vector<double>>();
  if (L.empty()) throw ConfigError("empty ladder");
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!(L[i] > 0)) throw ConfigError("ladder entries must be positive");
    if (i > 0 && !(L[i] < L[i - 1])) throw ConfigError("ladder must be strictly decreasing");
  }
  return L;
}

// Runs job(i) for i in [0, n) on a pool of workers; results land by index.
void parallel_for(int n, int workers, const std::function<void(int)>& job) {
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex m;
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::max(1, std::min(workers, n)); ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << text << '\n';
}

ChartPtr make_chart(SystemPtr sys, const json& cfg, const Vec& center) {
  const json c = cfg.value("chart", json::object());
  ChartParams p;
  p.center = center;
  p.r = c.value("r", 0.1);
  p.order = c.value("order", 3);
  p.box = c.value("box", 0.5);
  if (!(p.r > 0) || p.order < 2) throw ConfigError("chart needs r > 0 and order >= 2");
  return fit_local_graphs(std::move(sys), p);
}

int cmd_model_bvp(const RunFlags& f) {
  const std::string text = read_text(f.config);
  const json cfg = parse_config(text);
  const SystemConfig sc = parse_system_config(cfg.at("system").dump());
  auto sys = build_system(sc);
  const Dims d = sys->dims();
  const Vec z0 = cfg.contains("z0") ? to_vec(cfg["z0"]) : Vec::Zero(d.manifold());
  const Vec qp = to_vec(cfg.at("q_plus"));
  const Vec pm = to_vec(cfg.at("p_minus"));
  if (z0.size() != d.manifold() || qp.size() != d.k || pm.size() != d.k) throw ConfigError("boundary data sizes do not match the system");
  const std::string mode = cfg.value("mode", std::string("fixed_energy"));
  if (mode != "fixed_energy" && mode != "fixed_time") throw ConfigError("mode must be fixed_energy or fixed_time");
  const auto ladder = ladder_of(cfg, mode == "fixed_energy" ? "mu" : "T");
  const int samples = cfg.value("samples", 400);
  BvpOptions opts;
  if (f.tol > 0) opts.tol = f.tol;

  auto chart = make_chart(sys, cfg, z0);
  const double lam = chart->lambda(z0);
  fs::create_directories(f.out);
  const int n = static_cast<int>(ladder.size());
  std::vector<ConnectionSolution> sols(n);
  std::vector<double> formula(n, kNaN);
  parallel_for(n, f.workers, [&](int i) {
    sols[i] = mode == "fixed_energy" ? solve_fixed_energy(*chart, z0, qp, pm, ladder[i], opts)
                                     : solve_fixed_time(*chart, z0, qp, pm, ladder[i], opts);
    sols[i].build_pieces(*sys, 1e-13);
    if (mode == "fixed_energy") formula[i] = asymptotic_T(*chart, z0, qp, pm, ladder[i], opts.cone, false);
  });

  std::ofstream table(fs::path(f.out) / "table.csv");
  table.precision(17);
  table << "index,mu,T,T_formula,deviation,residual\n";
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i) {
    const auto& s = sols[i];
    write_text(fs::path(f.out) / ("point_" + std::to_string(i) + ".json"), connection_summary(s));
    write_connection_csv((fs::path(f.out) / ("point_" + std::to_string(i) + ".csv")).string(), s, *sys, samples);
    table << i << ',' << s.mu << ',' << s.T << ',' << formula[i] << ',' << std::abs(s.T - formula[i]) << ','
          << s.residual << '\n';
    if (mode == "fixed_energy") {
      xs.push_back(std::abs(std::log(s.mu)) / (2 * lam));
      ys.push_back(s.T);
    }
  }
  json verdict;
  verdict["subcommand"] = "model-bvp";
  verdict["mode"] = mode;
  verdict["lambda"] = lam;
  verdict["points"] = n;
  if (xs.size() >= 2) {
    std::vector<double> lm, ld;
    for (int i = 0; i < n; ++i) {
      const double dev = std::abs(sols[i].T - formula[i]);
      if (dev > 1e-13) {
        lm.push_back(std::log(sols[i].mu));
        ld.push_back(std::log(dev));
      }
    }
    verdict["T_vs_log_slope"] = fit_slope(xs, ys);
    if (lm.size() >= 3) verdict["deviation_exponent"] = fit_slope(lm, ld);
  }
  write_text(fs::path(f.out) / "verdict.json", verdict.dump(2));
  write_manifest(f.out, text, f.seed, json{{"subcommand", "model-bvp"}, {"workers", f.workers}}.dump());
  std::cout << verdict.dump(2) << '\n';
  return 0;
}

int cmd_threebody(const RunFlags& f) {
  const std::string text = read_text(f.config);
  const json cfg = parse_config(text);
  ThreeBodyParams P;
  const json pj = cfg.value("params", json::object());
  P.alpha1 = pj.value("alpha1", P.alpha1);
  P.alpha2 = pj.value("alpha2", P.alpha2);
  P.mu = pj.value("mu", P.mu);
  P.E = pj.value("E", P.E);
  P.validate();
  ThreeBodySystem reg(P);
  KeplerPairSystem kep(P);

  std::vector<Vec> points;
  for (const auto& p : cfg.value("points", json::array())) {
    if (p.size() != 4) throw ConfigError("three-body points are (x1, x2, y1, y2)");
    points.push_back(to_vec(p));
  }
  std::mt19937_64 rng(f.seed);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  const int random = cfg.value("random_points", 0);
  for (int added = 0; added < random;) {
    Vec z(4);
    for (int i = 0; i < 4; ++i) z[i] = U(rng);
    if (z.head(2).norm() < 0.1) continue;
    if (0.5 * (1 + P.mu) * z.tail(2).squaredNorm() - 1.0 / z.head(2).norm() >= P.E) continue;
    points.push_back(z);
    ++added;
  }

  fs::create_directories(f.out);
  const int n = static_cast<int>(points.size());
  std::vector<double> formula(n), numeric(n);
  parallel_for(n, f.workers, [&](int i) {
    formula[i] = three_body_lambda(P, points[i]);
    numeric[i] = eigenvalue_lambda(reg, points[i]);
  });
  std::ofstream table(fs::path(f.out) / "eigenvalues.csv");
  table.precision(17);
  table << "x1,x2,y1,y2,lambda_formula,lambda_numeric,relative_error\n";
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double rel = std::abs(numeric[i] - formula[i]) / formula[i];
    worst = std::max(worst, rel);
    for (int j = 0; j < 4; ++j) table << points[i][j] << ',';
    table << formula[i] << ',' << numeric[i] << ',' << rel << '\n';
  }

  // pullback of the Kepler pair through the Levi-Civita map, offset by the written constant
  double pull = 0.0;
  std::uniform_real_distribution<double> V(-1, 1);
  for (int k = 0; k < cfg.value("pullback_samples", 100); ++k) {
    Vec s(8);
    for (int i = 0; i < 8; ++i) s[i] = V(rng);
    s[0] += 2.0;
    const double xi2 = s[4] * s[4] + s[5] * s[5];
    const double lhs = xi2 * (kep.energy(levi_civita_state(s, P)) - P.E);
    const double rhs = reg.energy(s) - 2 * P.mu * P.alpha1 * P.alpha2;
    pull = std::max(pull, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }

  json verdict;
  verdict["subcommand"] = "threebody";
  verdict["points"] = n;
  verdict["max_relative_eigenvalue_error"] = worst;
  verdict["pullback_residual"] = pull;

  if (cfg.contains("passage")) {
    const json& pc = cfg["passage"];
    auto ad = std::make_shared<AdaptedThreeBodySystem>(P);
    const Vec z = to_vec(pc.at("z"));
    auto chart = make_chart(ad, cfg, z);
    BvpOptions opts;
    if (f.tol > 0) opts.tol = f.tol;
    auto sol = solve_fixed_energy(*chart, z, to_vec(pc.at("q_plus")), to_vec(pc.at("p_minus")), pc.value("mu", 1e-6), opts);
    sol.build_pieces(*ad, 1e-13);
    write_text(fs::path(f.out) / "passage.json", connection_summary(sol));
    write_connection_csv((fs::path(f.out) / "passage.csv").string(), sol, *ad, pc.value("samples", 400));
    verdict["passage_T"] = sol.T;
  }
  write_text(fs::path(f.out) / "verdict.json", verdict.dump(2));
  write_manifest(f.out, text, f.seed, json{{"subcommand", "threebody"}, {"workers", f.workers}}.dump());
  std::cout << verdict.dump(2) << '\n';
  return 0;
}

struct LadderPoint {
  ShadowOrbit orbit;
  ShadowDistance dist;
  MultiplierSpectrum spec;
};

int cmd_shadow(const RunFlags& f) {
  const std::string text = read_text(f.config);
  const json cfg = parse_config(text);
  const SystemConfig sc = parse_system_config(cfg.at("system").dump());
  auto sys = build_system(sc);
  const Dims d = sys->dims();
  const auto ladder = ladder_of(cfg, "mu");
  const double tube = cfg.value("tube", 0.05);
  const double tail = cfg.value("tail_time", 14.0);
  const double sphere = cfg.value("sphere_radius", cfg.value("chart", json::object()).value("r", 0.1));

  HeteroclinicChain chain;
  if (cfg.contains("chain_file")) {
    const std::string path = cfg["chain_file"].get<std::string>();
    if (!fs::exists(path)) throw ConfigError("chain file " + path + " does not exist");
    chain = load_chain(path);
  } else {
    for (const auto& o : cfg.at("chain")) {
      HeteroclinicGuess g;
      g.z_minus = o.contains("corner") ? to_vec(o["corner"]) : Vec::Zero(d.manifold());
      if (o.contains("exit_angle_deg")) {
        if (d.k != 2) throw ConfigError("exit_angle_deg needs k = 2");
        const double th = o["exit_angle_deg"].get<double>() * M_PI / 180;
        g.p_exit = Vec(2);
        g.p_exit << std::cos(th), std::sin(th);
      } else {
        g.p_exit = to_vec(o.at("p_exit"));
      }
      g.flight_time = o.at("flight_time").get<double>();
      chain.orbits.push_back(HeteroclinicOrbit{});
      chain.orbits.back().c_minus = g.z_minus;
      chain.orbits.back().exit_state = g.p_exit;
      chain.orbits.back().flight_time = g.flight_time;
    }
  }
  const int nc = chain.size();
  if (nc < 1) throw ConfigError("chain has no orbits");

  std::vector<ChartPtr> charts;
  for (int i = 0; i < nc; ++i) charts.push_back(make_chart(sys, cfg, chain.orbits[i].c_minus));
  if (!cfg.contains("chain_file")) {
    for (int i = 0; i < nc; ++i) {
      const auto& o = chain.orbits[i];
      HeteroclinicGuess g{o.c_minus, o.exit_state, o.flight_time};
      chain.orbits[i] = find_heteroclinic(*charts[i], *charts[(i + 1) % nc], g);
    }
  }
  const auto pos = chain_positive(chain);
  if (!pos.positive) throw Tangency("chain is not positive (min angle " + std::to_string(pos.margin) + ")");

  ShadowProblem P;
  P.system = sys;
  P.charts = charts;
  for (int i = 0; i < nc; ++i) P.maps.push_back(poincare_map_for(sys, chain.orbits[i], sphere, f.seed + i));
  Vec X0(0);
  for (const auto& m : P.maps) {
    Vec b = m->base_variables();
    X0.conservativeResize(X0.size() + b.size());
    X0.tail(b.size()) = b;
  }
  P.X0 = X0;
  ShadowOptions so;
  if (f.tol > 0) so.tol = f.tol;

  // composed scattering Jacobian at the corners
  Mat DFn = Mat::Identity(2 * d.m, 2 * d.m);
  for (int i = 0; i < nc; ++i) {
    ScatteringBranch br(charts[i], charts[(i + 1) % nc], P.maps[i]);
    DFn = br.DF(xpart(d, chain.orbits[i].c_minus), ypart(d, chain.orbits[i].c_plus)) * DFn;
  }
  const Eigen::EigenSolver<Mat> es(DFn);
  std::vector<double> df_logs;
  for (int i = 0; i < es.eigenvalues().size(); ++i) df_logs.push_back(std::log(std::abs(es.eigenvalues()[i])));
  std::sort(df_logs.rbegin(), df_logs.rend());

  const auto curve = chain_curve(*sys, chain, tail);
  fs::create_directories(f.out);
  save_chain((fs::path(f.out) / "chain.json").string(), chain);
  const int n = static_cast<int>(ladder.size());
  std::vector<LadderPoint> pts(n);
  parallel_for(n, f.workers, [&](int i) {
    ShadowProblem Pi = P;
    Pi.mu = ladder[i];
    pts[i].orbit = solve_shadow(Pi, so);
    pts[i].dist = shadowing_distance(pts[i].orbit, curve, tube);
    pts[i].spec = multiplier_spectrum(*sys, pts[i].orbit, 0.5, 1e-14);
  });

  double lam_sum = 0.0;
  for (int i = 0; i < nc; ++i) lam_sum += 1.0 / charts[i]->lambda(chain.corner(i));
  std::vector<double> lm, ldg, outside, Tdev, rho_mu, gap;
  double pairing = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& p = pts[i];
    const double mu = ladder[i], L = std::abs(std::log(mu));
    write_text(fs::path(f.out) / ("orbit_" + std::to_string(i) + ".json"), shadow_summary(p.orbit, p.dist, p.spec));
    write_orbit_csv((fs::path(f.out) / ("orbit_" + std::to_string(i) + ".csv")).string(), p.orbit, *sys);
    lm.push_back(std::log(mu));
    ldg.push_back(std::log(p.dist.d_global));
    outside.push_back(p.dist.d_outside / (mu * L));
    Tdev.push_back(std::abs(p.orbit.period - L * lam_sum));
    rho_mu.push_back(std::exp(p.spec.log_abs.front()) * mu);
    double g = 0.0;
    for (int j = 0; j < 2 * d.m; ++j) g = std::max(g, std::abs(p.spec.log_abs[1 + j] - df_logs[j]));
    gap.push_back(g);
    pairing = std::max(pairing, p.spec.pairing_defect);
  }
  json verdict;
  verdict["subcommand"] = "shadow";
  verdict["corners"] = nc;
  verdict["min_symplectic_angle"] = pos.margin;
  verdict["d_global_slope"] = n >= 2 ? fit_slope(lm, ldg) : kNaN;
  verdict["d_outside_over_mu_log_mu"] = outside;
  verdict["d_outside_ratio"] = *std::max_element(outside.begin(), outside.end()) /
                               *std::min_element(outside.begin(), outside.end());
  verdict["period_deviation"] = Tdev;
  verdict["large_multiplier_times_mu"] = rho_mu;
  verdict["small_pair_gap"] = gap;
  verdict["pairing_defect"] = pairing;
  verdict["DF_log_spectrum"] = df_logs;
  write_text(fs::path(f.out) / "verdict.json", verdict.dump(2));
  write_manifest(f.out, text, f.seed,
                 json{{"subcommand", "shadow"}, {"workers", f.workers}, {"shear_seeds_from", f.seed}}.dump());
  std::cout << verdict.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shilnikov boundary value problems and shadowing orbits near critical manifolds"};
  app.require_subcommand(1);
  RunFlags flags;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "experiment config (JSON)")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--workers", flags.workers, "worker threads for ladder points")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "seed for random shears and sample points");
    sub->add_option("--tol", flags.tol, "Newton tolerance override")->check(CLI::NonNegativeNumber);
  };
  auto* bvp = app.add_subcommand("model-bvp", "connection sweeps on a model system");
  auto* tb = app.add_subcommand("threebody", "regularized three-body checks");
  auto* sh = app.add_subcommand("shadow", "shadowing orbits of a heteroclinic chain");
  for (auto* s : {bvp, tb, sh}) add_flags(s);
  CLI11_PARSE(app, argc, argv);

  try {
    if (bvp->parsed()) return cmd_model_bvp(flags);
    if (tb->parsed()) return cmd_threebody(flags);
    return cmd_shadow(flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SpecError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
}
