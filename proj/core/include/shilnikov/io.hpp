#pragma once

#include <cstdint>
#include <string>

#include "shilnikov/glued_system.hpp"
#include "shilnikov/shadow.hpp"
#include "shilnikov/three_body.hpp"

namespace shilnikov {

// System definitions as JSON text:
//   {"kind": "model", "m": 1, "k": 1, "lambda": [[[0, 0], 1.0]], "cubic": [[[2, 1], 0.05]]}
//   {"kind": "glued", "omega": 3, "delta": 0.15, "eps_z": 0.4, "lambda2": 0.1}
//   {"kind": "three_body" | "adapted_three_body", "alpha1": 0.5, "alpha2": 0.5, "mu": 0, "E": 0}
// Polynomial terms are [exponents, coefficient]; model lambda exponents run over z, cubic over (q, p).
struct SystemConfig {
  std::string kind = "model";
  ModelSpec model;
  GluedParams glued;
  ThreeBodyParams three_body;
};

SystemConfig parse_system_config(const std::string& json_text);
std::string to_json(const SystemConfig& config);
SystemPtr build_system(const SystemConfig& config);

// Phase state as flat little-endian float64 in the order (x, y, q, p).
void write_state(const std::string& path, const Vec& s);
Vec read_state(const std::string& path);

// Local graphs as JSON coefficient tables (monomial exponents -> coefficient).
void save_chart(const std::string& path, const LocalGraphs& graphs);
LocalGraphs load_chart(const std::string& path);

// {T, mu, z0, q_plus, p_minus, endpoints, residuals}
std::string connection_summary(const ConnectionSolution& sol);
void write_connection_csv(const std::string& path, const ConnectionSolution& sol, const HamiltonianSystem& sys,
                          int samples = 400);

// Corners, exit and entry data, flight times and angles.
void save_chain(const std::string& path, const HeteroclinicChain& chain);
HeteroclinicChain load_chain(const std::string& path);

std::string shadow_summary(const ShadowOrbit& orbit, const ShadowDistance& dist, const MultiplierSpectrum& spec);
// Columns t, x..., y..., q..., p..., H.
void write_orbit_csv(const std::string& path, const ShadowOrbit& orbit, const HamiltonianSystem& sys,
                     double dt = 0.01);

// FNV-1a of the text.
std::uint64_t config_hash(const std::string& text);
// manifest.json with the config hash, library version, seed and extra JSON fields.
void write_manifest(const std::string& dir, const std::string& config_text, std::uint64_t seed,
                    const std::string& extra_json = "{}");

std::string library_version();

}  // namespace shilnikov
