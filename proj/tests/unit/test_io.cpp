#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "shilnikov/io.hpp"

using namespace shilnikov;
using doctest::Approx;

namespace {

std::filesystem::path tmpdir() {
  auto d = std::filesystem::temp_directory_path() / "shilnikov_io_test";
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("system config parsing") {
  const auto c = parse_system_config(R"({"kind": "model", "m": 1, "k": 1, "lambda": 2.0, "cubic": [[[2, 1], 0.05]]})");
  auto sys = build_system(c);
  Vec s(4);
  s << 0.1, 0.2, 0.3, 0.4;
  CHECK(sys->energy(s) == Approx(-2.0 * 0.12 + 0.05 * 0.09 * 0.4));
  const auto again = parse_system_config(to_json(c));
  CHECK(build_system(again)->energy(s) == Approx(sys->energy(s)));

  CHECK_THROWS_AS(parse_system_config("{not json"), SpecError);
  CHECK_THROWS_AS(parse_system_config(R"({"kind": "nope"})"), SpecError);
  CHECK_THROWS_AS(parse_system_config(R"({"kind": "model", "m": 1, "k": 1, "cubic": [[[2], 1.0]]})"), SpecError);
  CHECK_THROWS_AS(parse_system_config(R"({"kind": "three_body", "alpha1": -1})"), SpecError);
  CHECK(parse_system_config(R"({"kind": "glued", "omega": 2.5})").glued.omega == 2.5);
}

TEST_CASE("binary state round trip") {
  const auto path = (tmpdir() / "state.bin").string();
  Vec s(5);
  s << 1.0, -2.5, 3e-300, 0.1, 1.0 / 3.0;
  write_state(path, s);
  CHECK(std::filesystem::file_size(path) == 40);
  CHECK(read_state(path) == s);
  std::ofstream(path, std::ios::app) << "x";
  CHECK_THROWS_AS(read_state(path), IoError);
}

TEST_CASE("chart coefficient tables round trip") {
  std::vector<PolyTerm> terms = {{{0, 0, 1, 1}, -1.0}, {{1, 0, 3, 0}, 3.0}, {{0, 1, 0, 3}, -2.0}, {{2, 0, 1, 1}, -0.1}};
  auto sys = std::make_shared<PolynomialSystem>(Dims{1, 1}, terms);
  Vec z(2);
  z << 0.1, -0.05;
  const LocalGraphs g(*sys, z, 4);
  const auto path = (tmpdir() / "chart.json").string();
  save_chart(path, g);
  const LocalGraphs h = load_chart(path);
  CHECK(h.order() == 4);
  CHECK(h.lambda() == g.lambda());
  Vec zz(2), q(1);
  zz << 0.12, -0.04;
  q << 0.07;
  CHECK((h.f_plus(zz, q) - g.f_plus(zz, q)).norm() == 0.0);
  CHECK((h.f_minus(zz, q) - g.f_minus(zz, q)).norm() == 0.0);
  CHECK(h.lambda_at(zz) == g.lambda_at(zz));
}

TEST_CASE("manifest and hash are deterministic") {
  CHECK(config_hash("") == 14695981039346656037ull);
  CHECK(config_hash("a") == 0xaf63dc4c8601ec8cull);
  const auto dir = (tmpdir() / "run").string();
  write_manifest(dir, "{}", 42, R"({"subcommand": "test"})");
  std::ifstream in(dir + "/manifest.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("\"seed\": 42") != std::string::npos);
  CHECK(text.find(library_version()) != std::string::npos);
}
