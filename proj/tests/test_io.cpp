#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "fracspde/io.hpp"

using namespace fracspde;

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config round trip") {
  const Json j = Json::parse(R"({
    "schema": 1, "alpha": 1.5,
    "noise": {"time": {"type": "exponential", "rate": 2.0},
              "space": {"type": "riesz", "kappa": 0.4}},
    "initial": {"type": "constant", "u0": 1.0, "u1": 0.25},
    "t_grid": {"T": 0.5, "n": 10}, "x_grid": {"lo": -3, "hi": 3, "n": 21},
    "seed": 42, "scheme": "wick_chaos", "amplitude": 0.5
  })");
  const SimulationConfig c = config_from_json(j);
  CHECK(c.alpha.alpha() == 1.5);
  CHECK(c.seed == 42);
  CHECK(c.scheme == PathScheme::WickChaos);
  CHECK(c.t_grid.n == 10);
  CHECK(c.x_grid.cells() == 21);
  CHECK(std::holds_alternative<ExponentialTime>(c.noise.time));
  const SimulationConfig d = config_from_json(config_to_json(c));
  CHECK(config_to_json(d) == config_to_json(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"alpha": 0.75})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"schema": 2})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"schema": 1, "colour": 3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"schema": 1, "alpha": "x"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"schema": 1, "alpha": 1.0})")), ConfigError);
  // alpha > 1 without initial data gets u1 = 0.
  CHECK(config_from_json(Json::parse(R"({"schema": 1, "alpha": 1.5})")).initial.has_u1());
  CHECK_THROWS_AS(
      config_from_json(Json::parse(R"({"schema": 1, "noise": {"space": {"type": "fractional", "H": [0.3]}}})")),
      ConfigError);
}

TEST_CASE("field CSV layout") {
  GridField f(TimeGrid{1.0, 2}, SpaceGrid::uniform(1, 0.0, 1.0, 2), 3, "test");
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = static_cast<double>(i);
  std::ostringstream os;
  write_field_csv(os, f);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x,value");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);
  CHECK(os.str().find("0.5,0.75,3\n") != std::string::npos);
}

TEST_CASE("binary matrix and sidecar") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const std::string path = "test_io_matrix.bin";
  write_matrix_binary(path, m, {{"what", "test"}});
  std::ifstream f(path, std::ios::binary);
  double buf[6];
  f.read(reinterpret_cast<char*>(buf), sizeof buf);
  CHECK(f.gcount() == static_cast<std::streamsize>(sizeof buf));
  CHECK(buf[1] == 2.0);
  CHECK(buf[3] == 4.0);
  std::ifstream side(path + ".json");
  const Json j = Json::parse(side);
  CHECK(j["rows"] == 2);
  CHECK(j["cols"] == 3);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}

TEST_CASE("manifest") {
  RunManifest m;
  m.subcommand = "check";
  m.seed = 3;
  m.version = kVersion;
  m.started = utc_now();
  m.finished = m.started;
  const Json j = m.to_json();
  CHECK(j["subcommand"] == "check");
  CHECK(j["version"] == kVersion);
  CHECK(j["started"].get<std::string>().size() == 20);
}
