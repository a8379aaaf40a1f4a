#include <doctest.h>

#include "lld/config.hpp"

using namespace lld;

TEST_CASE("defaults") {
  const auto c = parse_config(R"({"spec": {"alpha": 0.5, "p": 1, "q": 0}})");
  CHECK(c.spec.kind == SpecKind::scalar);
  CHECK(c.grid.ns.front() == 16);
  CHECK(c.grid.ns.back() == 4096);
  CHECK(c.grid.multiples.size() == 10);
  CHECK(c.grid.directions.size() == 1);
  CHECK(c.grid.both_signs);
  CHECK(c.h == 1.0);
  CHECK(c.estimator == Estimator::conditional);
  CHECK(c.hash.size() == 16);
  CHECK_FALSE(c.epsilon.has_value());
}

TEST_CASE("the hash follows the content, not the layout") {
  const auto a = parse_config(R"({"spec": {"alpha": 0.5}, "seed": 3})");
  const auto b = parse_config("{\n  \"seed\": 3,\n  \"spec\": {\"alpha\": 0.5}\n}");
  const auto c = parse_config(R"({"spec": {"alpha": 0.5}, "seed": 4})");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("two-dimensional defaults") {
  const auto c = parse_config(R"({"spec": {"kind": "multivariate", "alpha": 0.75,
      "atoms": [{"direction": [1, 0], "weight": 0.5}, {"direction": [0, 1], "weight": 0.5}]}})");
  CHECK(c.grid.directions.size() == 8);
  CHECK(make_law(c.spec)->dim() == 2);
}

TEST_CASE("dynamics") {
  const auto c = parse_config(R"({"spec": {"kind": "dynamics", "map": "gauss", "alpha": 0.5,
      "transfer": {"m": 64}}})");
  CHECK_FALSE(c.grid.both_signs);
  CHECK(norming_ell(c)(0.0) == doctest::Approx(1.0 / std::log(2.0)));
  const auto model = make_transfer(c.spec);
  CHECK(model.observable().kappa() == 0.0);
  const auto d = parse_config(R"({"spec": {"kind": "dynamics", "map": "gauss", "alpha": 1.5, "transfer": {"m": 64}}})");
  CHECK(make_transfer(d.spec).observable().kappa() == doctest::Approx(3.6167593479482608).epsilon(1e-10));
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(parse_config(R"({"spec": {"alpha": 1.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec": {"alpha": 0.5}, "sede": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec": {"alpha": 0.5, "ell": {"c": 1, "b": 2}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec": {"kind": "cauchy", "alpha": 0.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec": {"alpha": 0.5}, "estimator": "fast"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec": {"kind": "dynamics", "map": "tent", "alpha": 0.5}})"), ConfigError);
  try {
    parse_config(R"({"spec": {"alpha": 1.0}})");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha = 1") != std::string::npos);
  }
}

TEST_CASE("bundled configs load") {
  for (const char* name : {"pareto_half", "symmetric_1_5", "symmetric_2", "planar_0_75", "lattice_integer", "mixed",
                           "gauss_half", "gauss_1_5", "afu_1_5", "doubling_indicator"}) {
    const auto c = load_config(std::string(LLD_CONFIG_DIR) + "/" + name + ".json");
    CHECK(c.name == name);
  }
}
