#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "polysparse/rng.hpp"
#include "polysparse/system.hpp"

using namespace polysparse;

TEST_CASE("system JSON round trip", "[system]") {
  const MonomialBasis basis = enumerate_basis(3, 2);
  CounterRng rng(71, 0, 0);
  PolynomialSystem sys;
  sys.basis = basis;
  sys.A.resize(4, basis.size());
  for (Eigen::Index i = 0; i < sys.A.size(); ++i)
    sys.A(i) = rng.next_uniform() > 0.3 ? rng.next_gaussian() : 0.0;
  sys.b.resize(4);
  sys.y.resize(4);
  for (int i = 0; i < 4; ++i) {
    sys.b[i] = rng.next_gaussian();
    sys.y[i] = rng.next_gaussian();
  }

  const std::string path = "system_io_roundtrip.json";
  save_system(sys, path);
  const PolynomialSystem loaded = load_system(path);
  std::remove(path.c_str());

  CHECK(loaded.basis.n == 3);
  CHECK(loaded.basis.d == 2);
  CHECK(loaded.A == sys.A);
  CHECK(loaded.b == sys.b);
  CHECK(loaded.y == sys.y);
}

TEST_CASE("loader maps terms through the canonical column order", "[system]") {
  const auto j = nlohmann::json::parse(R"({
    "n": 2, "d": 2,
    "equations": [
      { "b": 1.0, "y": 3.0, "terms": [
        { "alpha": [0, 1], "coeff": 2.0 },
        { "alpha": [1, 1], "coeff": -1.0 },
        { "alpha": [1, 1], "coeff": -1.0 }
      ] }
    ]
  })");
  const PolynomialSystem sys = system_from_json(j);
  REQUIRE(sys.A.rows() == 1);
  REQUIRE(sys.A.cols() == 5);
  CHECK(sys.A(0, 0) == 0.0);
  CHECK(sys.A(0, 1) == 2.0);
  CHECK(sys.A(0, 3) == -2.0);  // duplicate terms accumulate
  CHECK(sys.b[0] == 1.0);
  CHECK(sys.y[0] == 3.0);
}

TEST_CASE("loader rejects bad terms", "[system]") {
  auto base = nlohmann::json::parse(R"({
    "n": 2, "d": 2,
    "equations": [ { "b": 0.0, "y": 1.0, "terms": [ { "alpha": [1, 0], "coeff": 1.0 } ] } ]
  })");

  auto degree_zero = base;
  degree_zero["equations"][0]["terms"][0]["alpha"] = {0, 0};
  CHECK_THROWS_WITH(system_from_json(degree_zero), Catch::Matchers::ContainsSubstring("outside"));

  auto too_high = base;
  too_high["equations"][0]["terms"][0]["alpha"] = {2, 1};
  CHECK_THROWS_WITH(system_from_json(too_high), Catch::Matchers::ContainsSubstring("outside"));

  auto wrong_length = base;
  wrong_length["equations"][0]["terms"][0]["alpha"] = {1, 0, 0};
  CHECK_THROWS_WITH(system_from_json(wrong_length),
                    Catch::Matchers::ContainsSubstring("does not match"));

  auto negative = base;
  negative["equations"][0]["terms"][0]["alpha"] = {2, -1};
  CHECK_THROWS_WITH(system_from_json(negative),
                    Catch::Matchers::ContainsSubstring("negative exponent"));

  auto missing_y = base;
  missing_y["equations"][0].erase("y");
  CHECK_THROWS_AS(system_from_json(missing_y), std::runtime_error);
}

TEST_CASE("loading a missing file reports the path", "[system]") {
  CHECK_THROWS_WITH(load_system("definitely_not_here.json"),
                    Catch::Matchers::ContainsSubstring("definitely_not_here.json"));
}

TEST_CASE("absent terms mean zero coefficients", "[system]") {
  const auto j = nlohmann::json::parse(R"({
    "n": 2, "d": 1,
    "equations": [ { "b": 0.5, "y": 1.5 } ]
  })");
  const PolynomialSystem sys = system_from_json(j);
  CHECK(sys.A.isZero());
}
