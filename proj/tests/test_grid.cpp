#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sslab/grid.hpp"

using namespace sslab;

TEST_CASE("trapezoid axis nudges endpoints strictly inside", "[grid]") {
  const Axis ax = build_axis({0.0, 1.0}, 3, QuadRule::Trapezoid);
  REQUIRE(ax.node[0] == Catch::Approx(1e-9).epsilon(1e-6));
  REQUIRE(ax.node[1] == 0.5);
  REQUIRE(ax.node[2] == Catch::Approx(1.0 - 1e-9).epsilon(1e-12));
  REQUIRE(ax.node[0] > 0.0);
  REQUIRE(ax.node[2] < 1.0);
  double sum = 0.0;
  for (double w : ax.weight) sum += w;
  REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quadrature weights integrate the constant 1 to the region size",
          "[grid]") {
  for (QuadRule rule : {QuadRule::Trapezoid, QuadRule::GaussLegendre}) {
    const Axis ax = build_axis({0.02, 0.98}, 512, rule);
    double sum = 0.0;
    for (double w : ax.weight) sum += w;
    REQUIRE(sum == Catch::Approx(0.96).epsilon(1e-10));
    for (std::size_t i = 0; i < ax.node.size(); ++i) {
      REQUIRE(ax.node[i] > 0.02);
      REQUIRE(ax.node[i] < 0.98);
      REQUIRE(ax.weight[i] > 0.0);
      if (i > 0) REQUIRE(ax.node[i] > ax.node[i - 1]);
    }
  }
}

TEST_CASE("Gauss-Legendre integrates polynomials to machine precision",
          "[grid]") {
  const Axis ax = build_axis({0.0, 1.0}, 64, QuadRule::GaussLegendre);
  double quad = 0.0;
  for (std::size_t i = 0; i < ax.node.size(); ++i)
    quad += ax.weight[i] * ax.node[i] * ax.node[i];
  REQUIRE(quad == Catch::Approx(1.0 / 3.0).margin(1e-14));

  // resolution 8 is exact through degree 15
  const Axis ax8 = build_axis({0.0, 1.0}, 8, QuadRule::GaussLegendre);
  double q15 = 0.0;
  for (std::size_t i = 0; i < ax8.node.size(); ++i)
    q15 += ax8.weight[i] * std::pow(ax8.node[i], 15);
  REQUIRE(q15 == Catch::Approx(1.0 / 16.0).margin(1e-13));
}

TEST_CASE("tensor grid enumerates the product of axis nodes", "[grid]") {
  const ParamDomain box({{0.0, 1.0}, {2.0, 4.0}});
  const std::vector<int> res{5, 7};
  const Grid grid(box, res, QuadRule::Trapezoid);
  REQUIRE(grid.dim() == 2);
  REQUIRE(grid.size() == 35);

  // flat index decodes as (i mod r0, i div r0)
  const auto n12 = grid.node(12);
  REQUIRE(n12[0] == grid.axis(0).node[12 % 5]);
  REQUIRE(n12[1] == grid.axis(1).node[12 / 5]);
  REQUIRE(grid.log_weight(12) ==
          Catch::Approx(grid.axis(0).log_weight[2] + grid.axis(1).log_weight[2]));

  double total = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) total += grid.weight(g);
  REQUIRE(total == Catch::Approx(2.0).epsilon(1e-10));  // |box| = 1 * 2
}

TEST_CASE("grid construction rejects invalid requests", "[grid]") {
  const ParamDomain line({{0.0, 1.0}});
  const std::vector<int> too_small{2};
  REQUIRE_THROWS_AS(Grid(line, too_small, QuadRule::Trapezoid), ConfigError);
  const std::vector<int> wrong_dim{8, 8};
  REQUIRE_THROWS_AS(Grid(line, wrong_dim, QuadRule::Trapezoid), ConfigError);
}

TEST_CASE("quadrature rule names round-trip", "[grid]") {
  REQUIRE(parse_quad_rule("trapezoid") == QuadRule::Trapezoid);
  REQUIRE(parse_quad_rule("gauss-legendre") == QuadRule::GaussLegendre);
  REQUIRE(quad_rule_name(QuadRule::GaussLegendre) == "gauss-legendre");
  REQUIRE_THROWS_AS(parse_quad_rule("simpson"), ConfigError);
}
