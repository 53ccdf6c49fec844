#include <catch2/catch_amalgamated.hpp>

#include "roademd/measure.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace roademd;

TEST_CASE("density construction validates its shape") {
  CHECK_NOTHROW(Density({0.0, 1.0}, {0.5}));
  CHECK_THROWS_AS(Density({0.5, 1.0}, {0.5}), ValidationError);   // must start at 0
  CHECK_THROWS_AS(Density({0.0, 1.0, 0.5}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(Density({0.0, 1.0}, {-0.5}), ValidationError);
  CHECK_THROWS_AS(Density({0.0, 1.0}, {0.5, 0.5}), ValidationError);  // count mismatch
}

TEST_CASE("cdf evaluates the step integral") {
  Density uniform = Density::uniform(1.0, 0.4);
  CHECK(uniform.cdf(0.5) == Catch::Approx(0.2));
  CHECK(uniform.cdf(0.0) == 0.0);
  Density steps({0.0, 1.0, 2.0}, {1.0, 3.0});
  CHECK(steps.cdf(1.5) == Catch::Approx(2.5));
  CHECK(steps.total_mass() == Catch::Approx(4.0));
  CHECK_THROWS_AS(steps.cdf(2.5), ValidationError);
}

TEST_CASE("inverse cdf returns the least coordinate reaching the mass") {
  Density uniform = Density::uniform(1.0, 0.4);
  CHECK(uniform.inverse_cdf(0.2) == Catch::Approx(0.5));
  CHECK(uniform.inverse_cdf(uniform.total_mass()) == Catch::Approx(1.0));
  Density gap({0.0, 1.0, 2.0, 3.0}, {1.0, 0.0, 1.0});
  CHECK(gap.inverse_cdf(1.0) == Catch::Approx(1.0));  // infimum, before the zero stretch
  CHECK(gap.inverse_cdf(1.0 + 1e-6) > 2.0);
  CHECK(gap.inverse_cdf(0.0) == 0.0);
  CHECK_THROWS_AS(gap.inverse_cdf(-0.1), ValidationError);
  CHECK_THROWS_AS(gap.inverse_cdf(2.1), ValidationError);
}

TEST_CASE("cdf and inverse cdf are mutually consistent") {
  std::mt19937_64 g = make_stream(2024, 20);
  for (int trial = 0; trial < 40; ++trial) {
    Density d = testsupport::random_density(g, uniform_in(g, 0.5, 2.0));
    for (int k = 0; k < 15; ++k) {
      double x = uniform01(g) * d.total_mass();
      CHECK(d.cdf(d.inverse_cdf(x)) == Catch::Approx(x).margin(1e-12));
    }
  }
}

TEST_CASE("qcost matches the worked uniform values") {
  CHECK(Density::uniform(1.0, 0.4).qcost(1.0 / 3.0) == Catch::Approx(5.0 / 36.0));
  CHECK(Density::uniform(1.0, 0.8).qcost(2.0 / 3.0) == Catch::Approx(5.0 / 18.0));
  CHECK(Density::uniform(1.0, 0.8).qcost(0.0) == 0.0);
}

TEST_CASE("qcost is convex, Lipschitz, supported by tangents, and matches quadrature") {
  std::mt19937_64 g = make_stream(2024, 21);
  for (int trial = 0; trial < 30; ++trial) {
    double L = uniform_in(g, 0.5, 2.0);
    Density d = testsupport::random_density(g, L);
    double total = d.total_mass();
    if (total <= 1e-9) continue;
    for (int k = 0; k < 10; ++k) {
      double x1 = uniform01(g) * total;
      double x2 = uniform01(g) * total;
      double mid = 0.5 * (x1 + x2);
      CHECK(d.qcost(mid) <= 0.5 * (d.qcost(x1) + d.qcost(x2)) + 1e-12);
      CHECK(std::abs(d.qcost(x1) - d.qcost(x2)) <= L * std::abs(x1 - x2) + 1e-12);
      // Tangent at x2 supports the graph (the subgradient is the inverse cdf).
      CHECK(d.qcost(x1) >= d.qcost(x2) + d.inverse_cdf(x2) * (x1 - x2) - 1e-12);
    }
    double x = uniform01(g) * total;
    CHECK(d.qcost(x) == Catch::Approx(testsupport::numeric_qcost(d, x)).margin(1e-9));
  }
}

TEST_CASE("qcost at full mass is the first moment") {
  std::mt19937_64 g = make_stream(2024, 22);
  for (int trial = 0; trial < 20; ++trial) {
    Density d = testsupport::random_density(g, uniform_in(g, 0.5, 2.0));
    if (d.total_mass() <= 1e-9) continue;
    // Independent route: integrate y * phi(y) piece by piece.
    double moment = 0.0;
    const auto& b = d.breakpoints();
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
      moment += d.values()[i] * 0.5 * (b[i + 1] * b[i + 1] - b[i] * b[i]);
    CHECK(d.first_moment() == Catch::Approx(moment).margin(1e-12));
  }
}

TEST_CASE("reverse mirrors the density") {
  Density u = Density::uniform(1.0, 0.4);
  CHECK(u.reverse().values() == u.values());
  Density steps({0.0, 1.0, 2.0}, {1.0, 3.0});
  Density rev = steps.reverse();
  CHECK(rev.values() == std::vector<double>{3.0, 1.0});
  CHECK(rev.total_mass() == Catch::Approx(steps.total_mass()));

  std::mt19937_64 g = make_stream(2024, 23);
  for (int trial = 0; trial < 20; ++trial) {
    Density d = testsupport::random_density(g, uniform_in(g, 0.5, 2.0));
    CHECK(d.reverse().total_mass() == Catch::Approx(d.total_mass()).margin(1e-12));
    CHECK(d.reverse().reverse().values() == d.values());
  }
}

TEST_CASE("pointwise combination on merged grids") {
  Density a({0.0, 2.0}, {2.0});
  Density b({0.0, 1.0, 2.0}, {1.0, 3.0});
  Density m = Density::combine(a, b, Density::Combine::Min);
  CHECK(m.value_at(0.5) == Catch::Approx(1.0));
  CHECK(m.value_at(1.5) == Catch::Approx(2.0));

  Density diff = Density::combine(b, m, Density::Combine::Subtract);
  CHECK(diff.value_at(0.5) == Catch::Approx(0.0));
  CHECK(diff.value_at(1.5) == Catch::Approx(1.0));
  CHECK_THROWS_AS(Density::combine(m, b, Density::Combine::Subtract), ValidationError);
}

TEST_CASE("measure-level min and subtract") {
  RoadMap map({"u", "v"}, {{"a", "u", "v", 1.0}, {"b", "v", "u", 1.0}});
  Measure x{{"a", Density::uniform(1.0, 1.0)}};
  Measure y{{"a", Density::uniform(1.0, 1.0)}};
  Measure mn = pointwise_min(x, y);
  CHECK(measures_equal(mn, x));
  CHECK(total_mass(subtract(x, mn)) == 0.0);

  Measure z{{"b", Density::uniform(1.0, 1.0)}};
  CHECK(pointwise_min(x, z).empty());  // disjoint supports
  CHECK_THROWS_AS(subtract(x, z), ValidationError);
}

TEST_CASE("measure totals and validation") {
  RoadMap sq({"1", "2", "3", "4"}, {{"N", "1", "2", 1.0},
                                    {"E", "2", "3", 1.0},
                                    {"S", "3", "4", 1.0},
                                    {"W", "4", "1", 1.0}});
  Measure supply{{"E", Density::uniform(1.0, 0.4)}, {"S", Density::uniform(1.0, 0.6)}};
  CHECK(total_mass(supply) == Catch::Approx(1.0));
  CHECK(road_mass(supply, "E") == Catch::Approx(0.4));
  CHECK(road_mass(supply, "N") == 0.0);
  CHECK(total_mass(Measure{}) == 0.0);
  CHECK_NOTHROW(validate_measure(sq, supply, "supply"));

  Measure bad_road{{"X", Density::uniform(1.0, 1.0)}};
  CHECK_THROWS_AS(validate_measure(sq, bad_road, "m"), ValidationError);
  Measure bad_span{{"E", Density::uniform(0.5, 1.0)}};
  CHECK_THROWS_AS(validate_measure(sq, bad_span, "m"), ValidationError);
}

TEST_CASE("density slices re-anchor to zero") {
  Density steps({0.0, 1.0, 2.0}, {1.0, 3.0});
  Density right = steps.slice(1.0, 2.0);
  CHECK(right.length() == Catch::Approx(1.0));
  CHECK(right.total_mass() == Catch::Approx(3.0));
  CHECK(right.value_at(0.5) == Catch::Approx(3.0));
  Density middle = steps.slice(0.5, 1.5);
  CHECK(middle.total_mass() == Catch::Approx(0.5 + 1.5));
}
