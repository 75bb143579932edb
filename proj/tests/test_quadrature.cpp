#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "iniquity/quadrature.hpp"

using namespace iniquity;

TEST_CASE("adaptive simpson on smooth integrands") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
        Catch::Approx(1.0 / 3.0).margin(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        Catch::Approx(2.0).margin(1e-10));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0) ==
        Catch::Approx(2.0 / 3.0).margin(1e-9));
}

TEST_CASE("knotted quadrature is exact on step integrands") {
  const auto step = [](double x) { return x <= 0.5 ? 1.0 : 3.0; };
  CHECK(integrate_with_knots(step, 0.0, 1.0, {0.5}) ==
        Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("non-finite integrand raises an integration error") {
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / (x - 0.5); }, 0.0, 1.0),
                  IntegrationError);
}

TEST_CASE("sign-change bisection handles discontinuous residuals") {
  // step residual: negative below 0.3, positive at and above
  const auto r = [](double x) { return x < 0.3 ? -1.0 : 1.0; };
  CHECK(bisect_sign_change(r, 0.0, 1.0) == Catch::Approx(0.3).margin(1e-12));
  // endpoints returned when no sign change occurs in the interval
  CHECK(bisect_sign_change([](double) { return 1.0; }, 0.2, 0.9) == 0.2);
  CHECK(bisect_sign_change([](double) { return -1.0; }, 0.2, 0.9) == 0.9);
}

TEST_CASE("golden-section locates extrema of unimodal maps") {
  const double xmin =
      golden_section_min([](double x) { return (x - 0.7) * (x - 0.7); }, 0.0, 1.0);
  CHECK(xmin == Catch::Approx(0.7).margin(1e-7));
  const double xmax =
      golden_section_max([](double x) { return x * (1.0 - x); }, 0.0, 1.0);
  CHECK(xmax == Catch::Approx(0.5).margin(1e-7));
}
