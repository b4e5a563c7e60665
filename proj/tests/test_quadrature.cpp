#include <catch_amalgamated.hpp>
#include <cmath>

#include "darkpath/quadrature.hpp"

using namespace darkpath;
using Catch::Approx;

TEST_CASE("gauss-kronrod: polynomials and classics") {
  auto cubic = [](double x) { return 3 * x * x * x - x + 2; };
  CHECK(integrate(cubic, -1.0, 2.0).value == Approx(3.0 / 4 * (16 - 1) - 1.5 + 6));
  auto gauss = [](double x) { return std::exp(-x * x); };
  CHECK(integrate(gauss, -8.0, 8.0).value == Approx(std::sqrt(M_PI)).epsilon(1e-12));
  auto osc = [](double x) { return std::sin(40 * x); };
  CHECK(integrate(osc, 0.0, M_PI).value ==
        Approx((1 - std::cos(40 * M_PI)) / 40).margin(1e-11));
}

TEST_CASE("gauss-kronrod: segmented handles kinks") {
  auto kink = [](double x) { return std::abs(x - 0.3); };
  const std::vector<double> pts = {0.0, 0.3, 1.0};
  const double exact = 0.3 * 0.3 / 2 + 0.7 * 0.7 / 2;
  CHECK(integrate_segmented(kink, pts).value == Approx(exact).epsilon(1e-13));
}

TEST_CASE("gauss-kronrod: endpoint clustering tames inverse square roots") {
  auto f = [](double x) { return 1.0 / std::sqrt(x); };
  const QuadratureResult r = integrate_endpoint_clustered(f, 0.0, 1.0, {1e-12, 1e-14, 40});
  CHECK(r.converged);
  CHECK(r.value == Approx(2.0).epsilon(1e-11));
  // Steep-but-finite integrand typical of the transfer-time integrals.
  const double e = 1e-6;
  auto steep = [e](double x) { return 1.0 / std::sqrt(e + x * x); };
  const QuadratureResult r2 = integrate_endpoint_clustered(steep, 0.0, 1.0, {1e-11, 1e-14, 44});
  const double exact = std::asinh(1.0 / std::sqrt(e));
  CHECK(r2.converged);
  CHECK(r2.value == Approx(exact).epsilon(1e-10));
}

TEST_CASE("gauss-kronrod: reports non-convergence") {
  auto nasty = [](double x) { return 1.0 / std::sqrt(std::abs(x)); };
  const QuadratureResult r = integrate(nasty, 0.0, 1.0, {1e-12, 1e-15, 8});
  CHECK_FALSE(r.converged);
}

TEST_CASE("cumulative integral matches endpoint integral") {
  auto f = [](double x) { return std::cos(x) * std::exp(0.2 * x); };
  std::vector<double> nodes(33);
  for (size_t i = 0; i < nodes.size(); ++i) nodes[i] = 2.0 * i / (nodes.size() - 1);
  const std::vector<double> cum = cumulative_integral(f, nodes);
  CHECK(cum.front() == 0.0);
  CHECK(cum.back() == Approx(integrate(f, 0.0, 2.0).value).epsilon(1e-12));
}
