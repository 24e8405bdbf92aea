#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"
#include "sgdg/problem.hpp"

using namespace sgdg;

namespace {

// L2 distance on a uniform 2^n grid with m Gauss points per cell and coordinate (2D).
template <class F, class G>
double l2_distance_2d(F&& f, G&& g, int n, int m) {
  const auto& r = gauss_rule_cached(m);
  const double h = std::ldexp(1.0, -n);
  double s = 0.0;
  double x[2];
  for (int i = 0; i < (1 << n); ++i)
    for (int j = 0; j < (1 << n); ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          x[0] = (i + r.nodes[a]) * h;
          x[1] = (j + r.nodes[b]) * h;
          const double e = f(std::span<const double>(x, 2)) - g(std::span<const double>(x, 2));
          s += r.weights[a] * r.weights[b] * h * h * e * e;
        }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("builtin problems are consistent") {
  for (const auto& name : builtin_problem_names()) {
    CAPTURE(name);
    const Problem p = builtin_problem(name);
    CHECK_NOTHROW(p.validate());
    REQUIRE(p.has_exact());
    CHECK(manufactured_residual(p, 200, 3, name == "ex2d_discont") <= 1e-5);
    // boundary data agrees with the exact solution on the boundary
    std::vector<double> x(p.dim, 0.3);
    for (int m = 0; m < p.dim; ++m)
      for (double side : {0.0, 1.0}) {
        auto y = x;
        y[m] = side;
        const double g = p.g ? p.g(y) : eval_separable(*p.g_separable, y);
        CHECK(g == doctest::Approx(p.exact(y)).epsilon(1e-12));
        if (p.g_separable) CHECK(eval_separable(*p.g_separable, y) == doctest::Approx(p.exact(y)).epsilon(1e-12));
      }
    if (p.f_separable && p.f) {
      const std::vector<double> z(p.dim, 0.37);
      CHECK(eval_separable(*p.f_separable, z) == doctest::Approx(p.f(z)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(builtin_problem("ex5d"), ConfigError);
}

TEST_CASE("discontinuous coefficient takes one-sided values on the interface") {
  const Problem p = builtin_problem("ex2d_discont");
  REQUIRE(p.K.kind == Coefficient::Kind::SeparableSum);
  const auto& s = p.K.terms[1][0];
  CHECK(s(0.5, Side::Left) == -1.0);
  CHECK(s(0.5, Side::Right) == 1.0);
  const double a[2] = {0.25, 0.75};
  const double b[2] = {0.75, 0.75};
  CHECK(p.K.eval(a) == 1.0);
  CHECK(p.K.eval(b) == 3.0);
}

TEST_CASE("default penalties") {
  CHECK(default_sigma(2, 1) == 10.0);
  CHECK(default_sigma(2, 2) == 20.0);
  CHECK(default_sigma(3, 1) == 15.0);
  CHECK(default_sigma(3, 2) == 30.0);
  CHECK(default_sigma(4, 1) == 30.0);
  CHECK(default_sigma(4, 2) == 60.0);
}

TEST_CASE("coefficient projection") {
  // constants project onto the single level-zero constant
  const auto c = project_coefficient([](std::span<const double>) { return 2.5; }, 2, 3, 2);
  int nonzero = 0;
  for (int r = 0; r < c.space.size(); ++r)
    if (c.coeffs[r] != 0.0) {
      ++nonzero;
      CHECK(c.space.dofs()[r].level.l1() == 0);
      CHECK(c.space.dofs()[r].poly.l1() == 0);
      CHECK(c.coeffs[r] == doctest::Approx(2.5).epsilon(1e-14));
    }
  CHECK(nonzero == 1);

  // products of polynomials of degree <= 2k are reproduced
  const ScalarField poly = [](std::span<const double> x) {
    return (1.0 + x[0] - x[0] * x[0]) * (2.0 - 3.0 * x[1] * x[1] + x[1] * x[1] * x[1] * x[1]);
  };
  const auto pp = project_coefficient(poly, 2, 2, 4);
  const ScalarField kh = [&](std::span<const double> x) { return pp.eval(x); };
  CHECK(l2_distance_2d(poly, kh, 3, 6) < 1e-10);

  // smooth coefficient: L2 error decays at least like h^{2k+1/2}
  const ScalarField k = [](std::span<const double> x) { return std::sin(x[0] * x[1]) + 1.0; };
  for (int kk = 1; kk <= 2; ++kk) {
    double prev = 0.0;
    for (int n = 2; n <= 5; ++n) {
      const auto e = project_coefficient(k, 2, n, 2 * kk);
      const ScalarField khn = [&](std::span<const double> x) { return e.eval(x); };
      const double err = l2_distance_2d(k, khn, n, 2 * kk + 3);
      if (n > 2) {
        CAPTURE(kk);
        CAPTURE(n);
        CHECK(std::log2(prev / err) >= 2 * kk + 0.5);
      }
      prev = err;
    }
  }
}
