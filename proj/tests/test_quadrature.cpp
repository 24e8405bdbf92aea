#include <cmath>
#include <limits>

#include "doctest.h"
#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"
#include "sgdg/quadrature.hpp"

using namespace sgdg;

TEST_CASE("gauss rules") {
  const auto r1 = gauss_rule(1);
  REQUIRE(r1.size() == 1);
  CHECK(r1.nodes[0] == doctest::Approx(0.5));
  CHECK(r1.weights[0] == doctest::Approx(1.0));

  auto integrate = [](const QuadRule1D& r, int p) {
    double s = 0.0;
    for (int q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes[q], p);
    return s;
  };
  CHECK(std::abs(integrate(gauss_rule(2), 3) - 0.25) < 1e-15);
  CHECK(std::abs(integrate(gauss_rule(5), 9) - 0.1) < 1e-14);
  for (int m = 1; m <= 30; ++m)
    for (int p = 0; p <= 2 * m - 1; ++p) {
      CAPTURE(m);
      CAPTURE(p);
      CHECK(std::abs(integrate(gauss_rule(m), p) - 1.0 / (p + 1)) < 1e-13);
    }
  CHECK_THROWS_AS(gauss_rule(0), ConfigError);
  CHECK_THROWS_AS(gauss_rule(31), ConfigError);
}

TEST_CASE("level rule") {
  CHECK(smolyak_level(7, 0) == 7);
  CHECK(smolyak_level(7, 1) == 7);
  CHECK(smolyak_level(7, 3) == 6);
  CHECK(smolyak_level(7, 20) == 1);
  CHECK(smolyak_level(2, 5) == 1);
}

TEST_CASE("smolyak rules integrate smooth functions") {
  for (int d = 1; d <= 4; ++d)
    for (int q = 1; q <= 6; ++q) {
      const auto& r = smolyak_rule(d, q);
      double s = 0.0;
      for (double w : r.weights) s += w;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    }
  // exp(x1 + x2 + x3) = product of 1D integrals (e - 1)^3
  const auto& r = smolyak_rule(3, 6);
  double s = 0.0;
  for (int q = 0; q < r.size(); ++q) {
    const auto x = r.point(q);
    s += r.weights[q] * std::exp(x[0] + x[1] + x[2]);
  }
  CHECK(s == doctest::Approx(std::pow(std::exp(1.0) - 1.0, 3)).epsilon(1e-12));
}

TEST_CASE("integration against basis functions") {
  Basis1D basis(2);
  QuadConfig cfg;
  const ScalarField one = [](std::span<const double>) { return 1.0; };
  const auto space = enumerate(SpaceKind::VHat, 2, 3, 2);
  for (const auto& b : space.dofs()) {
    if (b.level.l1() == 0 && b.poly.l1() == 0) continue;
    CHECK(std::abs(integrate_against_basis(one, b, basis, cfg)) < 1e-12);
  }
  for (const auto& b : space.dofs()) {
    const ScalarField self = [&](std::span<const double> x) {
      double v = 1.0;
      for (int m = 0; m < 2; ++m) v *= basis.eval({b.level[m], b.cell[m], b.poly[m]}, x[m]);
      return v;
    };
    CHECK(integrate_against_basis(self, b, basis, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const ScalarField f = [](std::span<const double> x) { return std::exp(x[0] * x[1]); };
  const QuadRuleND dense = tensor_rule(2, 50);
  double ref = 0.0;
  for (int q = 0; q < dense.size(); ++q) ref += dense.weights[q] * f(dense.point(q));
  const double got = integrate_against_basis(f, {{0, 0}, {0, 0}, {0, 0}}, basis, cfg);
  CHECK(std::abs(got - ref) < 1e-10);

  QuadConfig tensor;
  tensor.mode = QuadConfig::Mode::TensorPerPatch;
  tensor.points_per_cell = 20;
  CHECK(std::abs(integrate_against_basis(f, {{0, 0}, {0, 0}, {0, 0}}, basis, tensor) - ref) < 1e-12);
}

TEST_CASE("non-finite samples are reported") {
  Basis1D basis(1);
  const ScalarField bad = [](std::span<const double> x) {
    return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  CHECK_THROWS_AS(integrate_against_basis(bad, {{1}, {0}, {0}}, basis, QuadConfig{}), IntegrationError);
}

TEST_CASE("patches partition the support") {
  const auto space = enumerate(SpaceKind::VHat, 3, 4, 0);
  for (const auto& b : space.dofs()) {
    double total = 0.0;
    for (const auto& box : basis_patches(b.level, b.cell)) {
      double v = 1.0;
      for (const auto& iv : box) v *= iv.length();
      total += v;
    }
    double support = 1.0;
    for (const auto& iv : support_box(b)) support *= iv.length();
    CHECK(std::abs(total - support) < 1e-14);
  }
}

TEST_CASE("boundary integrals") {
  Basis1D basis(1);
  QuadConfig cfg;
  const ScalarField kappa = [](std::span<const double>) { return 1.0; };
  const ScalarField zero = [](std::span<const double>) { return 0.0; };
  const ScalarField one = [](std::span<const double>) { return 1.0; };
  CHECK(integrate_boundary(zero, {1, 0}, {{0, 0}, {0, 0}, {0, 0}}, basis, kappa, 10.0, cfg) == 0.0);
  CHECK(integrate_boundary(one, {1, 0}, {{0, 0}, {0, 0}, {0, 0}}, basis, kappa, 10.0, cfg) ==
        doctest::Approx(10.0).epsilon(1e-13));

  // separable g on the face x_3 = 1 of the unit cube
  const ScalarField g = [](std::span<const double> x) { return std::sin(x[0]) * std::exp(x[1]) * (1 + x[2]); };
  const BasisId b{{2, 1, 1}, {1, 0, 0}, {1, 0, 1}};
  const double got = integrate_boundary(g, {2, 1}, b, basis, kappa, 3.0, cfg);
  auto integrate_1d = [&](auto&& h, int level, int cell, int poly) {
    const auto& r = gauss_rule_cached(20);
    double s = 0.0;
    for (int half = 0; half < 2; ++half) {
      const Interval sup = element_support(level, cell);
      const double lo = sup.lo + half * 0.5 * sup.length();
      const double len = 0.5 * sup.length();
      for (int q = 0; q < r.size(); ++q) {
        const double x = lo + len * r.nodes[q];
        s += r.weights[q] * len * h(x) * basis.eval({level, cell, poly}, x);
      }
    }
    return s;
  };
  const double i0 = integrate_1d([](double x) { return std::sin(x); }, 2, 1, 1);
  const double i1 = integrate_1d([](double x) { return std::exp(x); }, 1, 0, 0);
  const Wavelet1D w{1, 0, 1};
  const double normal = 2.0 * (basis.eval_deriv(w, 1.0, Side::Left) + 3.0 * basis.eval(w, 1.0, Side::Left));
  CHECK(got == doctest::Approx(i0 * i1 * normal).epsilon(1e-12));
}

TEST_CASE("smolyak error decreases with the base level") {
  Basis1D basis(2);
  const ScalarField f = [](std::span<const double> x) { return std::exp(x[0] * x[1] * x[2]) * std::cos(3 * x[0]); };
  const BasisId b{{1, 0, 2}, {0, 0, 1}, {2, 1, 0}};
  QuadConfig ref_cfg;
  ref_cfg.mode = QuadConfig::Mode::TensorPerPatch;
  ref_cfg.points_per_cell = 24;
  const double ref = integrate_against_basis(f, b, basis, ref_cfg);
  double prev = 1e300;
  for (int iq = 3; iq <= 7; ++iq) {
    QuadConfig cfg;
    cfg.iquad = iq;
    const double err = std::abs(integrate_against_basis(f, b, basis, cfg) - ref);
    CHECK(err <= 1.1 * prev + 1e-15);
    prev = err;
  }
  CHECK(prev < 1e-12);
}
