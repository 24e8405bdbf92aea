#include "sgdg/problem.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sgdg/error.hpp"

namespace sgdg {

double eval_separable(const std::vector<SeparableTerm>& terms, std::span<const double> x) {
  double s = 0.0;
  for (const auto& t : terms) {
    double v = t.coef;
    for (std::size_t m = 0; m < t.factors.size() && v != 0.0; ++m) v *= t.factors[m](x[m]);
    s += v;
  }
  return s;
}

Coefficient Coefficient::constant(int dim, double value) {
  return constant_diagonal(std::vector<double>(dim, value));
}

Coefficient Coefficient::constant_diagonal(std::vector<double> diag) {
  for (double v : diag)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("constant coefficient must be positive definite");
  Coefficient c;
  c.kind = Kind::Constant;
  c.diagonal = std::move(diag);
  return c;
}

Coefficient Coefficient::separable(std::vector<std::vector<Weight1D>> terms) {
  if (terms.empty()) throw ConfigError("separable coefficient needs at least one term");
  Coefficient c;
  c.kind = Kind::SeparableSum;
  c.terms = std::move(terms);
  return c;
}

Coefficient Coefficient::general_field(ScalarField k) {
  Coefficient c;
  c.kind = Kind::General;
  c.general = std::move(k);
  return c;
}

double Coefficient::eval(std::span<const double> x) const {
  switch (kind) {
    case Kind::Constant:
      return diagonal.at(0);
    case Kind::SeparableSum: {
      double s = 0.0;
      for (const auto& t : terms) {
        double v = 1.0;
        for (std::size_t m = 0; m < t.size(); ++m) v *= t[m](x[m], Side::Left);
        s += v;
      }
      return s;
    }
    case Kind::General:
      return general(x);
  }
  return 0.0;
}

void Problem::validate() const {
  if (dim < 1) throw ConfigError("problem dimension must be positive");
  if (!f && !f_separable) throw ConfigError("problem " + name + " has no source term");
  if (!g && !g_separable) throw ConfigError("problem " + name + " has no boundary data");
  if (K.kind == Coefficient::Kind::Constant && static_cast<int>(K.diagonal.size()) != dim)
    throw ConfigError("constant coefficient size does not match the dimension");
  if (K.kind == Coefficient::Kind::SeparableSum)
    for (const auto& t : K.terms)
      if (static_cast<int>(t.size()) != dim) throw ConfigError("separable coefficient term has wrong arity");
  if (K.kind == Coefficient::Kind::General && !K.general) throw ConfigError("general coefficient is empty");
  auto check_terms = [&](const std::optional<std::vector<SeparableTerm>>& terms) {
    if (!terms) return;
    for (const auto& t : *terms)
      if (static_cast<int>(t.factors.size()) != dim) throw ConfigError("separable data term has wrong arity");
  };
  if (exact_separable)
    for (const auto& t : *exact_separable)
      if (static_cast<int>(t.factors.size()) != dim || static_cast<int>(t.derivatives.size()) != dim)
        throw ConfigError("separable exact solution has wrong arity");
  check_terms(f_separable);
  check_terms(g_separable);
}

namespace {

constexpr double kPi = std::numbers::pi;

double sign_half(double x, Side side) {
  if (x < 0.5) return -1.0;
  if (x > 0.5) return 1.0;
  return side == Side::Left ? -1.0 : 1.0;
}

std::function<double(double)> sin_pi() {
  return [](double x) { return std::sin(kPi * x); };
}

// u = prod_{m<d-1} sin(pi x_m) * sinh(sqrt(d-1) pi x_d) / sinh(sqrt(d-1) pi); harmonic.
Problem harmonic_problem(const std::string& name, int d) {
  const double a = std::sqrt(static_cast<double>(d - 1)) * kPi;
  const double norm = 1.0 / std::sinh(a);
  Problem p;
  p.name = name;
  p.dim = d;
  p.K = Coefficient::constant(d, 1.0);
  p.f_separable = std::vector<SeparableTerm>{};
  p.f = [](std::span<const double>) { return 0.0; };
  SeparableTerm g;
  g.coef = norm;
  for (int m = 0; m + 1 < d; ++m) g.factors.push_back(sin_pi());
  g.factors.push_back([a](double x) { return std::sinh(a * x); });
  p.g_separable = std::vector<SeparableTerm>{g};
  p.exact = [d, a, norm](std::span<const double> x) {
    double v = norm * std::sinh(a * x[d - 1]);
    for (int m = 0; m + 1 < d; ++m) v *= std::sin(kPi * x[m]);
    return v;
  };
  p.g = p.exact;
  p.exact_grad = [d, a, norm](std::span<const double> x, std::span<double> grad) {
    for (int i = 0; i < d; ++i) {
      double v = norm * (i == d - 1 ? a * std::cosh(a * x[d - 1]) : std::sinh(a * x[d - 1]));
      for (int m = 0; m + 1 < d; ++m) v *= m == i ? kPi * std::cos(kPi * x[m]) : std::sin(kPi * x[m]);
      grad[i] = v;
    }
  };
  SeparableProduct u;
  u.coef = norm;
  for (int m = 0; m + 1 < d; ++m) {
    u.factors.push_back(sin_pi());
    u.derivatives.push_back([](double x) { return kPi * std::cos(kPi * x); });
  }
  u.factors.push_back([a](double x) { return std::sinh(a * x); });
  u.derivatives.push_back([a](double x) { return a * std::cosh(a * x); });
  p.exact_separable = std::vector<SeparableProduct>{u};
  return p;
}

// u = prod sin(pi x_m), zero boundary data.
Problem sine_solution(const std::string& name, int d) {
  Problem p;
  p.name = name;
  p.dim = d;
  p.g = [](std::span<const double>) { return 0.0; };
  p.g_separable = std::vector<SeparableTerm>{};
  p.exact = [d](std::span<const double> x) {
    double v = 1.0;
    for (int m = 0; m < d; ++m) v *= std::sin(kPi * x[m]);
    return v;
  };
  p.exact_grad = [d](std::span<const double> x, std::span<double> grad) {
    for (int i = 0; i < d; ++i) {
      double v = 1.0;
      for (int m = 0; m < d; ++m) v *= m == i ? kPi * std::cos(kPi * x[m]) : std::sin(kPi * x[m]);
      grad[i] = v;
    }
  };
  SeparableProduct u;
  for (int m = 0; m < d; ++m) {
    u.factors.push_back(sin_pi());
    u.derivatives.push_back([](double x) { return kPi * std::cos(kPi * x); });
  }
  p.exact_separable = std::vector<SeparableProduct>{u};
  return p;
}

// K = sin(prod x_m) + 1 with u = prod sin(pi x_m):
// f = K d pi^2 u - cos(P) sum_i (P / x_i) d_i u.
Problem smooth_coefficient_problem(const std::string& name, int d) {
  Problem p = sine_solution(name, d);
  p.K = Coefficient::general_field([d](std::span<const double> x) {
    double prod = 1.0;
    for (int m = 0; m < d; ++m) prod *= x[m];
    return std::sin(prod) + 1.0;
  });
  p.f = [d](std::span<const double> x) {
    double prod = 1.0;
    double u = 1.0;
    for (int m = 0; m < d; ++m) {
      prod *= x[m];
      u *= std::sin(kPi * x[m]);
    }
    const double k = std::sin(prod) + 1.0;
    double conv = 0.0;
    for (int i = 0; i < d; ++i) {
      double others = 1.0;
      double du = kPi * std::cos(kPi * x[i]);
      for (int m = 0; m < d; ++m) {
        if (m == i) continue;
        others *= x[m];
        du *= std::sin(kPi * x[m]);
      }
      conv += others * du;
    }
    return k * d * kPi * kPi * u - std::cos(prod) * conv;
  };
  return p;
}

Problem discontinuous_problem() {
  Problem p = sine_solution("ex2d_discont", 2);
  Weight1D s;
  s.fn = sign_half;
  s.breaks = {0.5};
  p.K = Coefficient::separable({{Weight1D::constant(2.0), Weight1D::constant(1.0)}, {s, s}});
  const double c = 2.0 * kPi * kPi;
  auto signed_sin = [](double x) { return (x > 0.5 ? 1.0 : -1.0) * std::sin(kPi * x); };
  p.f_separable = std::vector<SeparableTerm>{{2.0 * c, {sin_pi(), sin_pi()}}, {c, {signed_sin, signed_sin}}};
  const auto terms = *p.f_separable;
  p.f = [terms](std::span<const double> x) { return eval_separable(terms, x); };
  return p;
}

}  // namespace

std::vector<std::string> builtin_problem_names() {
  return {"ex2d_const", "ex2d_smooth", "ex2d_discont", "ex3d_const", "ex3d_smooth", "ex4d_const", "ex4d_smooth"};
}

Problem builtin_problem(const std::string& name) {
  if (name == "ex2d_const") return harmonic_problem(name, 2);
  if (name == "ex2d_smooth") return smooth_coefficient_problem(name, 2);
  if (name == "ex2d_discont") return discontinuous_problem();
  if (name == "ex3d_const") return harmonic_problem(name, 3);
  if (name == "ex3d_smooth") return smooth_coefficient_problem(name, 3);
  if (name == "ex4d_const") return harmonic_problem(name, 4);
  if (name == "ex4d_smooth") return smooth_coefficient_problem(name, 4);
  std::string known;
  for (const auto& n : builtin_problem_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown problem '" + name + "' (known: " + known + ")");
}

double default_sigma(int dim, int degree) {
  double base = 5.0;
  if (dim == 2) base = 10.0;
  if (dim == 3) base = 15.0;
  if (dim >= 4) base = 30.0 * std::ldexp(1.0, dim - 4);
  return base * std::max(degree, 1);
}

double manufactured_residual(const Problem& prob, int samples, unsigned seed, bool avoid_half) {
  if (!prob.exact_grad) throw ConfigError("manufactured_residual: problem has no exact gradient");
  const int d = prob.dim;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const double h = 1e-4;
  std::vector<double> x(d), y(d), grad(d);
  double worst = 0.0;
  auto flux = [&](std::span<const double> at, int i) {
    prob.exact_grad(at, grad);
    return prob.K.eval(at) * grad[i];
  };
  for (int s = 0; s < samples; ++s) {
    for (int m = 0; m < d; ++m) {
      do {
        x[m] = u(rng);
      } while (avoid_half && std::abs(x[m] - 0.5) < 10 * h);
    }
    double div = 0.0;
    for (int i = 0; i < d; ++i) {
      y = x;
      y[i] = x[i] + h;
      const double fp = flux(y, i);
      y[i] = x[i] - h;
      const double fm = flux(y, i);
      div += (fp - fm) / (2 * h);
    }
    const double f = prob.f ? prob.f(x) : eval_separable(*prob.f_separable, x);
    worst = std::max(worst, std::abs(-div - f));
  }
  return worst;
}

double CoefficientExpansion::eval(std::span<const double> x) const {
  const Basis1D basis(degree);
  const int k1 = degree + 1;
  std::vector<double> vals(static_cast<std::size_t>(dim) * k1);
  const auto& polys = space.polys();
  double s = 0.0;
  for (const auto& el : space.elements()) {
    bool inside = true;
    for (int m = 0; m < dim && inside; ++m) {
      const Side side = x[m] <= 0.0 ? Side::Right : Side::Left;
      basis.eval_element(el.level[m], el.cell[m], x[m], side, std::span<double>(vals.data() + m * k1, k1));
      bool any = false;
      for (int i = 0; i < k1; ++i) any = any || vals[m * k1 + i] != 0.0;
      inside = any;
    }
    if (!inside) continue;
    for (std::size_t p = 0; p < polys.size(); ++p) {
      double v = coeffs[el.first_dof + p];
      for (int m = 0; m < dim && v != 0.0; ++m) v *= vals[m * k1 + polys[p][m]];
      s += v;
    }
  }
  return s;
}

CoefficientExpansion project_coefficient(const ScalarField& k, int dim, int max_level, int degree,
                                         const QuadConfig& cfg, double threshold) {
  CoefficientExpansion out;
  out.dim = dim;
  out.max_level = max_level;
  out.degree = degree;
  out.space = enumerate(SpaceKind::VHat, dim, max_level, degree);
  const Basis1D basis(degree);
  out.coeffs.assign(out.space.size(), 0.0);
  for (const auto& el : out.space.elements()) {
    const auto vals = integrate_against_element(k, el.level, el.cell, out.space.polys(), basis, cfg);
    std::copy(vals.begin(), vals.end(), out.coeffs.begin() + el.first_dof);
  }
  double top = 0.0;
  for (double c : out.coeffs) top = std::max(top, std::abs(c));
  for (double& c : out.coeffs)
    if (std::abs(c) < threshold * top) c = 0.0;
  return out;
}

}  // namespace sgdg
