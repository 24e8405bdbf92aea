#include "sgdg/basis1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"

namespace sgdg {

void legendre_values(int n, double t, std::span<double> p, std::span<double> dp) {
  p[0] = 1.0;
  if (n >= 1) p[1] = t;
  for (int q = 2; q <= n; ++q) p[q] = ((2.0 * q - 1.0) * t * p[q - 1] - (q - 1.0) * p[q - 2]) / q;
  if (dp.empty()) return;
  dp[0] = 0.0;
  if (n >= 1) dp[1] = 1.0;
  // P'_q = P'_{q-2} + (2q-1) P_{q-1}
  for (int q = 2; q <= n; ++q) dp[q] = dp[q - 2] + (2.0 * q - 1.0) * p[q - 1];
}

double PolyCoeffs::value(double t) const {
  const int n = degree();
  std::array<double, 2 * kMaxAlpertDegree + 2> p{};
  legendre_values(n, t, p);
  double s = 0.0;
  for (int q = 0; q <= n; ++q) s += c[q] * std::sqrt(2.0 * q + 1.0) * p[q];
  return s;
}

double PolyCoeffs::derivative(double t) const {
  const int n = degree();
  std::array<double, 2 * kMaxAlpertDegree + 2> p{};
  std::array<double, 2 * kMaxAlpertDegree + 2> dp{};
  legendre_values(n, t, p, dp);
  double s = 0.0;
  for (int q = 0; q <= n; ++q) s += c[q] * std::sqrt(2.0 * q + 1.0) * dp[q];
  return s;
}

double Generator::operator()(double x, Side side) const {
  const bool use_left = x < 0.0 || (x == 0.0 && side == Side::Left);
  if (use_left) return left.value(2.0 * x + 1.0);
  return right.value(2.0 * x - 1.0);
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Removes the components along an orthonormal set, twice.
void project_out(Vec& v, const std::vector<Vec>& q) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : q) {
      const double a = dot(v, e);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= a * e[i];
    }
}

// Coefficients (left half then right half, unit-length cell-orthonormal
// Legendre) of g restricted to (-1,0) and (0,1).
template <class F>
Vec piecewise_coefficients(int k, F&& g) {
  const auto& rule = gauss_rule_cached(2 * kMaxAlpertDegree + 4);
  Vec out(2 * (k + 1), 0.0);
  std::array<double, 2 * kMaxAlpertDegree + 2> p{};
  for (int q = 0; q < rule.size(); ++q) {
    const double t = 2.0 * rule.nodes[q] - 1.0;
    legendre_values(k, t, p);
    const double xl = rule.nodes[q] - 1.0;  // in (-1,0)
    const double xr = rule.nodes[q];        // in (0,1)
    const double gl = g(xl);
    const double gr = g(xr);
    for (int r = 0; r <= k; ++r) {
      const double e = std::sqrt(2.0 * r + 1.0) * p[r];
      out[r] += rule.weights[q] * gl * e;
      out[k + 1 + r] += rule.weights[q] * gr * e;
    }
  }
  return out;
}

Generator to_generator(int k, const Vec& v) {
  Generator g;
  g.left.c.assign(v.begin(), v.begin() + k + 1);
  g.right.c.assign(v.begin() + k + 1, v.end());
  return g;
}

}  // namespace

std::vector<Generator> build_alpert_generators(int k) {
  if (k < 0 || k > kMaxAlpertDegree)
    throw ConfigError("alpert generators: degree must be in 0.." + std::to_string(kMaxAlpertDegree));
  const int dim = 2 * (k + 1);

  // Moment constraints against Legendre polynomials on [-1,1]; span{P_0..P_q}
  // equals span{1, x, .., x^q} but is far better conditioned.
  std::vector<Vec> moments;
  for (int q = 0; q <= 2 * k; ++q) {
    moments.push_back(piecewise_coefficients(k, [q](double x) {
      std::array<double, 2 * kMaxAlpertDegree + 2> p{};
      legendre_values(q, x, p);
      return p[q];
    }));
  }

  std::vector<Vec> f(k + 1);
  // f_j (1-based) is orthogonal to x^0 .. x^{j+k-1} and to f_{j+1} .. f_{k+1}.
  for (int j = k + 1; j >= 1; --j) {
    std::vector<Vec> constraints(moments.begin(), moments.begin() + (j + k));
    for (int i = j + 1; i <= k + 1; ++i) constraints.push_back(f[i - 1]);
    std::vector<Vec> q;
    for (auto c : constraints) {
      project_out(c, q);
      const double n = std::sqrt(dot(c, c));
      if (n < 1e-12) continue;
      for (auto& x : c) x /= n;
      q.push_back(std::move(c));
    }
    Vec best;
    double best_norm = -1.0;
    for (int e = 0; e < dim; ++e) {
      Vec v(dim, 0.0);
      v[e] = 1.0;
      project_out(v, q);
      const double n = std::sqrt(dot(v, v));
      if (n > best_norm) {
        best_norm = n;
        best = std::move(v);
      }
    }
    for (auto& x : best) x /= best_norm;
    // leading monomial coefficient on (0,1) positive
    if (best[dim - 1] < 0.0)
      for (auto& x : best) x = -x;
    f[j - 1] = std::move(best);
  }

  std::vector<Generator> out;
  out.reserve(k + 1);
  for (const auto& v : f) out.push_back(to_generator(k, v));
  return out;
}

std::vector<Generator> build_nonorthogonal_generators(int k) {
  if (k < 0 || k > kMaxAlpertDegree)
    throw ConfigError("non-orthogonal generators: degree must be in 0.." +
                      std::to_string(kMaxAlpertDegree));
  std::vector<Generator> out;
  for (int i = 0; i <= k; ++i) {
    const Vec v = piecewise_coefficients(k, [i](double x) {
      const double m = std::pow(x, i);
      return x < 0.0 ? m : -m;
    });
    out.push_back(to_generator(k, v));
  }
  return out;
}

int cells_at_level(int level) { return level <= 1 ? 1 : 1 << (level - 1); }

int element_index(int level, int cell) { return level == 0 ? 0 : (1 << (level - 1)) + cell; }

Element1D element_of(int index) {
  if (index == 0) return {0, 0};
  int level = 1;
  while ((1 << level) <= index) ++level;
  return {level, index - (1 << (level - 1))};
}

Interval element_support(int level, int cell) {
  if (level <= 1) return {0.0, 1.0};
  const double w = std::ldexp(1.0, 1 - level);
  return {cell * w, (cell + 1) * w};
}

int locate_cell(int level, double x, Side side) {
  const int n = 1 << level;
  const double s = std::ldexp(x, level);
  int c = side == Side::Left ? static_cast<int>(std::ceil(s)) - 1 : static_cast<int>(std::floor(s));
  return std::clamp(c, 0, n - 1);
}

Basis1D::Basis1D(int degree, Family family) : degree_(degree), family_(family) {
  generators_ = family == Family::Orthonormal ? build_alpert_generators(degree)
                                             : build_nonorthogonal_generators(degree);
  level0_.resize(degree + 1);
  for (int i = 0; i <= degree; ++i) {
    level0_[i].c.assign(degree + 1, 0.0);
    level0_[i].c[i] = 1.0;
  }
}

const PolyCoeffs& Basis1D::piece(int level, int poly, int half) const {
  if (level == 0) return level0_[poly];
  return half == 0 ? generators_[poly].left : generators_[poly].right;
}

void Basis1D::eval_element(int level, int cell, double x, Side side, std::span<double> values,
                           std::span<double> derivs) const {
  const int k = degree_;
  std::fill(values.begin(), values.begin() + k + 1, 0.0);
  if (!derivs.empty()) std::fill(derivs.begin(), derivs.begin() + k + 1, 0.0);

  const double s = std::ldexp(x, level);
  int c = side == Side::Left ? static_cast<int>(std::ceil(s)) - 1 : static_cast<int>(std::floor(s));
  if (c < 0 || c >= (1 << level)) return;
  if (level > 0 && c / 2 != cell) return;
  const int half = level == 0 ? 0 : c % 2;
  const double t = 2.0 * (s - c) - 1.0;
  const double scale = std::sqrt(std::ldexp(1.0, level));
  const double dscale = scale * std::ldexp(2.0, level);

  std::array<double, kMaxAlpertDegree + 1> p{};
  std::array<double, kMaxAlpertDegree + 1> dp{};
  legendre_values(k, t, p, dp);
  for (int i = 0; i <= k; ++i) {
    const PolyCoeffs& pc = piece(level, i, half);
    double v = 0.0;
    double dv = 0.0;
    for (int q = 0; q <= k; ++q) {
      const double nq = std::sqrt(2.0 * q + 1.0);
      v += pc.c[q] * nq * p[q];
      dv += pc.c[q] * nq * dp[q];
    }
    values[i] = scale * v;
    if (!derivs.empty()) derivs[i] = dscale * dv;
  }
}

double Basis1D::eval(const Wavelet1D& w, double x, Side side) const {
  std::array<double, kMaxAlpertDegree + 1> v{};
  eval_element(w.level, w.cell, x, side, v);
  return v[w.poly];
}

double Basis1D::eval_deriv(const Wavelet1D& w, double x, Side side) const {
  std::array<double, kMaxAlpertDegree + 1> v{};
  std::array<double, kMaxAlpertDegree + 1> d{};
  eval_element(w.level, w.cell, x, side, v, d);
  return d[w.poly];
}

}  // namespace sgdg
