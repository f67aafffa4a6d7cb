// Aberth-Ehrlich simultaneous root iteration.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bowen/errors.hpp"
#include "bowen/sphere.hpp"

namespace bowen {

namespace {

constexpr int kMaxIterations = 500;
// Fixed offset so initial guesses never sit on a symmetry axis of the input.
constexpr double kAngleOffset = 0.4;
// Sweeps performed after the residual bound first holds everywhere.
constexpr int kPolishSweeps = 3;

}  // namespace

double root_residual_bound(const Polynomial& p, Cx root) {
  return 1e-8 * (1.0 + p.max_abs_coeff()) * std::pow(1.0 + std::abs(root), p.degree());
}

std::vector<Cx> poly_roots(const Polynomial& p) {
  if (p.degree() < 1) throw std::invalid_argument("poly_roots: degree must be >= 1");

  // Exact zeros at the origin are split off so the iteration only sees
  // a polynomial with nonzero constant term.
  const auto all = p.coeffs();
  std::size_t zeros = 0;
  while (all[zeros] == Cx{}) ++zeros;
  std::vector<Cx> roots(zeros, Cx{});
  const Polynomial q(std::vector<Cx>(all.begin() + static_cast<std::ptrdiff_t>(zeros), all.end()));
  const int n = q.degree();
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-q.coeff(0) / q.coeff(1));
    return roots;
  }

  const Cx lead = q.leading();
  double cauchy = 0.0;
  for (int k = 0; k < n; ++k) cauchy = std::max(cauchy, std::abs(q.coeff(k) / lead));
  cauchy += 1.0;

  std::vector<Cx> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    z[k] = std::polar(cauchy, 2.0 * std::numbers::pi * k / n + kAngleOffset);
  }

  int polished = -1;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    bool bound_ok = true;
    double max_step = 0.0;
    for (int k = 0; k < n; ++k) {
      Cx v, dv;
      q.eval_with_derivative(z[k], v, dv);
      if (std::abs(v) > root_residual_bound(q, z[k])) bound_ok = false;
      if (v == Cx{}) continue;
      Cx repulsion{};
      for (int j = 0; j < n; ++j) {
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      }
      const Cx newton = dv == Cx{} ? Cx{1e-8, 1e-8} : v / dv;
      const Cx step = newton / (1.0 - newton * repulsion);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
      z[k] -= step;
      max_step = std::max(max_step, std::abs(step) / (1.0 + std::abs(z[k])));
    }
    if (max_step <= 1e-16) break;
    if (bound_ok) {
      if (polished < 0) polished = 0;
      if (++polished >= kPolishSweeps) break;
    }
  }

  for (Cx r : z) {
    if (!(std::abs(p(r)) <= root_residual_bound(p, r))) {
      throw NonConvergence("poly_roots: residual bound not met after iteration limit");
    }
    roots.push_back(r);
  }
  return roots;
}

}  // namespace bowen
