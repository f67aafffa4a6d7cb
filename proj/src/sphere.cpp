#include "bowen/sphere.hpp"

#include <algorithm>
#include <cmath>

#include "bowen/errors.hpp"

namespace bowen {

namespace {

// Common-factor gate for RationalMap validation.
constexpr double kCommonRootTolerance = 1e-8;

SpherePoint quotient(Cx p, Cx q) {
  if (std::abs(p) >= kInfinityModulus * std::abs(q)) {
    return SpherePoint::infinity();
  }
  return SpherePoint::finite(p / q);
}

// Drops leading coefficients that are rounding noise from a cancellation.
Polynomial strip_relative(const Polynomial& p, double rel) {
  std::vector<Cx> c(p.coeffs().begin(), p.coeffs().end());
  const double scale = p.max_abs_coeff();
  while (!c.empty() && std::abs(c.back()) <= rel * scale) c.pop_back();
  return Polynomial(std::move(c));
}

std::vector<SpherePoint> roots_padded(const Polynomial& p, int total) {
  std::vector<SpherePoint> out;
  out.reserve(static_cast<std::size_t>(std::max(total, 0)));
  if (p.degree() >= 1) {
    for (Cx r : poly_roots(p)) out.push_back(SpherePoint::finite(r));
  }
  while (static_cast<int>(out.size()) < total) out.push_back(SpherePoint::infinity());
  return out;
}

}  // namespace

SpherePoint SpherePoint::finite(Cx z) {
  SpherePoint p;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
      std::abs(z) > kInfinityModulus) {
    p.inf_ = true;
    return p;
  }
  p.z_ = z;
  return p;
}

bool canonical_less(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinity() || b.is_infinity()) return !a.is_infinity() && b.is_infinity();
  if (a.value().real() != b.value().real()) return a.value().real() < b.value().real();
  return a.value().imag() < b.value().imag();
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinity() && b.is_infinity()) return 0.0;
  double d;
  if (a.is_infinity() || b.is_infinity()) {
    const Cx z = a.is_infinity() ? b.value() : a.value();
    d = 2.0 / std::sqrt(1.0 + std::norm(z));
  } else {
    const Cx z = a.value(), w = b.value();
    d = 2.0 * std::abs(z - w) /
        (std::sqrt(1.0 + std::norm(z)) * std::sqrt(1.0 + std::norm(w)));
  }
  return std::clamp(d, 0.0, 2.0);
}

Vec3 to_sphere(const SpherePoint& p) {
  if (p.is_infinity()) return {0.0, 0.0, 1.0};
  const Cx z = p.value();
  const double n = std::norm(z);
  const double s = 1.0 / (1.0 + n);
  return {2.0 * z.real() * s, 2.0 * z.imag() * s, (n - 1.0) * s};
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::vector<Cx> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == Cx{}) coeffs_.pop_back();
}

Polynomial Polynomial::monomial(Cx c, int degree) {
  std::vector<Cx> v(static_cast<std::size_t>(degree) + 1);
  v.back() = c;
  return Polynomial(std::move(v));
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (Cx c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

Cx Polynomial::operator()(Cx z) const {
  Cx acc{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void Polynomial::eval_with_derivative(Cx z, Cx& value, Cx& deriv) const {
  value = Cx{};
  deriv = Cx{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    deriv = deriv * z + value;
    value = value * z + *it;
  }
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial();
  std::vector<Cx> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::reversed(int d) const {
  std::vector<Cx> r(static_cast<std::size_t>(d) + 1);
  for (int k = 0; k <= degree(); ++k) r[static_cast<std::size_t>(d - k)] = coeffs_[k];
  return Polynomial(std::move(r));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<Cx> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
  }
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  return a + Cx{-1.0, 0.0} * b;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  std::vector<Cx> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(Cx s, const Polynomial& p) {
  std::vector<Cx> c(p.coeffs_);
  for (Cx& x : c) x *= s;
  return Polynomial(std::move(c));
}

// ---------------------------------------------------------------------------
// RationalMap

RationalMap::RationalMap(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (num_.is_zero()) throw InvalidMap("numerator is the zero polynomial");
  if (den_.is_zero()) throw InvalidMap("denominator is the zero polynomial");
  degree_ = std::max(num_.degree(), den_.degree());
  if (degree_ < 1) throw InvalidMap("constant map");
  if (num_.degree() >= 1 && den_.degree() >= 1) {
    const auto pr = poly_roots(num_);
    const auto qr = poly_roots(den_);
    for (Cx a : pr) {
      for (Cx b : qr) {
        if (chordal_distance(a, b) <= kCommonRootTolerance) {
          throw InvalidMap("numerator and denominator share a root");
        }
      }
    }
  }
  num_rev_ = num_.reversed(degree_);
  den_rev_ = den_.reversed(degree_);
}

SpherePoint RationalMap::operator()(const SpherePoint& z) const {
  if (z.is_infinity()) return quotient(num_rev_.coeff(0), den_rev_.coeff(0));
  const Cx w = z.value();
  if (std::abs(w) <= 1.0) return quotient(num_(w), den_(w));
  const Cx u = 1.0 / w;
  return quotient(num_rev_(u), den_rev_(u));
}

double spherical_derivative_norm(const RationalMap& f, const SpherePoint& z, Chart chart) {
  bool at_origin;
  switch (chart) {
    case Chart::Origin:
      at_origin = z.is_finite();
      break;
    case Chart::Infinity:
      at_origin = z.is_finite() && z.value() == Cx{};
      break;
    default:
      at_origin = z.is_finite() && std::abs(z.value()) <= 1.0;
  }
  const Polynomial& p = at_origin ? f.num() : f.num_at_infinity();
  const Polynomial& q = at_origin ? f.den() : f.den_at_infinity();
  const Cx w = at_origin ? z.value() : (z.is_infinity() ? Cx{} : 1.0 / z.value());
  Cx pv, pd, qv, qd;
  p.eval_with_derivative(w, pv, pd);
  q.eval_with_derivative(w, qv, qd);
  const double wronskian = std::abs(pd * qv - pv * qd);
  return wronskian * (1.0 + std::norm(w)) / (std::norm(pv) + std::norm(qv));
}

std::vector<SpherePoint> preimages(const RationalMap& f, const SpherePoint& z) {
  const int d = f.degree();
  if (z.is_infinity()) return roots_padded(f.den(), d);
  const Cx c = z.value();
  const Polynomial r =
      std::abs(c) <= 1.0 ? f.num() - c * f.den() : f.den() - (1.0 / c) * f.num();
  if (r.is_zero()) throw InvalidMap("map is constant on the requested fiber");
  return roots_padded(r, d);
}

std::vector<SpherePoint> critical_points(const RationalMap& f) {
  const Polynomial w = strip_relative(
      f.num().derivative() * f.den() - f.num() * f.den().derivative(), 1e-14);
  return roots_padded(w, 2 * f.degree() - 2);
}

std::vector<SpherePoint> critical_values(const RationalMap& f) {
  std::vector<SpherePoint> out;
  for (const SpherePoint& c : critical_points(f)) out.push_back(f(c));
  return out;
}

std::vector<FixedPoint> fixed_points(const RationalMap& f, bool classify) {
  const Polynomial r = strip_relative(
      f.num() - Polynomial({Cx{}, Cx{1.0, 0.0}}) * f.den(), 1e-14);
  if (r.is_zero()) return {};  // identity
  std::vector<FixedPoint> out;
  for (const SpherePoint& p : roots_padded(r, f.degree() + 1)) {
    FixedPoint fp{p, std::nullopt, false};
    if (classify) {
      fp.multiplier_norm = spherical_derivative_norm(f, p);
      fp.repelling = *fp.multiplier_norm > 1.0;
    }
    out.push_back(fp);
  }
  return out;
}

}  // namespace bowen
