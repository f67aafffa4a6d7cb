#pragma once

// Riemann-sphere arithmetic for rational maps: points, polynomials, maps,
// the chordal metric, spherical derivatives, roots and preimages.

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace bowen {

using Cx = std::complex<double>;

// Moduli above this are treated as the point at infinity.
inline constexpr double kInfinityModulus = 1e150;

class SpherePoint {
 public:
  SpherePoint() = default;

  // Non-finite or huge values collapse to infinity.
  static SpherePoint finite(Cx z);
  static SpherePoint infinity() {
    SpherePoint p;
    p.inf_ = true;
    return p;
  }

  SpherePoint(Cx z) { *this = finite(z); }  // NOLINT(implicit)
  SpherePoint(double x) : SpherePoint(Cx(x, 0.0)) {}  // NOLINT(implicit)

  bool is_infinity() const { return inf_; }
  bool is_finite() const { return !inf_; }
  // Only meaningful for finite points; infinity reports 0.
  Cx value() const { return z_; }
  double modulus() const { return inf_ ? kInfinityModulus : std::abs(z_); }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.z_ == b.z_);
  }

 private:
  bool inf_ = false;
  Cx z_{0.0, 0.0};
};

// Total order used for canonical sorting: finite points by (re, im), infinity last.
bool canonical_less(const SpherePoint& a, const SpherePoint& b);

// Chordal distance 2|a-b| / sqrt((1+|a|^2)(1+|b|^2)); lies in [0, 2].
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

// Position on the unit sphere in R^3 under inverse stereographic projection.
// Euclidean distance between images equals the chordal distance.
struct Vec3 {
  double x, y, z;
};
Vec3 to_sphere(const SpherePoint& p);

class Polynomial {
 public:
  Polynomial() = default;
  // Coefficients in ascending degree; exact trailing zeros are stripped.
  explicit Polynomial(std::vector<Cx> coeffs);
  static Polynomial monomial(Cx c, int degree);

  // Degree of the zero polynomial is reported as -1.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  std::span<const Cx> coeffs() const { return coeffs_; }
  Cx coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[k] : Cx{};
  }
  Cx leading() const { return coeffs_.empty() ? Cx{} : coeffs_.back(); }
  double max_abs_coeff() const;

  Cx operator()(Cx z) const;
  // Value and first derivative in one Horner pass.
  void eval_with_derivative(Cx z, Cx& value, Cx& deriv) const;

  Polynomial derivative() const;
  // z^d p(1/z) for the given d >= degree(); the chart at infinity.
  Polynomial reversed(int d) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Cx c, const Polynomial& p);
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.coeffs_ == b.coeffs_;
  }

 private:
  std::vector<Cx> coeffs_;
};

// All deg p roots with multiplicity (Aberth-Ehrlich). Throws NonConvergence.
std::vector<Cx> poly_roots(const Polynomial& p);

// Residual bound every returned root satisfies.
double root_residual_bound(const Polynomial& p, Cx root);

// A non-constant rational map P/Q in lowest terms.
class RationalMap {
 public:
  // Throws InvalidMap for constant maps or shared roots of P and Q.
  RationalMap(Polynomial num, Polynomial den);
  static RationalMap polynomial(Polynomial p) {
    return RationalMap(std::move(p), Polynomial({Cx{1.0, 0.0}}));
  }

  int degree() const { return degree_; }
  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_polynomial() const { return den_.degree() == 0; }

  SpherePoint operator()(const SpherePoint& z) const;

  // Homogeneous numerator/denominator in the chart w = 1/z, padded to degree().
  const Polynomial& num_at_infinity() const { return num_rev_; }
  const Polynomial& den_at_infinity() const { return den_rev_; }

  friend bool operator==(const RationalMap& a, const RationalMap& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  Polynomial num_, den_;
  Polynomial num_rev_, den_rev_;
  int degree_ = 0;
};

inline SpherePoint eval(const RationalMap& f, const SpherePoint& z) { return f(z); }

enum class Chart { Automatic, Origin, Infinity };

// |f'(z)| (1+|z|^2) / (1+|f(z)|^2), evaluated in whichever chart keeps the
// arithmetic bounded. Forcing a chart is only meant for consistency checks.
double spherical_derivative_norm(const RationalMap& f, const SpherePoint& z,
                                 Chart chart = Chart::Automatic);

// Solutions of f(w) = z with multiplicity; always deg f entries.
std::vector<SpherePoint> preimages(const RationalMap& f, const SpherePoint& z);

std::vector<SpherePoint> critical_points(const RationalMap& f);
std::vector<SpherePoint> critical_values(const RationalMap& f);

struct FixedPoint {
  SpherePoint point;
  std::optional<double> multiplier_norm;  // set when classified
  bool repelling = false;
};

// deg f + 1 fixed points with multiplicity, infinity included when fixed.
std::vector<FixedPoint> fixed_points(const RationalMap& f, bool classify = true);

}  // namespace bowen
