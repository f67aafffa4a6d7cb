#pragma once

// Open-set-condition sampling over region primitives, and box-counting
// dimension of point clouds.

#include <optional>
#include <variant>
#include <vector>

#include "bowen/semigroup.hpp"

namespace bowen {

struct Disc {
  Cx center;
  double r;
};
struct Annulus {
  Cx center;
  double r1, r2;
};
struct ComplementDisc {
  Cx center;
  double r;
};
// Open interior of the triangle.
struct Triangle {
  Cx p1, p2, p3;
};

struct Rect {
  double xmin, xmax, ymin, ymax;
};

class Region {
 public:
  using Shape = std::variant<Disc, Annulus, ComplementDisc, Triangle>;

  // Throws std::invalid_argument on non-positive radii, r1 >= r2 or
  // collinear triangle vertices.
  explicit Region(Shape shape);

  const Shape& shape() const { return shape_; }

  // Strict interior; infinity belongs only to ComplementDisc.
  bool contains(const SpherePoint& z) const;
  // Membership in the closure fattened by eps in the chordal metric.
  bool contains_fattened(const SpherePoint& z, double eps) const;
  // Bounding box of the bounded part (the removed disc for ComplementDisc).
  Rect bounding_box() const;

 private:
  Shape shape_;
};

inline bool region_contains(const Region& u, const SpherePoint& z) { return u.contains(z); }

enum class OscVariant { Plain, Separating, StronglySeparating };

struct OscOptions {
  int grid_n = 256;
  OscVariant variant = OscVariant::Plain;
  double epsilon = 1e-3;  // chordal fattening for closures
  double enlarge = 1.5;   // grid box = bounding box scaled about its center
};

enum class OscViolationKind {
  NotForwardInvariant,  // f_j(x) in U (or its closure) but x outside U
  Overlap,              // f_i(x) and f_j(x) both in U (or closure), i != j
};

struct OscViolation {
  OscViolationKind kind;
  std::size_t i = 0, j = 0;
};

// Tests one sample point; the same predicate osc_check applies on the grid.
std::optional<OscViolation> osc_test_point(const MultiMap& mm, const Region& u,
                                           const SpherePoint& x, OscVariant variant,
                                           double epsilon);

// Grid falsifier for the open set condition: (grid_n+1)^2 nodes covering the
// enlarged bounding box, plus 1/z-chart nodes for ComplementDisc. The grid
// at 2*grid_n contains every node of the grid at grid_n. The closure variants
// then test the preimages of grid_n samples per boundary component of U,
// which also nest under doubling. Fail carries the first violating point,
// grid nodes in row-major order first.
VerificationReport osc_check(const MultiMap& mm, const Region& u, const OscOptions& opts = {});

struct BoxCountResult {
  std::vector<double> scales;   // strictly decreasing
  std::vector<std::size_t> counts;
  double slope = 0.0;           // clamped to [0, 2]
  double r_squared = 0.0;
};

inline constexpr std::size_t kMinBoxPoints = 10000;

// Occupied-box counts at dyadic scales side/4, side/8, ... and the
// least-squares slope of log N against log(1/eps). Defaults to the bounding
// box of the finite points. Throws InsufficientPoints below 10^4 points.
BoxCountResult box_dimension(const std::vector<Cx>& points, int scale_count = 6,
                             std::optional<Rect> viewport = std::nullopt);
BoxCountResult box_dimension(const PointCloud& cloud, int scale_count = 6,
                             std::optional<Rect> viewport = std::nullopt);

}  // namespace bowen
