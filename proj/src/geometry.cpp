#include "bowen/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "bowen/errors.hpp"
#include "bowen/parallel.hpp"

namespace bowen {

namespace {

// Points closer than this (relative to the region scale) to the boundary
// are treated as boundary points, so rounding cannot flip membership.
constexpr double kBoundaryTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cross(Cx a, Cx b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Signed distances from z to the three edges, positive inside.
std::array<double, 3> edge_distances(const Triangle& t, Cx z) {
  const double orient = cross(t.p2 - t.p1, t.p3 - t.p1) > 0 ? 1.0 : -1.0;
  const Cx v[3] = {t.p1, t.p2, t.p3};
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const Cx a = v[k], b = v[(k + 1) % 3];
    out[k] = orient * cross(b - a, z - a) / std::abs(b - a);
  }
  return out;
}

double region_scale(const Region::Shape& s) {
  return std::visit(Overloaded{
                        [](const Disc& d) { return std::abs(d.center) + d.r; },
                        [](const Annulus& a) { return std::abs(a.center) + a.r2; },
                        [](const ComplementDisc& c) { return std::abs(c.center) + c.r; },
                        [](const Triangle& t) {
                          return std::max({std::abs(t.p1), std::abs(t.p2), std::abs(t.p3)});
                        },
                    },
                    s);
}

// Signed depth inside the open region (positive inside); infinity handled
// by the callers.
double depth_inside(const Region::Shape& s, Cx z) {
  return std::visit(Overloaded{
                        [&](const Disc& d) { return d.r - std::abs(z - d.center); },
                        [&](const Annulus& a) {
                          const double m = std::abs(z - a.center);
                          return std::min(m - a.r1, a.r2 - m);
                        },
                        [&](const ComplementDisc& c) { return std::abs(z - c.center) - c.r; },
                        [&](const Triangle& t) {
                          const auto d = edge_distances(t, z);
                          return std::min({d[0], d[1], d[2]});
                        },
                    },
                    s);
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string describe(const OscViolation& v) {
  if (v.kind == OscViolationKind::NotForwardInvariant) {
    return "f_" + std::to_string(v.j + 1) + "(x) lies in U but x does not";
  }
  return "f_" + std::to_string(v.i + 1) + "(x) and f_" + std::to_string(v.j + 1) +
         "(x) both lie in U";
}

const char* variant_name(OscVariant v) {
  switch (v) {
    case OscVariant::Separating:
      return "separating";
    case OscVariant::StronglySeparating:
      return "strongly_separating";
    default:
      return "plain";
  }
}

}  // namespace

Region::Region(Shape shape) : shape_(std::move(shape)) {
  std::visit(Overloaded{
                 [](const Disc& d) {
                   if (!(d.r > 0)) throw std::invalid_argument("disc radius must be positive");
                 },
                 [](const Annulus& a) {
                   if (!(a.r1 > 0 && a.r1 < a.r2))
                     throw std::invalid_argument("annulus needs 0 < r1 < r2");
                 },
                 [](const ComplementDisc& c) {
                   if (!(c.r > 0)) throw std::invalid_argument("disc radius must be positive");
                 },
                 [](const Triangle& t) {
                   const double area = std::abs(cross(t.p2 - t.p1, t.p3 - t.p1));
                   const double scale = std::norm(t.p2 - t.p1) + std::norm(t.p3 - t.p1);
                   if (!(area > 1e-12 * scale))
                     throw std::invalid_argument("triangle vertices are collinear");
                 },
             },
             shape_);
}

bool Region::contains(const SpherePoint& z) const {
  if (z.is_infinity()) return std::holds_alternative<ComplementDisc>(shape_);
  return depth_inside(shape_, z.value()) > kBoundaryTolerance * (1.0 + region_scale(shape_));
}

bool Region::contains_fattened(const SpherePoint& z, double eps) const {
  if (z.is_infinity()) {
    if (std::holds_alternative<ComplementDisc>(shape_)) return true;
    return false;
  }
  // Local conversion of a chordal radius into a Euclidean one.
  const double euclid = 0.5 * eps * (1.0 + std::norm(z.value()));
  return depth_inside(shape_, z.value()) >= -euclid;
}

Rect Region::bounding_box() const {
  return std::visit(Overloaded{
                        [](const Disc& d) {
                          return Rect{d.center.real() - d.r, d.center.real() + d.r,
                                      d.center.imag() - d.r, d.center.imag() + d.r};
                        },
                        [](const Annulus& a) {
                          return Rect{a.center.real() - a.r2, a.center.real() + a.r2,
                                      a.center.imag() - a.r2, a.center.imag() + a.r2};
                        },
                        [](const ComplementDisc& c) {
                          return Rect{c.center.real() - c.r, c.center.real() + c.r,
                                      c.center.imag() - c.r, c.center.imag() + c.r};
                        },
                        [](const Triangle& t) {
                          return Rect{std::min({t.p1.real(), t.p2.real(), t.p3.real()}),
                                      std::max({t.p1.real(), t.p2.real(), t.p3.real()}),
                                      std::min({t.p1.imag(), t.p2.imag(), t.p3.imag()}),
                                      std::max({t.p1.imag(), t.p2.imag(), t.p3.imag()})};
                        },
                    },
                    shape_);
}

std::optional<OscViolation> osc_test_point(const MultiMap& mm, const Region& u,
                                           const SpherePoint& x, OscVariant variant,
                                           double epsilon) {
  const bool x_inside = u.contains(x);
  const std::size_t s = mm.size();
  std::vector<char> open_hit(s), closed_hit(s);
  for (std::size_t j = 0; j < s; ++j) {
    const SpherePoint y = mm[j](x);
    open_hit[j] = u.contains(y);
    closed_hit[j] = variant == OscVariant::Plain ? open_hit[j] : u.contains_fattened(y, epsilon);
  }
  const auto& invariance_hit = variant == OscVariant::StronglySeparating ? closed_hit : open_hit;
  for (std::size_t j = 0; j < s; ++j) {
    if (invariance_hit[j] && !x_inside) {
      return OscViolation{OscViolationKind::NotForwardInvariant, j, j};
    }
  }
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 1; j < s; ++j)
      if (closed_hit[i] && closed_hit[j]) return OscViolation{OscViolationKind::Overlap, i, j};
  return std::nullopt;
}

namespace {

// n points on each boundary component; at 2n the samples include those at n.
std::vector<SpherePoint> boundary_samples(const Region& u, int n) {
  std::vector<SpherePoint> out;
  auto circle = [&](Cx c, double r) {
    for (int k = 0; k < n; ++k) out.emplace_back(c + std::polar(r, 2.0 * std::numbers::pi * k / n));
  };
  std::visit(
      [&](const auto& sh) {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, Disc> || std::is_same_v<T, ComplementDisc>) {
          circle(sh.center, sh.r);
        } else if constexpr (std::is_same_v<T, Annulus>) {
          circle(sh.center, sh.r1);
          circle(sh.center, sh.r2);
        } else {
          const Cx v[3] = {sh.p1, sh.p2, sh.p3};
          for (int e = 0; e < 3; ++e) {
            for (int k = 0; k < n; ++k) {
              out.emplace_back(v[e] + (v[(e + 1) % 3] - v[e]) * (static_cast<double>(k) / n));
            }
          }
        }
      },
      u.shape());
  return out;
}

}  // namespace

VerificationReport osc_check(const MultiMap& mm, const Region& u, const OscOptions& opts) {
  if (opts.grid_n < 64) throw std::invalid_argument("osc_check needs grid_n >= 64");
  if (!(opts.enlarge >= 1.0)) throw std::invalid_argument("enlarge factor must be >= 1");

  VerificationReport report;
  report.parameters = {{"grid_n", std::to_string(opts.grid_n)},
                       {"variant", variant_name(opts.variant)},
                       {"epsilon", fmt(opts.epsilon)},
                       {"enlarge", fmt(opts.enlarge)}};

  const Rect box = u.bounding_box();
  const double cx = 0.5 * (box.xmin + box.xmax), cy = 0.5 * (box.ymin + box.ymax);
  const double hx = 0.5 * (box.xmax - box.xmin) * opts.enlarge;
  const double hy = 0.5 * (box.ymax - box.ymin) * opts.enlarge;
  const Rect grid{cx - hx, cx + hx, cy - hy, cy + hy};
  const std::size_t side = static_cast<std::size_t>(opts.grid_n) + 1;
  const double step_x = (grid.xmax - grid.xmin) / opts.grid_n;
  const double step_y = (grid.ymax - grid.ymin) / opts.grid_n;

  // Samples in the chart at infinity cover |z| beyond the grid box.
  const bool chart_at_infinity = std::holds_alternative<ComplementDisc>(u.shape());
  const double far = std::max({std::abs(grid.xmin), std::abs(grid.xmax), std::abs(grid.ymin),
                               std::abs(grid.ymax)});
  const double rho = 1.0 / far;
  const double step_w = 2.0 * rho / opts.grid_n;

  auto node = [&](std::size_t k) -> std::optional<SpherePoint> {
    if (k < side * side) {
      const std::size_t ix = k / side, iy = k % side;
      return SpherePoint(Cx(grid.xmin + static_cast<double>(ix) * step_x,
                            grid.ymin + static_cast<double>(iy) * step_y));
    }
    k -= side * side;
    const std::size_t ix = k / side, iy = k % side;
    const Cx w(-rho + static_cast<double>(ix) * step_w, -rho + static_cast<double>(iy) * step_w);
    if (w == Cx{}) return SpherePoint::infinity();
    const Cx z = 1.0 / w;
    if (z.real() >= grid.xmin && z.real() <= grid.xmax && z.imag() >= grid.ymin &&
        z.imag() <= grid.ymax) {
      return std::nullopt;  // already covered by the planar grid
    }
    return SpherePoint(z);
  };

  const std::size_t grid_nodes = side * side * (chart_at_infinity ? 2 : 1);

  // Closure variants also test the preimages of boundary samples of U. They
  // lie on the boundaries of the f_j^{-1}(U), where closures touch, and grid
  // nodes only hit those points by luck. The plain variant tests open sets,
  // so exact boundary points say nothing there.
  std::vector<SpherePoint> extra;
  if (opts.variant != OscVariant::Plain) {
    for (const SpherePoint& b : boundary_samples(u, opts.grid_n)) {
      for (const auto& pre : skew_preimages(mm, b)) extra.push_back(pre.point);
    }
  }
  auto candidate = [&](std::size_t k) -> std::optional<SpherePoint> {
    if (k < grid_nodes) return node(k);
    return extra[k - grid_nodes];
  };

  const std::size_t total = grid_nodes + extra.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first_hit((total + kParallelChunk - 1) / kParallelChunk, kNone);
  std::vector<std::size_t> hits(first_hit.size(), 0);
  parallel_for(total, [&](std::size_t begin, std::size_t end) {
    const std::size_t chunk = begin / kParallelChunk;
    for (std::size_t k = begin; k < end; ++k) {
      const auto x = candidate(k);
      if (!x) continue;
      if (osc_test_point(mm, u, *x, opts.variant, opts.epsilon)) {
        if (first_hit[chunk] == kNone) first_hit[chunk] = k;
        ++hits[chunk];
      }
    }
  });

  std::size_t witness = kNone, count = 0;
  for (std::size_t c = 0; c < first_hit.size(); ++c) {
    if (witness == kNone) witness = first_hit[c];
    count += hits[c];
  }
  report.parameters.emplace_back("violations", std::to_string(count));
  report.margin = std::min(step_x, step_y);
  if (witness == kNone) {
    report.verdict = Verdict::Pass;
    return report;
  }
  report.verdict = Verdict::Fail;
  const SpherePoint x = *candidate(witness);
  const auto v = *osc_test_point(mm, u, x, opts.variant, opts.epsilon);
  std::string where = x.is_infinity()
                          ? std::string("x = inf")
                          : "x = (" + fmt(x.value().real()) + ", " + fmt(x.value().imag()) + ")";
  if (witness >= grid_nodes) where += " (preimage of a boundary sample)";
  report.witnesses.push_back({x, describe(v) + "; " + where});
  return report;
}

BoxCountResult box_dimension(const std::vector<Cx>& points, int scale_count,
                             std::optional<Rect> viewport) {
  if (scale_count < 2) throw std::invalid_argument("need at least two scales");
  Rect view;
  if (viewport) {
    view = *viewport;
  } else {
    view = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (Cx z : points) {
      view.xmin = std::min(view.xmin, z.real());
      view.xmax = std::max(view.xmax, z.real());
      view.ymin = std::min(view.ymin, z.imag());
      view.ymax = std::max(view.ymax, z.imag());
    }
  }
  std::vector<Cx> inside;
  for (Cx z : points) {
    if (z.real() >= view.xmin && z.real() <= view.xmax && z.imag() >= view.ymin &&
        z.imag() <= view.ymax) {
      inside.push_back(z);
    }
  }
  const double side = std::max(view.xmax - view.xmin, view.ymax - view.ymin);
  if (inside.size() < kMinBoxPoints || !(side > 0.0)) {
    throw InsufficientPoints("box counting needs at least 10000 points in the viewport, got " +
                             std::to_string(inside.size()));
  }

  BoxCountResult out;
  std::vector<std::uint64_t> keys(inside.size());
  double eps = side / 4.0;
  for (int k = 0; k < scale_count; ++k, eps *= 0.5) {
    for (std::size_t i = 0; i < inside.size(); ++i) {
      const auto bx = static_cast<std::uint64_t>((inside[i].real() - view.xmin) / eps);
      const auto by = static_cast<std::uint64_t>((inside[i].imag() - view.ymin) / eps);
      keys[i] = (bx << 32) | by;
    }
    std::sort(keys.begin(), keys.end());
    const auto distinct = static_cast<std::size_t>(
        std::unique(keys.begin(), keys.end()) - keys.begin());
    out.scales.push_back(eps);
    out.counts.push_back(distinct);
  }

  const double n = static_cast<double>(scale_count);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int k = 0; k < scale_count; ++k) {
    const double x = std::log(1.0 / out.scales[k]);
    const double y = std::log(static_cast<double>(out.counts[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  const double slope = cov / vx;
  out.slope = std::clamp(slope, 0.0, 2.0);
  out.r_squared = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
  return out;
}

BoxCountResult box_dimension(const PointCloud& cloud, int scale_count,
                             std::optional<Rect> viewport) {
  std::vector<Cx> pts;
  pts.reserve(cloud.points.size());
  for (const auto& e : cloud.points) {
    if (e.point.is_finite()) pts.push_back(e.point.value());
  }
  return box_dimension(pts, scale_count, viewport);
}

}  // namespace bowen
