#include "bowen/family.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bowen/errors.hpp"

namespace bowen {

namespace {

Polynomial evaluate_coeffs(const std::vector<Polynomial>& coeffs, Cx lambda) {
  std::vector<Cx> c;
  c.reserve(coeffs.size());
  for (const auto& p : coeffs) c.push_back(p(lambda));
  return Polynomial(std::move(c));
}

bool ok(const SweepRow& r) { return r.status == RowStatus::Ok && r.delta.has_value(); }

}  // namespace

const char* to_string(RowStatus s) {
  switch (s) {
    case RowStatus::Ok:
      return "ok";
    case RowStatus::SeedFailure:
      return "seed-failure";
    case RowStatus::NoSignChange:
      return "no-sign-change";
    case RowStatus::InvalidInstance:
      return "invalid-instance";
    case RowStatus::NotHyperbolic:
      return "not-hyperbolic";
    case RowStatus::CriticalPreimage:
      return "critical-preimage";
    default:
      return "non-convergence";
  }
}

bool in_domain(const FamilySpec& fam, Cx lambda) {
  if (const auto* r = std::get_if<Rect>(&fam.domain)) {
    return lambda.real() >= r->xmin && lambda.real() <= r->xmax && lambda.imag() >= r->ymin &&
           lambda.imag() <= r->ymax;
  }
  const auto& a = std::get<ParameterAnnulus>(fam.domain);
  const double m = std::abs(lambda - a.center);
  return m >= a.r1 && m <= a.r2;
}

MultiMap instantiate(const FamilySpec& fam, Cx lambda) {
  if (!in_domain(fam, lambda)) throw InvalidInstance("lambda lies outside the family domain");
  for (Cx p : fam.excluded) {
    if (std::abs(lambda - p) <= 1e-12 * (1.0 + std::abs(p))) {
      throw InvalidInstance("lambda is an excluded puncture");
    }
  }
  std::vector<RationalMap> gens;
  try {
    for (const auto& g : fam.generators) {
      gens.emplace_back(evaluate_coeffs(g.num, lambda), evaluate_coeffs(g.den, lambda));
    }
    return MultiMap(std::move(gens));
  } catch (const InvalidMap& e) {
    throw InvalidInstance(std::string("degenerate instance: ") + e.what());
  } catch (const NonConvergence& e) {
    throw InvalidInstance(std::string("instance validation failed: ") + e.what());
  }
}

Cx GridSpec::at(int ix, int iy) const {
  return {re_min + ix * re_step(), im_min + iy * im_step()};
}

SweepTable sweep_delta(const FamilySpec& fam, const GridSpec& grid, const BowenConfig& cfg) {
  if (grid.re_steps < 1 || grid.im_steps < 1) throw std::invalid_argument("empty grid");
  SweepTable table;
  table.grid = grid;
  table.rows.resize(static_cast<std::size_t>(grid.re_steps) * grid.im_steps);
  for (int iy = 0; iy < grid.im_steps; ++iy) {
    for (int ix = 0; ix < grid.re_steps; ++ix) {
      SweepRow& row = table.at(ix, iy);
      row.lambda = grid.at(ix, iy);
      try {
        const MultiMap mm = instantiate(fam, row.lambda);
        const BowenResult r = bowen_parameter(mm, cfg);
        row.delta = r.delta;
        row.pressure_residual = r.residual;
        row.depth = r.depth;
        row.delta_error = r.delta_error();
        row.status = RowStatus::Ok;
      } catch (const InvalidInstance&) {
        row.status = RowStatus::InvalidInstance;
      } catch (const NoRepellingSeed&) {
        row.status = RowStatus::SeedFailure;
      } catch (const NoSignChange&) {
        row.status = RowStatus::NoSignChange;
      } catch (const NotHyperbolic&) {
        row.status = RowStatus::NotHyperbolic;
      } catch (const CriticalPreimage&) {
        row.status = RowStatus::CriticalPreimage;
      } catch (const NonConvergence&) {
        row.status = RowStatus::NonConvergence;
      }
    }
  }
  return table;
}

double median_delta_error(const SweepTable& table) {
  std::vector<double> errs;
  for (const auto& r : table.rows) {
    if (ok(r) && std::isfinite(r.delta_error)) errs.push_back(r.delta_error);
  }
  if (errs.empty()) return 0.0;
  const auto mid = errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2);
  std::nth_element(errs.begin(), mid, errs.end());
  return *mid;
}

SubmeanReport submean_diagnostic(const SweepTable& table, int radius, std::optional<double> tol) {
  if (radius < 1) throw std::invalid_argument("radius must be >= 1");
  SubmeanReport rep;
  rep.tol_sub = tol ? *tol : 3.0 * median_delta_error(table);
  rep.worst_sub = -std::numeric_limits<double>::infinity();
  rep.worst_super = -std::numeric_limits<double>::infinity();
  const int nx = table.grid.re_steps, ny = table.grid.im_steps;
  for (int iy = radius; iy + radius < ny; ++iy) {
    for (int ix = radius; ix + radius < nx; ++ix) {
      const SweepRow& c = table.at(ix, iy);
      const SweepRow* ring[4] = {&table.at(ix - radius, iy), &table.at(ix + radius, iy),
                                 &table.at(ix, iy - radius), &table.at(ix, iy + radius)};
      if (!ok(c) || !std::all_of(std::begin(ring), std::end(ring), [](auto* r) { return ok(*r); }))
        continue;
      double mean = 0.0, mean_inv = 0.0;
      for (const auto* r : ring) {
        mean += *r->delta / 4.0;
        mean_inv += 1.0 / *r->delta / 4.0;
      }
      const double sub = *c.delta - mean;
      const double super = mean_inv - 1.0 / *c.delta;
      ++rep.points_checked;
      if (sub > rep.worst_sub) {
        rep.worst_sub = sub;
        rep.worst_sub_at = c.lambda;
      }
      if (super > rep.worst_super) {
        rep.worst_super = super;
        rep.worst_super_at = c.lambda;
      }
      if (sub > rep.tol_sub || super > rep.tol_sub) ++rep.violations;
    }
  }
  if (rep.points_checked == 0) {
    rep.worst_sub = rep.worst_super = 0.0;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

SmoothnessReport smoothness_diagnostic(const SweepTable& table, SweepLine line, int fit_degree) {
  if (fit_degree < 0) throw std::invalid_argument("fit degree must be >= 0");
  const int nx = table.grid.re_steps, ny = table.grid.im_steps;
  std::vector<double> xs, ys, errs;
  const int len = line.axis == LineAxis::Row ? nx : ny;
  for (int k = 0; k < len; ++k) {
    const SweepRow& r = line.axis == LineAxis::Row ? table.at(k, line.index) : table.at(line.index, k);
    if (!ok(r)) continue;
    xs.push_back(line.axis == LineAxis::Row ? r.lambda.real() : r.lambda.imag());
    ys.push_back(*r.delta);
    if (std::isfinite(r.delta_error)) errs.push_back(r.delta_error);
  }
  if (static_cast<int>(xs.size()) < fit_degree + 4) {
    throw InsufficientPoints("smoothness fit needs at least fit_degree + 4 ok points on the line");
  }

  SmoothnessReport rep;
  rep.points = xs.size();
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double center = 0.5 * (*lo + *hi);
  const double half = *hi > *lo ? 0.5 * (*hi - *lo) : 1.0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(xs.size()), fit_degree + 1);
  Eigen::VectorXd b(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = (xs[i] - center) / half;
    double p = 1.0;
    for (int k = 0; k <= fit_degree; ++k, p *= u) a(static_cast<Eigen::Index>(i), k) = p;
    b(static_cast<Eigen::Index>(i)) = ys[i];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  rep.max_residual = (a * coef - b).cwiseAbs().maxCoeff();
  if (!errs.empty()) {
    auto mid = errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2);
    std::nth_element(errs.begin(), mid, errs.end());
    rep.error_scale = *mid;
  }
  rep.ratio = rep.error_scale > 0.0 ? rep.max_residual / rep.error_scale
                                    : (rep.max_residual > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.flagged = rep.max_residual > 3.0 * rep.error_scale + 1e-12;

  // delta * Lap(delta) - 2 |grad delta|^2 on the full grid.
  const double hx = table.grid.re_step(), hy = table.grid.im_step();
  if (hx > 0.0 && hy > 0.0) {
    const double e = median_delta_error(table);
    for (int iy = 1; iy + 1 < ny; ++iy) {
      for (int ix = 1; ix + 1 < nx; ++ix) {
        const SweepRow& c = table.at(ix, iy);
        const SweepRow& w = table.at(ix - 1, iy);
        const SweepRow& east = table.at(ix + 1, iy);
        const SweepRow& s = table.at(ix, iy - 1);
        const SweepRow& n = table.at(ix, iy + 1);
        if (!ok(c) || !ok(w) || !ok(east) || !ok(s) || !ok(n)) continue;
        const double f = *c.delta;
        const double fxx = (*east.delta - 2.0 * f + *w.delta) / (hx * hx);
        const double fyy = (*n.delta - 2.0 * f + *s.delta) / (hy * hy);
        const double fx = (*east.delta - *w.delta) / (2.0 * hx);
        const double fy = (*n.delta - *s.delta) / (2.0 * hy);
        const double gap = f * (fxx + fyy) - 2.0 * (fx * fx + fy * fy);
        if (!rep.min_laplacian_gap || gap < *rep.min_laplacian_gap) {
          rep.min_laplacian_gap = gap;
          rep.laplacian_at = c.lambda;
          const double centre = 2.0 / (hx * hx) + 2.0 / (hy * hy);
          const double sd_lap =
              e * std::sqrt(2.0 / std::pow(hx, 4) + 2.0 / std::pow(hy, 4) + centre * centre);
          const double sd_fx = e / (std::sqrt(2.0) * hx), sd_fy = e / (std::sqrt(2.0) * hy);
          rep.laplacian_noise =
              std::abs(f) * sd_lap + 4.0 * (std::abs(fx) * sd_fx + std::abs(fy) * sd_fy);
        }
      }
    }
  }
  return rep;
}

}  // namespace bowen
