#pragma once

// One-parameter families f_lambda, Bowen-parameter sweeps over a lambda grid
// and the sub-mean / smoothness diagnostics run on the resulting tables.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bowen/geometry.hpp"
#include "bowen/thermo.hpp"

namespace bowen {

// num[k] and den[k] are polynomials in lambda giving the coefficient of z^k.
struct FamilyMap {
  std::vector<Polynomial> num;
  std::vector<Polynomial> den;
};

struct ParameterAnnulus {
  Cx center;
  double r1, r2;
};

using ParameterDomain = std::variant<Rect, ParameterAnnulus>;

struct FamilySpec {
  std::vector<FamilyMap> generators;
  ParameterDomain domain = Rect{-1.0, 1.0, -1.0, 1.0};
  std::vector<Cx> excluded;  // punctures
};

bool in_domain(const FamilySpec& fam, Cx lambda);

// Throws InvalidInstance outside the domain, at a puncture, or when a
// generator degenerates.
MultiMap instantiate(const FamilySpec& fam, Cx lambda);

// Row-major lambda grid: row index over Im, column index over Re.
struct GridSpec {
  double re_min = 0.0, re_max = 0.0;
  int re_steps = 1;
  double im_min = 0.0, im_max = 0.0;
  int im_steps = 1;

  Cx at(int ix, int iy) const;
  double re_step() const { return re_steps > 1 ? (re_max - re_min) / (re_steps - 1) : 0.0; }
  double im_step() const { return im_steps > 1 ? (im_max - im_min) / (im_steps - 1) : 0.0; }
};

enum class RowStatus {
  Ok,
  SeedFailure,
  NoSignChange,
  InvalidInstance,
  NotHyperbolic,
  CriticalPreimage,
  NonConvergence,
};
const char* to_string(RowStatus s);

struct SweepRow {
  Cx lambda;
  std::optional<double> delta;  // present iff status == Ok
  double pressure_residual = 0.0;
  int depth = 0;
  RowStatus status = RowStatus::Ok;
  double delta_error = 0.0;  // residual / |dP/dt|; not part of the CSV contract
};

struct SweepTable {
  GridSpec grid;
  std::vector<SweepRow> rows;  // rows[iy * re_steps + ix]

  const SweepRow& at(int ix, int iy) const {
    return rows[static_cast<std::size_t>(iy) * grid.re_steps + ix];
  }
  SweepRow& at(int ix, int iy) { return rows[static_cast<std::size_t>(iy) * grid.re_steps + ix]; }
};

SweepTable sweep_delta(const FamilySpec& fam, const GridSpec& grid, const BowenConfig& cfg);

// Median of delta_error over ok rows (0 when there are none).
double median_delta_error(const SweepTable& table);

struct SubmeanReport {
  double tol_sub = 0.0;
  std::size_t points_checked = 0;
  // Largest delta(l0) - mean(delta on ring); <= tol_sub for a pass.
  double worst_sub = 0.0;
  Cx worst_sub_at;
  // Largest mean(1/delta on ring) - 1/delta(l0); <= tol_sub for a pass.
  double worst_super = 0.0;
  Cx worst_super_at;
  std::size_t violations = 0;
  bool passed = true;
};

// Discrete circle means over the four grid points at the given radius.
// tol_sub defaults to 3x the median delta error.
SubmeanReport submean_diagnostic(const SweepTable& table, int radius_in_grid_steps,
                                 std::optional<double> tol_sub = std::nullopt);

enum class LineAxis { Row, Column };
struct SweepLine {
  LineAxis axis = LineAxis::Row;
  int index = 0;
};

struct SmoothnessReport {
  std::size_t points = 0;
  double max_residual = 0.0;
  double error_scale = 0.0;
  double ratio = 0.0;     // max_residual / error_scale
  bool flagged = false;   // max_residual > 3 * error_scale
  // min over interior points of delta*Lap(delta) - 2|grad delta|^2, with
  // the noise level of that finite difference. Diagnostic only.
  std::optional<double> min_laplacian_gap;
  double laplacian_noise = 0.0;
  Cx laplacian_at;
};

// Throws InsufficientPoints with fewer than fit_degree + 4 ok points on the line.
SmoothnessReport smoothness_diagnostic(const SweepTable& table, SweepLine line,
                                       int fit_degree = 4);

}  // namespace bowen
