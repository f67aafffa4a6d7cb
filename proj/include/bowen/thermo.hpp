#pragma once

// Transfer-operator level sums, topological pressure, the Bowen parameter,
// truncated Poincare series, Lyapunov/entropy estimates and the closed-form
// oracles for power maps and similarity systems.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bowen/preimage_tree.hpp"
#include "bowen/semigroup.hpp"

namespace bowen {

struct PressureConfig {
  int depth = 10;                  // maximum tree depth n
  std::size_t cap = kDefaultCap;   // per-level node cap before subsampling
  std::uint64_t rng_seed = 0;
  double early_stop = 1e-6;        // stop once residual <= this; <= 0 disables
};

struct PressureEstimate {
  double t = 0.0;
  double value = 0.0;
  int depth = 0;
  SpherePoint basepoint;
  std::vector<double> ratio_history;  // log(S_{k+1}/S_k), k = 1..depth-1
  double residual = 0.0;              // spread of the last three ratios
};

// Level sums S_n(t, z) = (L_t^n 1)(z) over a cached backward tree, so that
// many values of t share one tree.
class TransferSums {
 public:
  TransferSums(const MultiMap& mm, const SpherePoint& basepoint, std::size_t cap,
               std::uint64_t rng_seed);

  // log S_n(t). Throws CriticalPreimage for t > 0 when the tree passes a
  // critical point.
  double log_level_sum(int n, double t);
  // d/dt log S_n(t) = minus the weighted mean of log ||(f_w)'||.
  double log_level_sum_slope(int n, double t);

  // Log-ratio estimate up to max_depth; early_stop <= 0 fixes the depth.
  PressureEstimate pressure(double t, int max_depth, double early_stop);
  // t-derivative of the fixed-depth estimator log(S_n/S_{n-1}).
  double pressure_slope(double t, int depth);

  const SpherePoint& basepoint() const { return tree_.root(); }
  const PreimageTree& tree() const { return tree_; }

 private:
  PreimageTree tree_;
};

double transfer_level_sum(const MultiMap& mm, double t, const SpherePoint& z, int n,
                          std::size_t cap = kDefaultCap, std::uint64_t rng_seed = 0);

PressureEstimate pressure(const MultiMap& mm, double t, const SpherePoint& z,
                          const PressureConfig& cfg = {});

struct BowenConfig {
  PressureConfig pressure;
  double tol_t = 1e-4;
  double tol_p = 1e-3;
  bool force = false;  // skip the hyperbolicity precheck
  int hyperbolic_depth = 10;
  double hyperbolic_margin = 0.1;
  std::size_t hyperbolic_cap = 20000;  // Julia cloud size for the precheck
  double t_max = 64.0;
  int max_iterations = 200;
};

struct BowenResult {
  double delta = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  double pressure_at_delta = 0.0;
  int iterations = 0;
  int depth = 0;
  std::vector<std::pair<double, double>> history;  // (t, P estimate)
  double residual = 0.0;        // estimator residual at delta
  double pressure_slope = 0.0;  // dP/dt of the estimator at delta
  SpherePoint basepoint;
  std::optional<Verdict> hyperbolic;  // unset when forced

  // Residual-induced uncertainty of delta.
  double delta_error() const;
};

// Zero of t -> P(t, f) by doubling bracket and bisection. Throws
// NotHyperbolic (unless forced), NoSignChange, CriticalPreimage.
BowenResult bowen_parameter(const MultiMap& mm, const BowenConfig& cfg = {});

// Sum_{n=1..N} S_n(t, z): the length-truncated Poincare series.
double poincare_partial(const MultiMap& mm, const SpherePoint& z, double t, int n_max,
                        std::size_t cap = kDefaultCap, std::uint64_t rng_seed = 0);

struct SpectrumDiagnostics {
  double lyapunov = 0.0;  // nats per iterate
  double entropy = 0.0;   // nats
  double t = 0.0;
  double pressure = 0.0;
  double residual = 0.0;  // pressure estimator residual at t
  int depth = 0;
};

// Central-difference Lyapunov exponent -dP/dt and the equilibrium entropy
// P(t) + t * lyapunov, at the cloud seed unless a basepoint is given.
SpectrumDiagnostics lyapunov_and_entropy(const MultiMap& mm, double t, double h = 1e-3,
                                         const PressureConfig& cfg = {},
                                         std::optional<SpherePoint> basepoint = std::nullopt);

// log sum_j d_j^(1-t).
double power_map_pressure_oracle(std::span<const int> degrees, double t);

// Unique t with sum_j r_j^t = 1, bisection to 1e-10.
double moran_root_oracle(std::span<const double> ratios);

}  // namespace bowen
