#include "bowen/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bowen/errors.hpp"

namespace bowen {

namespace {

// Kahan-compensated sum in the given (deterministic) order.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0, carry_ = 0.0;
};

double exponent(const TreeNode& node, double t) {
  return t == 0.0 ? node.log_weight : node.log_weight - t * node.log_deriv;
}

void require_regular(const TreeLevel& level, int n, double t) {
  if (t > 0.0 && level.critical) {
    throw CriticalPreimage("level " + std::to_string(n) +
                           " of the preimage tree passes within 1e-12 of a critical point; "
                           "choose another basepoint");
  }
}

double spread_of_last_three(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  const auto first = r.end() - std::min<std::ptrdiff_t>(3, static_cast<std::ptrdiff_t>(r.size()));
  const auto [lo, hi] = std::minmax_element(first, r.end());
  return *hi - *lo;
}

}  // namespace

TransferSums::TransferSums(const MultiMap& mm, const SpherePoint& basepoint, std::size_t cap,
                           std::uint64_t rng_seed)
    : tree_(mm, basepoint, cap, rng_seed) {}

double TransferSums::log_level_sum(int n, double t) {
  if (n < 0) throw std::invalid_argument("level must be >= 0");
  tree_.extend_to(n);
  const TreeLevel& level = tree_.level(n);
  require_regular(level, n, t);
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& node : level.nodes) peak = std::max(peak, exponent(node, t));
  if (!std::isfinite(peak)) return peak;
  KahanSum sum;
  for (const auto& node : level.nodes) sum.add(std::exp(exponent(node, t) - peak));
  return peak + std::log(sum.value());
}

double TransferSums::log_level_sum_slope(int n, double t) {
  tree_.extend_to(n);
  const TreeLevel& level = tree_.level(n);
  require_regular(level, n, t);
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& node : level.nodes) peak = std::max(peak, exponent(node, t));
  KahanSum mass, moment;
  for (const auto& node : level.nodes) {
    const double w = std::exp(exponent(node, t) - peak);
    mass.add(w);
    if (w > 0.0) moment.add(w * node.log_deriv);
  }
  return -moment.value() / mass.value();
}

PressureEstimate TransferSums::pressure(double t, int max_depth, double early_stop) {
  if (max_depth < 2) throw std::invalid_argument("pressure needs depth >= 2");
  PressureEstimate est;
  est.t = t;
  est.basepoint = basepoint();
  double prev = log_level_sum(1, t);
  for (int n = 2; n <= max_depth; ++n) {
    const double cur = log_level_sum(n, t);
    est.ratio_history.push_back(cur - prev);
    prev = cur;
    est.depth = n;
    est.residual = spread_of_last_three(est.ratio_history);
    if (early_stop > 0.0 && est.ratio_history.size() >= 3 && est.residual <= early_stop) break;
  }
  est.value = est.ratio_history.back();
  return est;
}

double TransferSums::pressure_slope(double t, int depth) {
  return log_level_sum_slope(depth, t) - log_level_sum_slope(depth - 1, t);
}

double transfer_level_sum(const MultiMap& mm, double t, const SpherePoint& z, int n,
                          std::size_t cap, std::uint64_t rng_seed) {
  if (n < 1) throw std::invalid_argument("level must be >= 1");
  TransferSums sums(mm, z, cap, rng_seed);
  return std::exp(sums.log_level_sum(n, t));
}

PressureEstimate pressure(const MultiMap& mm, double t, const SpherePoint& z,
                          const PressureConfig& cfg) {
  TransferSums sums(mm, z, cfg.cap, cfg.rng_seed);
  return sums.pressure(t, cfg.depth, cfg.early_stop);
}

double BowenResult::delta_error() const {
  if (pressure_slope == 0.0) return std::numeric_limits<double>::infinity();
  return residual / std::abs(pressure_slope);
}

BowenResult bowen_parameter(const MultiMap& mm, const BowenConfig& cfg) {
  const PressureConfig& pc = cfg.pressure;
  BowenResult result;
  if (!cfg.force) {
    const auto report = check_hyperbolic(mm, cfg.hyperbolic_depth, cfg.hyperbolic_margin,
                                         cfg.hyperbolic_cap, pc.rng_seed);
    result.hyperbolic = report.verdict;
    if (report.verdict == Verdict::Fail) {
      throw NotHyperbolic("hyperbolicity check failed: " + report.witnesses.front().detail);
    }
  }
  const SeedInfo seed = select_seed(mm);
  TransferSums sums(mm, seed.point, pc.cap, pc.rng_seed);
  result.basepoint = seed.point;

  // Bracketing with adaptive depth; bisection then runs at the deepest depth
  // any bracket evaluation needed, so the estimator is one continuous
  // function of t throughout.
  int depth = sums.pressure(0.0, pc.depth, pc.early_stop).depth;
  double t_hi = 1.0;
  for (;;) {
    const auto est = sums.pressure(t_hi, pc.depth, pc.early_stop);
    depth = std::max(depth, est.depth);
    const double fixed = sums.pressure(t_hi, depth, 0.0).value;
    result.history.emplace_back(t_hi, fixed);
    if (fixed < 0.0) break;
    t_hi *= 2.0;
    if (t_hi > cfg.t_max) {
      throw NoSignChange("pressure stays non-negative up to t = " + std::to_string(cfg.t_max));
    }
  }
  double t_lo = 0.0;
  if (t_hi > 1.0 && sums.pressure(t_hi / 2.0, depth, 0.0).value > 0.0) t_lo = t_hi / 2.0;

  double mid = 0.5 * (t_lo + t_hi);
  double p_mid = 0.0;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    mid = 0.5 * (t_lo + t_hi);
    p_mid = sums.pressure(mid, depth, 0.0).value;
    result.history.emplace_back(mid, p_mid);
    result.iterations = iter;
    if (p_mid > 0.0) {
      t_lo = mid;
    } else {
      t_hi = mid;
    }
    if (t_hi - t_lo <= cfg.tol_t && std::abs(p_mid) <= cfg.tol_p) break;
  }

  // Newton polish inside the bracket: at fixed depth P is smooth in t, so
  // this removes the bisection quantization from delta.
  for (int k = 0; k < 4; ++k) {
    const double slope = sums.pressure_slope(mid, depth);
    if (!(slope < 0.0)) break;
    const double next = mid - p_mid / slope;
    if (!(next >= t_lo && next <= t_hi)) break;
    const double step = next - mid;
    mid = next;
    p_mid = sums.pressure(mid, depth, 0.0).value;
    if (std::abs(step) <= 1e-14 * std::max(1.0, mid)) break;
  }

  const auto at_delta = sums.pressure(mid, depth, 0.0);
  result.delta = mid;
  result.t_lo = std::min(t_lo, mid);
  result.t_hi = std::max(t_hi, mid);
  result.pressure_at_delta = at_delta.value;
  result.residual = at_delta.residual;
  result.depth = depth;
  result.pressure_slope = sums.pressure_slope(mid, depth);
  return result;
}

double poincare_partial(const MultiMap& mm, const SpherePoint& z, double t, int n_max,
                        std::size_t cap, std::uint64_t rng_seed) {
  if (n_max < 1) throw std::invalid_argument("N must be >= 1");
  TransferSums sums(mm, z, cap, rng_seed);
  KahanSum total;
  for (int n = 1; n <= n_max; ++n) total.add(std::exp(sums.log_level_sum(n, t)));
  return total.value();
}

SpectrumDiagnostics lyapunov_and_entropy(const MultiMap& mm, double t, double h,
                                         const PressureConfig& cfg,
                                         std::optional<SpherePoint> basepoint) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  const SpherePoint z = basepoint ? *basepoint : select_seed(mm).point;
  TransferSums sums(mm, z, cfg.cap, cfg.rng_seed);
  int depth = 2;
  for (double s : {t - h, t, t + h}) {
    depth = std::max(depth, sums.pressure(s, cfg.depth, cfg.early_stop).depth);
  }
  const double p_minus = sums.pressure(t - h, depth, 0.0).value;
  const PressureEstimate mid = sums.pressure(t, depth, 0.0);
  const double p_mid = mid.value;
  const double p_plus = sums.pressure(t + h, depth, 0.0).value;
  SpectrumDiagnostics out;
  out.t = t;
  out.depth = depth;
  out.pressure = p_mid;
  out.residual = mid.residual;
  out.lyapunov = -(p_plus - p_minus) / (2.0 * h);
  out.entropy = p_mid + t * out.lyapunov;
  return out;
}

double power_map_pressure_oracle(std::span<const int> degrees, double t) {
  if (degrees.empty()) throw std::invalid_argument("no degrees given");
  bool expanding = false;
  double sum = 0.0;
  for (int d : degrees) {
    if (d < 1) throw std::invalid_argument("degrees must be >= 1");
    expanding = expanding || d >= 2;
    sum += std::pow(static_cast<double>(d), 1.0 - t);
  }
  if (!expanding) throw std::invalid_argument("at least one degree must be >= 2");
  return std::log(sum);
}

double moran_root_oracle(std::span<const double> ratios) {
  if (ratios.empty()) throw std::invalid_argument("no ratios given");
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("ratios must lie in (0, 1)");
  }
  auto excess = [&](double t) {
    double s = 0.0;
    for (double r : ratios) s += std::pow(r, t);
    return s - 1.0;
  };
  if (excess(0.0) <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (excess(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace bowen
