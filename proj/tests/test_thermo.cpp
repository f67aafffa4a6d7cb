#include <cmath>

#include "bowen/errors.hpp"
#include "bowen/thermo.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bowen;
using fixtures::power;
using fixtures::powers;

namespace {

// Frozen from an independent bisection of 2^(1-t) + 3^(1-t) = 1.
constexpr double kMixedRoot = 1.7878849110258694;

double log_sum_pow(std::initializer_list<int> d, double t) {
  double s = 0.0;
  for (int k : d) s += std::pow(k, 1.0 - t);
  return std::log(s);
}

BowenConfig quiet() {
  BowenConfig c;
  c.pressure.depth = 10;
  return c;
}

}  // namespace

TEST_CASE("closed-form oracles") {
  const int d22[] = {2, 2};
  CHECK(power_map_pressure_oracle(d22, 2.0) == doctest::Approx(0.0));
  CHECK(power_map_pressure_oracle(d22, 0.0) == doctest::Approx(std::log(4.0)));
  const int d23[] = {2, 3};
  CHECK(power_map_pressure_oracle(d23, 1.5) == doctest::Approx(log_sum_pow({2, 3}, 1.5)));
  const double half[] = {0.5, 0.5, 0.5};
  CHECK(moran_root_oracle(half) == doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-10));
  const double mixed[] = {0.5, 1.0 / 3.0};
  CHECK(1.0 + moran_root_oracle(mixed) == doctest::Approx(kMixedRoot).epsilon(1e-10));
  const double single[] = {0.5};
  CHECK(moran_root_oracle(single) == 0.0);
  CHECK_THROWS_AS(moran_root_oracle(std::span<const double>{}), std::invalid_argument);
  const int bad[] = {1};
  CHECK_THROWS_AS(power_map_pressure_oracle(bad, 1.0), std::invalid_argument);
}

TEST_CASE("level sums of z^2 are exact powers") {
  const MultiMap mm = powers({2});
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    for (int n : {1, 3, 6}) {
      CHECK(transfer_level_sum(mm, t, Cx(1), n) ==
            doctest::Approx(std::pow(2.0, n * (1.0 - t))).epsilon(1e-12));
    }
  }
}

TEST_CASE("level sums multiply on uniform systems") {
  for (int d : {2, 3, 4}) {
    const MultiMap mm = powers({d});
    const SpherePoint z = select_seed(mm).point;
    for (double t : {0.3, 1.7}) {
      const double s1 = transfer_level_sum(mm, t, z, 1);
      for (int n : {2, 5, 8}) {
        CHECK(transfer_level_sum(mm, t, z, n) == doctest::Approx(std::pow(s1, n)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("capped level sums are unbiased over seeds") {
  // total degree 4; cap 64 forces subsampling from level 4 on
  const MultiMap mm({power(2), power(2, 0.5)});
  const SpherePoint z = select_seed(mm).point;
  for (double t : {0.5, 2.0}) {
    const double truth = transfer_level_sum(mm, t, z, 6, 1u << 20, 0);
    const int seeds = 50;
    double mean = 0.0, sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const double est = transfer_level_sum(mm, t, z, 6, 64, static_cast<std::uint64_t>(s));
      mean += est / seeds;
      sq += est * est / seeds;
    }
    const double se = std::sqrt(std::max(sq - mean * mean, 0.0) / seeds);
    CHECK(se > 0.0);
    CHECK(std::abs(mean - truth) <= 2.0 * se);
  }
}

TEST_CASE("first gasket level sum at a vertex") {
  const MultiMap g = fixtures::gasket();
  const Cx z = fixtures::gasket_vertices()[0];
  for (double t : {0.0, 1.0, 1.585}) {
    double want = 0.0;
    for (Cx p : fixtures::gasket_vertices()) {
      const Cx y = (z + p) / 2.0;  // inverse of 2(y - p) + p
      const double norm = 2.0 * (1.0 + std::norm(y)) / (1.0 + std::norm(z));
      want += std::pow(norm, -t);
    }
    CHECK(transfer_level_sum(g, t, z, 1) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("pressure matches the power-map oracle") {
  for (int a : {2, 3, 4}) {
    for (int b : {2, 3, 4}) {
      const MultiMap mm = powers({a, b});
      const int deg[] = {a, b};
      for (double t : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const PressureEstimate p = pressure(mm, t, select_seed(mm).point);
        CHECK(std::abs(p.value - power_map_pressure_oracle(deg, t)) <= 1e-6);
      }
    }
  }
  const MultiMap z2 = powers({2});
  for (double t : {0.0, 1.0, 2.0}) {
    CHECK(pressure(z2, t, Cx(1)).value == doctest::Approx((1.0 - t) * std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("pressure at t = 0 is log of the total degree") {
  CHECK(pressure(fixtures::gasket(), 0.0, Cx(0.1, 0.1)).value ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
  const MultiMap mm({power(2), power(3, 0.5)});
  CHECK(pressure(mm, 0.0, select_seed(mm).point).value == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("pressure decreases in t") {
  const MultiMap systems[] = {powers({2}), powers({2, 3}), fixtures::gasket(),
                              MultiMap({power(2), power(2, 0.5)})};
  for (const MultiMap& mm : systems) {
    TransferSums sums(mm, select_seed(mm).point, kDefaultCap, 0);
    double prev = INFINITY;
    for (double t = 0.0; t <= 3.0; t += 0.25) {
      const double p = sums.pressure(t, 10, 1e-6).value;
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("pressure slope is negative on reference systems") {
  const MultiMap systems[] = {powers({2, 3}), fixtures::gasket(), MultiMap({power(2), power(2, 0.3)}),
                              MultiMap({power(3), power(3, 0.125)})};
  for (const MultiMap& mm : systems) {
    TransferSums sums(mm, select_seed(mm).point, kDefaultCap, 0);
    for (double t : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0}) CHECK(sums.pressure_slope(t, 10) < 0.0);
  }
}

TEST_CASE("central-difference slope of z^d is -log d") {
  for (int d : {2, 3, 5}) {
    const MultiMap mm = powers({d});
    TransferSums sums(mm, select_seed(mm).point, kDefaultCap, 0);
    const double h = 1e-3;
    for (double t : {0.5, 1.0, 2.0}) {
      const double slope = (sums.pressure(t + h, 8, 0.0).value - sums.pressure(t - h, 8, 0.0).value) / (2 * h);
      CHECK(std::abs(slope + std::log(d)) <= 1e-6);
      CHECK(std::abs(sums.pressure_slope(t, 8) + std::log(d)) <= 1e-9);
    }
  }
}

TEST_CASE("Bowen parameter of power maps") {
  CHECK(bowen_parameter(powers({2}), quiet()).delta == doctest::Approx(1.0).epsilon(2e-4));
  CHECK(std::abs(bowen_parameter(powers({2, 2}), quiet()).delta - 2.0) < 2e-3);
  CHECK(std::abs(bowen_parameter(powers({2, 2, 2}), quiet()).delta - (1 + std::log(3) / std::log(2))) < 2e-3);
  CHECK(std::abs(bowen_parameter(powers({3, 3}), quiet()).delta - (1 + std::log(2) / std::log(3))) < 2e-3);
  const BowenResult mixed = bowen_parameter(powers({2, 3}), quiet());
  CHECK(std::abs(mixed.delta - kMixedRoot) < 2e-3);
  CHECK(mixed.t_lo <= mixed.delta);
  CHECK(mixed.delta <= mixed.t_hi);
  CHECK(mixed.t_hi - mixed.t_lo <= 1e-4);
  CHECK(mixed.hyperbolic == Verdict::Pass);
  // equilibrium weights 2^(1-delta) and 3^(1-delta) sum to one
  const double slope = -(std::pow(2.0, 1 - kMixedRoot) * std::log(2.0) +
                         std::pow(3.0, 1 - kMixedRoot) * std::log(3.0));
  CHECK(mixed.pressure_slope == doctest::Approx(slope).epsilon(1e-3));
}

TEST_CASE("pressure vanishes at the Bowen parameter") {
  const MultiMap systems[] = {powers({2, 2}), powers({2, 3}), fixtures::gasket(),
                              MultiMap({power(2), power(2, 0.5)}), MultiMap({power(3), power(3, 0.125)})};
  for (const MultiMap& mm : systems) {
    const BowenConfig cfg = quiet();
    const BowenResult r = bowen_parameter(mm, cfg);
    REQUIRE(r.hyperbolic == Verdict::Pass);
    CHECK(std::abs(r.pressure_at_delta) <= cfg.tol_p);
    TransferSums sums(mm, r.basepoint, cfg.pressure.cap, 0);
    CHECK(std::abs(sums.pressure(r.delta, r.depth, 0.0).value) <= cfg.tol_p);
  }
}

TEST_CASE("Bowen parameter of the gasket") {
  const BowenResult r = bowen_parameter(fixtures::gasket(), quiet());
  CHECK(std::abs(r.delta - std::log(3.0) / std::log(2.0)) < 5e-3);
  CHECK(r.delta_error() < 5e-3);
}

TEST_CASE("Bowen parameter errors") {
  BowenConfig low = quiet();
  low.t_max = 0.5;
  CHECK_THROWS_AS(bowen_parameter(powers({2}), low), NoSignChange);
  const MultiMap bad({power(2), RationalMap::polynomial(Polynomial({-2, 0, 1}))});
  CHECK_THROWS_AS(bowen_parameter(bad, quiet()), NotHyperbolic);
  BowenConfig forced = quiet();
  forced.force = true;
  const BowenResult r = bowen_parameter(powers({2, 2}), forced);
  CHECK_FALSE(r.hyperbolic.has_value());
}

TEST_CASE("critical preimages are reported for t > 0") {
  const MultiMap cheb({RationalMap::polynomial(Polynomial({-2, 0, 1}))});
  CHECK(pressure(cheb, 0.0, Cx(-2)).value == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(pressure(cheb, 1.0, Cx(-2)), CriticalPreimage);
}

TEST_CASE("Poincare partial sums") {
  const MultiMap mm = powers({2});
  for (double t : {0.5, 1.0, 2.0}) {
    double want = 0.0;
    for (int n = 1; n <= 8; ++n) want += std::pow(2.0, n * (1.0 - t));
    CHECK(poincare_partial(mm, Cx(1), t, 8) == doctest::Approx(want).epsilon(1e-12));
  }
  // diverges below the Bowen parameter, converges above
  const MultiMap two = powers({2, 2});
  const double below = poincare_partial(two, Cx(1), 1.5, 10);
  const double above = poincare_partial(two, Cx(1), 2.5, 10);
  CHECK(below > 100.0);
  CHECK(above < 2.5);
}

TEST_CASE("Lyapunov exponent and entropy") {
  const SpectrumDiagnostics d = lyapunov_and_entropy(powers({2, 2}), 2.0);
  CHECK(std::abs(d.lyapunov - std::log(2.0)) < 1e-4);
  CHECK(std::abs(d.entropy - std::log(4.0)) < 1e-3);
  CHECK(std::abs(d.pressure) < 1e-6);
  const SpectrumDiagnostics g = lyapunov_and_entropy(fixtures::gasket(), 1.585);
  CHECK(g.lyapunov == doctest::Approx(std::log(2.0)).epsilon(0.05));
  CHECK_THROWS_AS(lyapunov_and_entropy(powers({2}), 1.0, 0.0), std::invalid_argument);
}
