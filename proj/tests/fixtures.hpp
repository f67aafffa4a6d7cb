#pragma once

#include <cmath>
#include <vector>

#include "bowen/semigroup.hpp"

namespace fixtures {

using bowen::Cx;

inline bowen::RationalMap power(int d, Cx c = 1.0) {
  return bowen::RationalMap::polynomial(bowen::Polynomial::monomial(c, d));
}

inline bowen::MultiMap powers(std::vector<int> degrees) {
  std::vector<bowen::RationalMap> g;
  for (int d : degrees) g.push_back(power(d));
  return bowen::MultiMap(std::move(g));
}

// Vertices of an equilateral triangle of side 1 centred at the origin.
inline std::vector<Cx> gasket_vertices() {
  const double r = 1.0 / std::sqrt(3.0);
  std::vector<Cx> p;
  for (int k = 0; k < 3; ++k) p.push_back(std::polar(r, M_PI / 2 + 2 * M_PI * k / 3));
  return p;
}

// g_j(z) = 2(z - p_j) + p_j; the gasket is the Julia set.
inline bowen::MultiMap gasket() {
  std::vector<bowen::RationalMap> g;
  for (Cx p : gasket_vertices()) {
    g.push_back(bowen::RationalMap::polynomial(bowen::Polynomial({-p, Cx(2.0)})));
  }
  return bowen::MultiMap(std::move(g));
}

}  // namespace fixtures
