#pragma once

#include <cmath>
#include <map>
#include <random>

#include "henon_dim/fixtures.hpp"
#include "henon_dim/julia_sampler.hpp"
#include "henon_dim/periodic_orbits.hpp"

namespace testing_support {

using namespace henon;

inline PointC2 random_point(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  return {cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)}};
}

/// Positive root and negative root of w^2 - (1 - a) w + c = 0, i.e. the
/// fixed points (w*, w*) of P(w) = w^2 + c with twist a.
inline std::pair<double, double> quadratic_fixed(double c, double a) {
  const double b = 1.0 - a;
  const double disc = std::sqrt(b * b - 4.0 * c);
  return {(b + disc) / 2.0, (b - disc) / 2.0};
}

inline const JuliaSample& h1_j_sample() {
  static const JuliaSample s = sample(fixtures::h1(), Target::J, 6);
  return s;
}

/// Periodic searches of H1 for n = 1..8, computed once per process.
inline const PeriodicSearch& h1_periodic(int n) {
  static std::map<int, PeriodicSearch> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, find_periodic(fixtures::h1(), n, &h1_j_sample())).first;
  return it->second;
}

}  // namespace testing_support
