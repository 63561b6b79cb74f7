#pragma once

// Built-in test maps. All are single quadratic factors P(w) = w^2 + c.

#include <stdexcept>
#include <string>

#include "henon_dim/henon_map.hpp"

namespace henon::fixtures {

inline HenonMap quadratic(double c, double a) { return make_map({make_factor({{c, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, {a, 0.0})}); }

/// Horseshoe, |a| below d^{-1/2}.
inline HenonMap h1() { return quadratic(-6.0, 0.3); }
/// Volume-preserving horseshoe.
inline HenonMap h2() { return quadratic(-10.0, 1.0); }
/// Small perturbation of w^2.
inline HenonMap h3() { return quadratic(0.0, 0.01); }

inline HenonMap by_name(const std::string& name) {
  if (name == "H1" || name == "h1") return h1();
  if (name == "H2" || name == "h2") return h2();
  if (name == "H3" || name == "h3") return h3();
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

}  // namespace henon::fixtures
