#pragma once

// Escape-time classification into K+ / K-, Green functions G+ / G-, and
// probe-based status of boxes in R^4 = C^2.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "henon_dim/henon_map.hpp"

namespace henon {

enum class Direction { Forward, Backward };

inline const char* to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

enum class EscapeStatus { Escaped, Bounded };

struct EscapeResult {
  EscapeStatus status = EscapeStatus::Bounded;
  int steps = 0;  // escape step, or the horizon when bounded
  PointC2 last_point{};

  bool escaped() const { return status == EscapeStatus::Escaped; }
};

inline constexpr int kDefaultHorizon = 200;

/// Forward escape sector {|w| > R, |w| >= |z|}.
inline bool in_forward_sector(const PointC2& p, double radius) {
  const double aw = std::abs(p.w);
  return aw > radius && aw >= std::abs(p.z);
}

/// Backward escape sector {|z| > R, |z| >= |w|}.
inline bool in_backward_sector(const PointC2& p, double radius) {
  const double az = std::abs(p.z);
  return az > radius && az >= std::abs(p.w);
}

inline bool in_escape_sector(const PointC2& p, double radius, Direction d) {
  return d == Direction::Forward ? in_forward_sector(p, radius) : in_backward_sector(p, radius);
}

/// First step n <= n_max at which the orbit sits in the escape sector of the
/// given direction. A magnitude-cap overflow counts as escape at that step.
inline EscapeResult classify(const HenonMap& g, const PointC2& p, Direction d, int n_max = kDefaultHorizon) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  detail::require_finite(p);
  const double radius = g.escape_radius();
  PointC2 q = p;
  for (int n = 0; n <= n_max; ++n) {
    if (in_escape_sector(q, radius, d)) return {EscapeStatus::Escaped, n, q};
    if (n == n_max) break;
    try {
      q = d == Direction::Forward ? eval(g, q, {}, n + 1) : eval_inverse(g, q, {}, n + 1);
    } catch (const RangeError&) {
      return {EscapeStatus::Escaped, n + 1, q};
    }
  }
  return {EscapeStatus::Bounded, n_max, q};
}

inline EscapeResult classify_forward(const HenonMap& g, const PointC2& p, int n_max = kDefaultHorizon) {
  return classify(g, p, Direction::Forward, n_max);
}

inline EscapeResult classify_backward(const HenonMap& g, const PointC2& p, int n_max = kDefaultHorizon) {
  return classify(g, p, Direction::Backward, n_max);
}

// ---------------------------------------------------------------------------
// Green functions

struct GreenValue {
  double value = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

inline constexpr double kDefaultGreenTolerance = 1e-9;

namespace detail {

/// Complex number stored as (log modulus, argument); zero is -inf. Lets the
/// Green iteration continue far past the range of double.
struct LogPolar {
  double logmod = -std::numeric_limits<double>::infinity();
  double arg = 0.0;

  static LogPolar from(cplx c) {
    if (c == cplx{0.0}) return {};
    return {std::log(std::abs(c)), std::arg(c)};
  }
  bool is_zero() const { return logmod == -std::numeric_limits<double>::infinity(); }
};

/// Sum of terms given in log-polar form, factoring out the largest modulus.
inline LogPolar log_polar_sum(const std::vector<LogPolar>& terms) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) top = std::max(top, t.logmod);
  if (top == -std::numeric_limits<double>::infinity()) return {};
  cplx s{0.0};
  for (const auto& t : terms)
    if (!t.is_zero()) s += std::polar(std::exp(t.logmod - top), t.arg);
  if (s == cplx{0.0}) return {};
  return {top + std::log(std::abs(s)), std::arg(s)};
}

inline void append_poly_terms(const ComplexPolynomial& poly, const LogPolar& x, std::vector<LogPolar>& terms) {
  const auto c = poly.coefficients();
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] == cplx{0.0}) continue;
    if (k == 0) {
      terms.push_back(LogPolar::from(c[0]));
    } else if (!x.is_zero()) {
      const double kk = static_cast<double>(k);
      terms.push_back({std::log(std::abs(c[k])) + kk * x.logmod, std::arg(c[k]) + kk * x.arg});
    }
  }
}

struct LogPolarPoint {
  LogPolar z, w;
};

inline LogPolarPoint log_polar_factor(const HenonFactor& f, const LogPolarPoint& p) {
  std::vector<LogPolar> terms;
  append_poly_terms(f.poly, p.w, terms);
  if (!p.z.is_zero()) terms.push_back({std::log(std::abs(f.twist)) + p.z.logmod, std::arg(f.twist) + p.z.arg});
  return {p.w, log_polar_sum(terms)};
}

inline LogPolarPoint log_polar_factor_inverse(const HenonFactor& f, const LogPolarPoint& p) {
  // z' = (w - P(z)) / a, w' = z
  std::vector<LogPolar> terms;
  append_poly_terms(f.poly, p.z, terms);
  for (auto& t : terms) t.arg += std::numbers::pi;
  if (!p.w.is_zero()) terms.push_back(p.w);
  LogPolar s = log_polar_sum(terms);
  if (!s.is_zero()) {
    s.logmod -= std::log(std::abs(f.twist));
    s.arg -= std::arg(f.twist);
  }
  return {s, p.z};
}

}  // namespace detail

/// G^{+-}(p) = lim d^{-n} log+ |g^{+-n}(p)| with the max-modulus norm. Iterates
/// until the orbit escapes, then until successive partial values differ by
/// less than tol. Bounded at the horizon gives exactly 0, not converged.
inline GreenValue green(const HenonMap& g, const PointC2& p, Direction sign, double tol = kDefaultGreenTolerance,
                        int n_max = kDefaultHorizon) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  detail::require_finite(p);
  const double d = static_cast<double>(g.degree());
  detail::LogPolarPoint q{detail::LogPolar::from(p.z), detail::LogPolar::from(p.w)};

  auto step = [&](detail::LogPolarPoint y) {
    if (sign == Direction::Forward)
      for (int i = g.factor_count(); i-- > 0;) y = detail::log_polar_factor(g.factor(i), y);
    else
      for (int i = 0; i < g.factor_count(); ++i) y = detail::log_polar_factor_inverse(g.factor(i), y);
    return y;
  };
  auto partial = [&](const detail::LogPolarPoint& y, int k) {
    const double lm = std::max({0.0, y.z.logmod, y.w.logmod});
    return lm / std::pow(d, k);
  };

  // Pre-escape phase in ordinary arithmetic, identical to classify().
  const double radius = g.escape_radius();
  PointC2 x = p;
  int n = 0;
  for (;; ++n) {
    if (in_escape_sector(x, radius, sign)) {
      q = {detail::LogPolar::from(x.z), detail::LogPolar::from(x.w)};
      break;
    }
    if (n == n_max) return {0.0, n, false};
    try {
      x = sign == Direction::Forward ? eval(g, x, {}, n + 1) : eval_inverse(g, x, {}, n + 1);
    } catch (const RangeError&) {
      q = step({detail::LogPolar::from(x.z), detail::LogPolar::from(x.w)});
      ++n;
      break;
    }
  }
  double prev = partial(q, n);
  const int limit = n + 400;
  while (n < limit) {
    q = step(q);
    ++n;
    const double cur = partial(q, n);
    if (!std::isfinite(cur)) return {prev, n, false};
    if (std::abs(cur - prev) < tol) return {cur, n, true};
    prev = cur;
  }
  return {prev, n, false};
}

// ---------------------------------------------------------------------------
// Boxes in R^4 with coordinates (Re z, Im z, Re w, Im w)

struct BoxR4 {
  std::array<double, 4> center{};
  double half_width = 0.0;

  PointC2 center_point() const { return {{center[0], center[1]}, {center[2], center[3]}}; }
  PointC2 point_at(const std::array<double, 4>& unit) const {
    // unit coordinates in [-1, 1]^4
    return {{center[0] + half_width * unit[0], center[1] + half_width * unit[1]},
            {center[2] + half_width * unit[2], center[3] + half_width * unit[3]}};
  }
  bool contains(const PointC2& p, double slack = 0.0) const {
    const std::array<double, 4> x{p.z.real(), p.z.imag(), p.w.real(), p.w.imag()};
    for (int i = 0; i < 4; ++i)
      if (std::abs(x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)]) > half_width + slack)
        return false;
    return true;
  }
};

inline std::array<double, 4> to_real4(const PointC2& p) { return {p.z.real(), p.z.imag(), p.w.real(), p.w.imag()}; }
inline PointC2 from_real4(const std::array<double, 4>& x) { return {{x[0], x[1]}, {x[2], x[3]}}; }

/// Smallest modulus of a complex coordinate over the square [x +- h] x [y +- h].
inline double min_modulus_over_square(double x, double y, double h) {
  const double dx = std::max(0.0, std::abs(x) - h);
  const double dy = std::max(0.0, std::abs(y) - h);
  return std::hypot(dx, dy);
}

inline bool meets_bidisk(const BoxR4& b, double radius) {
  return min_modulus_over_square(b.center[0], b.center[1], b.half_width) <= radius &&
         min_modulus_over_square(b.center[2], b.center[3], b.half_width) <= radius;
}

inline double radical_inverse(unsigned long i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Nested probe set: the 16 corners, then the center, then a Halton
/// sequence. The first k probes of a larger set equal the k-probe set.
inline std::vector<PointC2> box_probes(const BoxR4& b, int count) {
  std::vector<PointC2> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < 16 && static_cast<int>(out.size()) < count; ++c) {
    std::array<double, 4> u{};
    for (int i = 0; i < 4; ++i) u[static_cast<std::size_t>(i)] = (c >> i) & 1 ? 1.0 : -1.0;
    out.push_back(b.point_at(u));
  }
  if (static_cast<int>(out.size()) < count) out.push_back(b.center_point());
  constexpr unsigned bases[4] = {2, 3, 5, 7};
  for (unsigned long k = 1; static_cast<int>(out.size()) < count; ++k) {
    std::array<double, 4> u{};
    for (int i = 0; i < 4; ++i) u[static_cast<std::size_t>(i)] = 2.0 * radical_inverse(k, bases[i]) - 1.0;
    out.push_back(b.point_at(u));
  }
  return out;
}

enum class ProbeVerdict { AllEscape, AllBounded, Mixed };

inline const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::AllEscape: return "all_escape";
    case ProbeVerdict::AllBounded: return "all_bounded";
    case ProbeVerdict::Mixed: return "mixed";
  }
  return "?";
}

struct BoxStatus {
  ProbeVerdict forward = ProbeVerdict::AllEscape;
  ProbeVerdict backward = ProbeVerdict::AllEscape;

  ProbeVerdict in(Direction d) const { return d == Direction::Forward ? forward : backward; }
};

inline ProbeVerdict probe_verdict(const HenonMap& g, const std::vector<PointC2>& probes, Direction d, int n_max) {
  bool any_escape = false, any_bounded = false;
  for (const auto& p : probes) {
    (classify(g, p, d, n_max).escaped() ? any_escape : any_bounded) = true;
    if (any_escape && any_bounded) return ProbeVerdict::Mixed;
  }
  return any_bounded ? ProbeVerdict::AllBounded : ProbeVerdict::AllEscape;
}

/// Mixed in a direction: the probes contain both escaping and bounded
/// orbits, i.e. the box meets the numerical boundary of K+ or K-.
inline BoxStatus box_status(const HenonMap& g, const BoxR4& box, int n_max = kDefaultHorizon, int probes = 16) {
  if (probes < 16) throw std::invalid_argument("box_status needs at least 16 probes");
  const auto pts = box_probes(box, probes);
  return {probe_verdict(g, pts, Direction::Forward, n_max), probe_verdict(g, pts, Direction::Backward, n_max)};
}

}  // namespace henon
