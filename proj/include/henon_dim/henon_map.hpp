#pragma once

// Compositions of generalized Henon maps g = g_1 o ... o g_m of C^2 with
// g_i(z, w) = (w, P_i(w) + a_i z).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace henon {

using cplx = std::complex<double>;

struct PointC2 {
  cplx z;
  cplx w;

  friend bool operator==(const PointC2&, const PointC2&) = default;
};

inline PointC2 operator-(const PointC2& a, const PointC2& b) { return {a.z - b.z, a.w - b.w}; }
inline PointC2 operator+(const PointC2& a, const PointC2& b) { return {a.z + b.z, a.w + b.w}; }

inline double euclidean_norm(const PointC2& p) { return std::sqrt(std::norm(p.z) + std::norm(p.w)); }
inline double max_modulus(const PointC2& p) { return std::max(std::abs(p.z), std::abs(p.w)); }
inline double distance(const PointC2& a, const PointC2& b) { return euclidean_norm(a - b); }

inline bool is_finite(cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }
inline bool is_finite(const PointC2& p) { return is_finite(p.z) && is_finite(p.w); }

/// Lexicographic order on (Re z, Im z, Re w, Im w); used wherever output order must be reproducible.
inline bool lex_less(const PointC2& a, const PointC2& b) {
  const std::array<double, 4> x{a.z.real(), a.z.imag(), a.w.real(), a.w.imag()};
  const std::array<double, 4> y{b.z.real(), b.z.imag(), b.w.real(), b.w.imag()};
  return x < y;
}

using VectorC2 = std::array<cplx, 2>;

inline double norm(const VectorC2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

inline VectorC2 normalized(const VectorC2& v) {
  const double n = norm(v);
  return {v[0] / n, v[1] / n};
}

/// Sine of the Hermitian angle between the complex lines spanned by u and v.
inline double line_angle(const VectorC2& u, const VectorC2& v) {
  const cplx inner = std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1];
  const double c = std::abs(inner) / (norm(u) * norm(v));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

/// 2x2 complex matrix, row-major.
struct Matrix2C {
  std::array<cplx, 4> e{};

  static Matrix2C identity() { return {{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}}}; }

  cplx& operator()(int r, int c) { return e[static_cast<std::size_t>(2 * r + c)]; }
  const cplx& operator()(int r, int c) const { return e[static_cast<std::size_t>(2 * r + c)]; }

  cplx det() const { return e[0] * e[3] - e[1] * e[2]; }
  cplx trace() const { return e[0] + e[3]; }
  bool finite() const {
    return std::all_of(e.begin(), e.end(), [](cplx c) { return is_finite(c); });
  }

  friend Matrix2C operator*(const Matrix2C& a, const Matrix2C& b) {
    return {{a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
             a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]}};
  }
  friend VectorC2 operator*(const Matrix2C& a, const VectorC2& v) {
    return {a.e[0] * v[0] + a.e[1] * v[1], a.e[2] * v[0] + a.e[3] * v[1]};
  }
};

/// Largest singular value. Entries are rescaled first so that products of
/// long Jacobian chains do not overflow in the Frobenius terms.
inline double spectral_norm(const Matrix2C& m) {
  double scale = 0.0;
  for (const auto& x : m.e) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  Matrix2C s = m;
  for (auto& x : s.e) x /= scale;
  double fro2 = 0.0;
  for (const auto& x : s.e) fro2 += std::norm(x);
  const double det = std::abs(s.det());
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return scale * std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

struct EigenPair {
  cplx large;  // larger modulus
  cplx small;
};

/// Eigenvalues from trace and a separately supplied determinant. The small
/// eigenvalue is det / large, so |large * small| reproduces |det| exactly
/// up to one rounding even when the matrix entries are huge.
inline EigenPair eigenvalues(cplx trace, cplx det) {
  const cplx root = std::sqrt(trace * trace - 4.0 * det);
  const cplx plus = 0.5 * (trace + root);
  const cplx minus = 0.5 * (trace - root);
  const cplx large = std::abs(plus) >= std::abs(minus) ? plus : minus;
  if (large == cplx{0.0}) return {cplx{0.0}, cplx{0.0}};
  return {large, det / large};
}

inline VectorC2 eigenvector(const Matrix2C& m, cplx lambda) {
  // (m - lambda I) v = 0; pick the better-conditioned row.
  const cplx a = m(0, 0) - lambda, b = m(0, 1);
  const cplx c = m(1, 0), d = m(1, 1) - lambda;
  VectorC2 v = std::norm(a) + std::norm(b) >= std::norm(c) + std::norm(d) ? VectorC2{b, -a} : VectorC2{d, -c};
  if (norm(v) == 0.0) v = {cplx{1.0}, cplx{0.0}};
  return normalized(v);
}

class ComplexPolynomial {
 public:
  ComplexPolynomial() = default;

  /// Coefficients in ascending power order; the leading one must be nonzero.
  explicit ComplexPolynomial(std::vector<cplx> coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.size() < 3) throw std::invalid_argument("polynomial degree must be at least 2");
    if (coeffs_.back() == cplx{0.0}) throw std::invalid_argument("leading coefficient is zero");
    for (const auto& c : coeffs_)
      if (!is_finite(c)) throw std::invalid_argument("polynomial coefficient is not finite");
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  cplx leading() const { return coeffs_.back(); }
  std::span<const cplx> coefficients() const { return coeffs_; }

  cplx operator()(cplx x) const {
    cplx r = coeffs_.back();
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) r = r * x + coeffs_[k];
    return r;
  }

  cplx derivative(cplx x) const {
    cplx r{0.0};
    for (std::size_t k = coeffs_.size() - 1; k >= 1; --k) r = r * x + static_cast<double>(k) * coeffs_[k];
    return r;
  }

  /// Coefficients of P(x + h) as a polynomial in h (Taylor coefficients at x).
  std::vector<cplx> taylor_at(cplx x) const {
    std::vector<cplx> t(coeffs_.begin(), coeffs_.end());
    const std::size_t n = t.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t k = n - 1; k-- > i;) t[k] += x * t[k + 1];
    return t;
  }

  friend bool operator==(const ComplexPolynomial&, const ComplexPolynomial&) = default;

 private:
  std::vector<cplx> coeffs_;
};

struct HenonFactor {
  ComplexPolynomial poly;
  cplx twist;
};

/// Construction failure; carries the index of the offending factor.
class MapError : public std::invalid_argument {
 public:
  MapError(int factor_index, const std::string& what)
      : std::invalid_argument("factor " + std::to_string(factor_index) + ": " + what), factor_index_(factor_index) {}
  int factor_index() const { return factor_index_; }

 private:
  int factor_index_;
};

/// Raised when an intermediate modulus exceeds the configured cap.
class RangeError : public std::range_error {
 public:
  RangeError(int factor_index, long step)
      : std::range_error("magnitude cap exceeded at factor " + std::to_string(factor_index) + ", step " +
                         std::to_string(step)),
        factor_index_(factor_index),
        step_(step) {}
  int factor_index() const { return factor_index_; }
  long step() const { return step_; }

 private:
  int factor_index_;
  long step_;
};

inline constexpr double kDefaultMagnitudeCap = 1e150;

/// Smallest r >= 1 past which |P(w)| - |a||w| >= 2|w| and |P(w)| - |w| >= 2|a||w|
/// both hold for |w| >= r. The second condition is implied by the first when
/// |a| <= 1 and certifies escape of the inverse factor otherwise.
inline double factor_escape_radius(const HenonFactor& f) {
  const auto c = f.poly.coefficients();
  const double abs_a = std::abs(f.twist);
  const double margin = std::max(2.0 + abs_a, 1.0 + 2.0 * abs_a);
  // lower(r) = |lead| r^d - sum_{k<d} |c_k| r^k - margin r has a single
  // positive root (one sign change), so it stays positive past the root.
  auto lower = [&](double r) {
    double v = std::abs(c.back());
    for (std::size_t k = c.size() - 1; k-- > 0;) v = v * r - std::abs(c[k]);
    return v - margin * r;
  };
  double hi = 1.0;
  if (lower(hi) >= 0.0) return hi;
  while (lower(hi) < 0.0) hi *= 2.0;
  double lo = hi / 2.0;
  while ((hi - lo) > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (lower(mid) >= 0.0 ? hi : lo) = mid;
  }
  return std::max(1.0, hi);
}

class HenonMap;
HenonMap make_map(std::vector<HenonFactor> factors);

class HenonMap {
 public:
  std::span<const HenonFactor> factors() const { return factors_; }
  int factor_count() const { return static_cast<int>(factors_.size()); }
  const HenonFactor& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }

  /// Dynamical degree d = product of factor degrees.
  long degree() const { return degree_; }
  /// a = prod a_i as written in the literature.
  cplx det_paper() const { return det_paper_; }
  /// Actual constant Jacobian determinant, (-1)^m prod a_i.
  cplx det_signed() const { return det_signed_; }
  double abs_det() const { return std::abs(det_paper_); }
  double log_abs_det() const { return log_abs_det_; }
  double escape_radius() const { return escape_radius_; }
  /// Set when |a| > 1; dimension operations then work with the inverse.
  bool volume_expanding() const { return abs_det() > 1.0; }

  /// Index of the factor applied at factor-level step k of the orbit; g applies
  /// factors[m-1] first.
  int factor_at_step(long k) const {
    const long m = factor_count();
    return static_cast<int>(m - 1 - (k % m + m) % m);
  }

  friend HenonMap make_map(std::vector<HenonFactor> factors);

 private:
  HenonMap() = default;

  std::vector<HenonFactor> factors_;
  long degree_ = 1;
  cplx det_paper_{1.0};
  cplx det_signed_{1.0};
  double log_abs_det_ = 0.0;
  double escape_radius_ = 1.0;
};

inline HenonMap make_map(std::vector<HenonFactor> factors) {
  if (factors.empty()) throw std::invalid_argument("a Henon map needs at least one factor");
  HenonMap g;
  double log_abs = 0.0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    const int idx = static_cast<int>(i);
    if (f.twist == cplx{0.0}) throw MapError(idx, "twist a_i must be nonzero");
    if (!is_finite(f.twist)) throw MapError(idx, "twist a_i is not finite");
    if (f.poly.degree() < 2) throw MapError(idx, "polynomial degree must be at least 2");
    g.degree_ *= f.poly.degree();
    g.det_paper_ *= f.twist;
    g.det_signed_ *= -f.twist;
    log_abs += std::log(std::abs(f.twist));
    g.escape_radius_ = std::max(g.escape_radius_, factor_escape_radius(f));
  }
  g.log_abs_det_ = log_abs;
  g.factors_ = std::move(factors);
  return g;
}

inline HenonFactor make_factor(std::vector<cplx> coefficients, cplx twist) {
  return {ComplexPolynomial(std::move(coefficients)), twist};
}

inline double escape_radius(const HenonMap& g) { return g.escape_radius(); }

inline PointC2 apply_factor(const HenonFactor& f, const PointC2& p) { return {p.w, f.poly(p.w) + f.twist * p.z}; }

inline PointC2 apply_factor_inverse(const HenonFactor& f, const PointC2& p) {
  return {(p.w - f.poly(p.z)) / f.twist, p.z};
}

inline Matrix2C factor_jacobian(const HenonFactor& f, const PointC2& p) {
  return {{cplx{0.0}, cplx{1.0}, f.twist, f.poly.derivative(p.w)}};
}

inline Matrix2C factor_inverse_jacobian(const HenonFactor& f, const PointC2& p) {
  return {{-f.poly.derivative(p.z) / f.twist, 1.0 / f.twist, cplx{1.0}, cplx{0.0}}};
}

namespace detail {

inline void require_finite(const PointC2& p) {
  if (!is_finite(p)) throw std::invalid_argument("point has non-finite coordinates");
}

inline void check_cap(const PointC2& p, double cap, int factor_index, long step) {
  if (!is_finite(p) || std::abs(p.z) > cap || std::abs(p.w) > cap) throw RangeError(factor_index, step);
}

}  // namespace detail

struct EvalOptions {
  double magnitude_cap = kDefaultMagnitudeCap;
};

inline PointC2 eval(const HenonMap& g, const PointC2& p, const EvalOptions& opt = {}, long step = 0) {
  detail::require_finite(p);
  PointC2 q = p;
  for (int i = g.factor_count(); i-- > 0;) {
    q = apply_factor(g.factor(i), q);
    detail::check_cap(q, opt.magnitude_cap, i, step);
  }
  return q;
}

inline PointC2 eval_inverse(const HenonMap& g, const PointC2& p, const EvalOptions& opt = {}, long step = 0) {
  detail::require_finite(p);
  PointC2 q = p;
  for (int i = 0; i < g.factor_count(); ++i) {
    q = apply_factor_inverse(g.factor(i), q);
    detail::check_cap(q, opt.magnitude_cap, i, step);
  }
  return q;
}

/// Dg(p) by the chain rule over the factors.
inline Matrix2C jacobian(const HenonMap& g, const PointC2& p, const EvalOptions& opt = {}) {
  detail::require_finite(p);
  PointC2 q = p;
  Matrix2C m = Matrix2C::identity();
  for (int i = g.factor_count(); i-- > 0;) {
    m = factor_jacobian(g.factor(i), q) * m;
    q = apply_factor(g.factor(i), q);
    detail::check_cap(q, opt.magnitude_cap, i, 0);
  }
  return m;
}

/// D(g^{-1})(p).
inline Matrix2C jacobian_inverse(const HenonMap& g, const PointC2& p, const EvalOptions& opt = {}) {
  detail::require_finite(p);
  PointC2 q = p;
  Matrix2C m = Matrix2C::identity();
  for (int i = 0; i < g.factor_count(); ++i) {
    m = factor_inverse_jacobian(g.factor(i), q) * m;
    q = apply_factor_inverse(g.factor(i), q);
    detail::check_cap(q, opt.magnitude_cap, i, 0);
  }
  return m;
}

inline PointC2 iterate(const HenonMap& g, const PointC2& p, long n, const EvalOptions& opt = {}) {
  detail::require_finite(p);
  PointC2 q = p;
  if (n >= 0)
    for (long k = 0; k < n; ++k) q = eval(g, q, opt, k + 1);
  else
    for (long k = 0; k < -n; ++k) q = eval_inverse(g, q, opt, k + 1);
  return q;
}

struct IterateResult {
  PointC2 point;
  Matrix2C jacobian;
};

/// g^n(p) together with D(g^n)(p), accumulated as a left product of one-step
/// Jacobians; negative n uses the inverse.
inline IterateResult iterate_with_jacobian(const HenonMap& g, const PointC2& p, long n, const EvalOptions& opt = {}) {
  detail::require_finite(p);
  IterateResult r{p, Matrix2C::identity()};
  const bool forward = n >= 0;
  for (long k = 0; k < std::abs(n); ++k) {
    PointC2 q = r.point;
    if (forward) {
      for (int i = g.factor_count(); i-- > 0;) {
        r.jacobian = factor_jacobian(g.factor(i), q) * r.jacobian;
        q = apply_factor(g.factor(i), q);
        detail::check_cap(q, opt.magnitude_cap, i, k + 1);
      }
    } else {
      for (int i = 0; i < g.factor_count(); ++i) {
        r.jacobian = factor_inverse_jacobian(g.factor(i), q) * r.jacobian;
        q = apply_factor_inverse(g.factor(i), q);
        detail::check_cap(q, opt.magnitude_cap, i, k + 1);
      }
    }
    r.point = q;
  }
  return r;
}

inline PointC2 swap_coordinates(const PointC2& p) { return {p.w, p.z}; }

/// The map tau o g^{-1} o tau with tau(z, w) = (w, z). It is again a
/// composition of Henon factors, with P_i -> -P_i / a_i and a_i -> 1 / a_i in
/// reverse order, so |det| becomes 1 / |a|.
inline HenonMap flip_inverse(const HenonMap& g) {
  std::vector<HenonFactor> out;
  for (int i = g.factor_count(); i-- > 0;) {
    const auto& f = g.factor(i);
    std::vector<cplx> c(f.poly.coefficients().begin(), f.poly.coefficients().end());
    for (auto& x : c) x = -x / f.twist;
    out.push_back({ComplexPolynomial(std::move(c)), 1.0 / f.twist});
  }
  return make_map(std::move(out));
}

/// Rescales all twists by a common complex-modulus factor so that |det| equals
/// the requested modulus; arguments of the twists are kept.
inline HenonMap with_det_modulus(const HenonMap& g, double modulus) {
  if (!(modulus > 0.0)) throw std::invalid_argument("determinant modulus must be positive");
  const double scale = std::pow(modulus / g.abs_det(), 1.0 / g.factor_count());
  std::vector<HenonFactor> out(g.factors().begin(), g.factors().end());
  for (auto& f : out) f.twist *= scale;
  return make_map(std::move(out));
}

}  // namespace henon
