#pragma once

// Saddle periodic orbits. All fixed points of g^n are found by total-degree
// homotopy continuation on the factor-level recurrence
//   u_{k+1} = P_{f(k)}(u_k) + a_{f(k)} u_{k-1},   k = 0 .. n*m - 1 (cyclic),
// which has exactly d^n solutions; damped Newton from sample seeds runs on top
// and any root it finds that the continuation missed is added and counted.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "henon_dim/classification.hpp"
#include "henon_dim/henon_map.hpp"
#include "henon_dim/julia_sampler.hpp"
#include "henon_dim/parallel.hpp"

namespace henon {

enum class OrbitKind { Saddle, Sink, Source, Neutral };

inline const char* to_string(OrbitKind k) {
  switch (k) {
    case OrbitKind::Saddle: return "saddle";
    case OrbitKind::Sink: return "sink";
    case OrbitKind::Source: return "source";
    case OrbitKind::Neutral: return "neutral";
  }
  return "?";
}

struct SaddleOrbit {
  PointC2 point;  // lexicographically smallest point of the cycle
  int period = 1;
  int primitive_period = 1;
  cplx lambda_u;  // eigenvalue of Dg^n of larger modulus
  cplx lambda_s;
  double log_abs_lambda_u = 0.0;
  double log_abs_lambda_s = 0.0;  // n log|a| - log|lambda_u|
  double newton_residual = 0.0;   // max_j |g(x_j) - x_{j+1}| along the cycle
  OrbitKind kind = OrbitKind::Saddle;
  std::vector<PointC2> cycle;  // x_0 = point, x_{j+1} = g(x_j), j < period
};

struct PeriodicSearch {
  int n = 1;
  std::vector<SaddleOrbit> saddles;
  std::vector<SaddleOrbit> non_saddles;
  long fixed_point_count = 0;   // points of Fix(g^n), all kinds
  long saddle_point_count = 0;  // points of Fix(g^n) on saddle orbits
  long paths = 0;
  long paths_retracked = 0;
  long paths_failed = 0;
  long seeds_tried = 0;
  long singular_seeds = 0;
  long newton_only_roots = 0;
  bool hyperbolicity_doubtful = false;
  std::vector<std::string> warnings;
};

struct PeriodicOptions {
  int seeds_per_box = 3;
  double tol = 1e-12;
  std::uint64_t seed = 1;
  bool continuation = true;
  int newton_max_steps = 60;
  double damping = 0.5;
  long max_paths = 1L << 22;
  double neutral_band = 1e-6;
};

namespace detail {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

/// The cyclic factor-level system of period n.
struct CyclicSystem {
  const HenonMap* g;
  int n;
  int size;  // n * m
  std::vector<int> factor;  // factor index applied at step k

  CyclicSystem(const HenonMap& map, int period) : g(&map), n(period), size(period * map.factor_count()) {
    factor.resize(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) factor[static_cast<std::size_t>(k)] = map.factor_at_step(k);
  }

  const HenonFactor& f(int k) const { return g->factor(factor[static_cast<std::size_t>(k)]); }
  int wrap(int k) const { return (k % size + size) % size; }

  VecC residual(const VecC& u) const {
    VecC r(size);
    for (int k = 0; k < size; ++k) r[k] = f(k).poly(u[k]) + f(k).twist * u[wrap(k - 1)] - u[wrap(k + 1)];
    return r;
  }

  MatC jacobian(const VecC& u) const {
    MatC j = MatC::Zero(size, size);
    for (int k = 0; k < size; ++k) {
      j(k, k) += f(k).poly.derivative(u[k]);
      j(k, wrap(k - 1)) += f(k).twist;
      j(k, wrap(k + 1)) -= 1.0;
    }
    return j;
  }

  /// Orbit point x_j = (u_{jm-1}, u_{jm}).
  PointC2 point(const VecC& u, int j) const {
    const int m = g->factor_count();
    return {u[wrap(j * m - 1)], u[wrap(j * m)]};
  }

  /// Factor-level sequence through x by applying the factors in order.
  VecC unfold(const PointC2& x) const {
    VecC u(size);
    PointC2 q = x;
    for (int k = 0; k < size; ++k) {
      u[k] = q.w;
      q = apply_factor(f(k), q);
    }
    return u;
  }
};

inline double max_abs(const VecC& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Newton solve of a square system; returns nullopt when singular.
inline std::optional<VecC> lu_solve(const MatC& a, const VecC& b) {
  Eigen::FullPivLU<MatC> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  VecC x = lu.solve(b);
  if (!x.allFinite()) return std::nullopt;
  return x;
}

/// Polishes u as a root of the cyclic system; returns false when it does not converge.
inline bool polish(const CyclicSystem& sys, VecC& u, double tol, int max_steps = 30) {
  for (int it = 0; it < max_steps; ++it) {
    const VecC r = sys.residual(u);
    if (!r.allFinite()) return false;
    auto du = lu_solve(sys.jacobian(u), -r);
    if (!du) return false;
    u += *du;
    const double step = max_abs(*du);
    if (step <= 1e-15 * (1.0 + max_abs(u))) return max_abs(sys.residual(u)) <= std::max(tol, 1e-13 * (1.0 + max_abs(u)));
  }
  return max_abs(sys.residual(u)) <= tol;
}

/// Path tracker for H(u, s) = (1 - s) gamma G(u) + s F(u), G_k = u_k^{d_k} - 1.
struct Homotopy {
  const CyclicSystem* sys;
  cplx gamma;

  VecC start_residual(const VecC& u) const {
    VecC r(sys->size);
    for (int k = 0; k < sys->size; ++k) r[k] = std::pow(u[k], sys->f(k).poly.degree()) - 1.0;
    return r;
  }
  VecC h(const VecC& u, double s) const { return (1.0 - s) * gamma * start_residual(u) + s * sys->residual(u); }
  MatC hu(const VecC& u, double s) const {
    MatC j = s * sys->jacobian(u);
    for (int k = 0; k < sys->size; ++k) {
      const int d = sys->f(k).poly.degree();
      j(k, k) += (1.0 - s) * gamma * static_cast<double>(d) * std::pow(u[k], d - 1);
    }
    return j;
  }
  VecC hs(const VecC& u) const { return sys->residual(u) - gamma * start_residual(u); }

  std::optional<VecC> tangent(const VecC& u, double s) const { return lu_solve(hu(u, s), -hs(u)); }

  /// Tracks from s = 0 to s = 1; nullopt on failure.
  std::optional<VecC> track(VecC u, double max_step) const {
    double s = 0.0, ds = std::min(0.01, max_step);
    int streak = 0;
    for (int guard = 0; guard < 200000 && s < 1.0; ++guard) {
      const double step = std::min(ds, 1.0 - s);
      // RK4 predictor
      auto k1 = tangent(u, s);
      if (!k1) return std::nullopt;
      auto k2 = tangent(u + 0.5 * step * *k1, s + 0.5 * step);
      auto k3 = k2 ? tangent(u + 0.5 * step * *k2, s + 0.5 * step) : std::nullopt;
      auto k4 = k3 ? tangent(u + step * *k3, s + step) : std::nullopt;
      bool ok = k4.has_value();
      VecC v;
      if (ok) {
        v = u + step / 6.0 * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
        // corrector
        ok = false;
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 4; ++it) {
          auto dv = lu_solve(hu(v, s + step), -h(v, s + step));
          if (!dv) break;
          v += *dv;
          const double nrm = max_abs(*dv);
          if (nrm > 0.5 * prev && it > 0) break;
          prev = nrm;
          if (nrm <= 1e-10 * (1.0 + max_abs(v))) {
            ok = true;
            break;
          }
        }
        if (ok && max_abs(v - u) > 0.3 * (1.0 + max_abs(u))) ok = false;  // guard against path jumping
      }
      if (!ok) {
        ds *= 0.5;
        streak = 0;
        if (ds < 1e-13) return std::nullopt;
        continue;
      }
      u = v;
      s += step;
      if (max_abs(u) > 1e8) return std::nullopt;
      if (++streak >= 3) {
        ds = std::min(2.0 * ds, max_step);
        streak = 0;
      }
    }
    if (s < 1.0) return std::nullopt;
    return u;
  }
};

inline VecC start_point(const CyclicSystem& sys, long index) {
  VecC u(sys.size);
  for (int k = 0; k < sys.size; ++k) {
    const int d = sys.f(k).poly.degree();
    const long j = index % d;
    index /= d;
    u[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / d);
  }
  return u;
}

inline bool same_root(const VecC& a, const VecC& b, double tol) { return max_abs(a - b) <= tol * (1.0 + max_abs(a)); }

/// Single-shooting damped Newton on g^n(x) - x from one seed.
inline std::optional<PointC2> newton_fixed(const HenonMap& g, int n, PointC2 x, int max_steps, double damping,
                                           bool& singular) {
  singular = false;
  const double far = 4.0 * g.escape_radius();
  auto residual_at = [&](const PointC2& p, Matrix2C* jac) -> std::optional<PointC2> {
    try {
      const auto r = iterate_with_jacobian(g, p, n);
      if (max_modulus(r.point) > far) return std::nullopt;  // orbit escaped; not a singular seed
      if (jac) *jac = r.jacobian;
      return r.point - p;
    } catch (const RangeError&) {
      return std::nullopt;
    }
  };
  Matrix2C jac;
  auto r = residual_at(x, &jac);
  if (!r) return std::nullopt;
  for (int it = 0; it < max_steps; ++it) {
    const double rn = euclidean_norm(*r);
    if (rn < 1e-11 * (1.0 + euclidean_norm(x))) return x;
    Matrix2C a = jac;
    a(0, 0) -= 1.0;
    a(1, 1) -= 1.0;
    const cplx det = a.det();
    if (std::abs(det) < 1e-14 * (1.0 + std::norm(a(0, 0)) + std::norm(a(1, 1)))) {
      singular = true;
      return std::nullopt;
    }
    const PointC2 dx{(a(1, 1) * r->z - a(0, 1) * r->w) / det, (a(0, 0) * r->w - a(1, 0) * r->z) / det};
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      const PointC2 trial{x.z - lambda * dx.z, x.w - lambda * dx.w};
      Matrix2C tj;
      auto tr = residual_at(trial, &tj);
      if (tr && euclidean_norm(*tr) < rn) {
        x = trial;
        r = tr;
        jac = tj;
        accepted = true;
        break;
      }
      lambda *= damping;
    }
    if (!accepted) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace detail

/// Multiplier data of the cycle through x_0 = (u_{-1}, u_0).
inline void fill_multipliers(const HenonMap& g, SaddleOrbit& o, double neutral_band) {
  Matrix2C m = Matrix2C::identity();
  for (const auto& x : o.cycle) m = jacobian(g, x) * m;
  cplx det{1.0};
  for (int j = 0; j < o.period; ++j) det *= g.det_signed();
  const auto ev = eigenvalues(m.trace(), det);
  o.lambda_u = ev.large;
  o.lambda_s = ev.small;
  o.log_abs_lambda_u = std::log(std::abs(ev.large));
  o.log_abs_lambda_s = static_cast<double>(o.period) * g.log_abs_det() - o.log_abs_lambda_u;
  const double lu = std::exp(o.log_abs_lambda_u), ls = std::exp(o.log_abs_lambda_s);
  if (std::abs(lu - 1.0) < neutral_band || std::abs(ls - 1.0) < neutral_band)
    o.kind = OrbitKind::Neutral;
  else if (lu > 1.0 && ls < 1.0)
    o.kind = OrbitKind::Saddle;
  else if (lu < 1.0)
    o.kind = OrbitKind::Sink;
  else
    o.kind = OrbitKind::Source;
}

inline double cycle_residual(const HenonMap& g, const std::vector<PointC2>& cycle) {
  double r = 0.0;
  for (std::size_t j = 0; j < cycle.size(); ++j)
    r = std::max(r, distance(eval(g, cycle[j]), cycle[(j + 1) % cycle.size()]));
  return r;
}

/// Fixed points of g^n grouped into orbits, saddles separated from the rest.
/// `sample` may be null; then only continuation is used.
inline PeriodicSearch find_periodic(const HenonMap& g, int n, const JuliaSample* sample,
                                    const PeriodicOptions& opt = {}) {
  if (n < 1) throw std::invalid_argument("period must be at least 1");
  if (!(opt.tol > 0.0) || opt.tol > 1e-10) throw std::invalid_argument("tol must lie in (0, 1e-10]");
  if (opt.seeds_per_box < 1) throw std::invalid_argument("seeds_per_box must be at least 1");
  PeriodicSearch out;
  out.n = n;
  const detail::CyclicSystem sys(g, n);
  std::mt19937_64 rng(opt.seed);
  std::vector<detail::VecC> roots;

  if (opt.continuation) {
    long total = 1;
    for (int k = 0; k < sys.size; ++k) {
      total *= sys.f(k).poly.degree();
      if (total > opt.max_paths) throw std::invalid_argument("too many homotopy paths for period " + std::to_string(n));
    }
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const detail::Homotopy hom{&sys, std::polar(1.0, angle(rng))};
    out.paths = total;
    std::vector<std::optional<detail::VecC>> ends(static_cast<std::size_t>(total));
    auto run = [&](const std::vector<long>& which, double max_step) {
      parallel_for(which.size(), [&](std::size_t i) {
        const long p = which[i];
        auto e = hom.track(detail::start_point(sys, p), max_step);
        if (e && !detail::polish(sys, *e, opt.tol)) e.reset();
        ends[static_cast<std::size_t>(p)] = std::move(e);
      });
    };
    std::vector<long> all(static_cast<std::size_t>(total));
    for (long p = 0; p < total; ++p) all[static_cast<std::size_t>(p)] = p;
    run(all, 0.05);
    // Endpoints shared by two paths or failed paths are tracked again with smaller steps.
    for (double max_step : {0.005, 0.0005}) {
      std::vector<long> again;
      for (long p = 0; p < total; ++p) {
        const auto& e = ends[static_cast<std::size_t>(p)];
        bool bad = !e;
        for (long q = 0; q < total && !bad; ++q)
          if (q != p && ends[static_cast<std::size_t>(q)] &&
              detail::same_root(*e, *ends[static_cast<std::size_t>(q)], 1e-8))
            bad = true;
        if (bad) again.push_back(p);
      }
      if (again.empty()) break;
      out.paths_retracked += static_cast<long>(again.size());
      run(again, max_step);
    }
    for (const auto& e : ends) {
      if (!e) {
        ++out.paths_failed;
        continue;
      }
      bool dup = false;
      for (const auto& r : roots)
        if (detail::same_root(r, *e, 1e-8)) dup = true;
      if (!dup) roots.push_back(*e);
    }
    if (out.paths_failed > 0) out.warnings.push_back(std::to_string(out.paths_failed) + " homotopy paths failed");
  }

  if (sample != nullptr && !sample->boxes.empty()) {
    std::vector<PointC2> seeds;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const auto& b : sample->boxes) {
      seeds.push_back(b.center_point());
      for (int s = 1; s < opt.seeds_per_box; ++s)
        seeds.push_back(b.point_at({unit(rng), unit(rng), unit(rng), unit(rng)}));
    }
    out.seeds_tried = static_cast<long>(seeds.size());
    std::vector<std::optional<PointC2>> found(seeds.size());
    std::vector<unsigned char> singular(seeds.size(), 0);
    parallel_for(seeds.size(), [&](std::size_t i) {
      bool sing = false;
      found[i] = detail::newton_fixed(g, n, seeds[i], opt.newton_max_steps, opt.damping, sing);
      singular[i] = sing;
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (singular[i]) ++out.singular_seeds;
      if (!found[i]) continue;
      detail::VecC u = sys.unfold(*found[i]);
      if (!detail::polish(sys, u, opt.tol)) continue;
      bool known = false;
      for (const auto& r : roots)
        if (distance(sys.point(r, 0), sys.point(u, 0)) < 1e-6) known = true;
      if (!known) {
        roots.push_back(u);
        ++out.newton_only_roots;
      }
    }
    if (out.newton_only_roots > 0 && opt.continuation)
      out.warnings.push_back(std::to_string(out.newton_only_roots) + " roots found only by seeded Newton");
  }

  // Group the roots into orbits.
  std::vector<SaddleOrbit> orbits;
  for (const auto& u : roots) {
    std::vector<PointC2> cyc(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) cyc[static_cast<std::size_t>(j)] = sys.point(u, j);
    int prim = n;
    for (int p = 1; p < n; ++p)
      if (n % p == 0 && distance(cyc[static_cast<std::size_t>(p)], cyc[0]) < 1e-8 * (1.0 + euclidean_norm(cyc[0]))) {
        prim = p;
        break;
      }
    std::size_t best = 0;
    for (std::size_t j = 1; j < static_cast<std::size_t>(prim); ++j)
      if (lex_less(cyc[j], cyc[best])) best = j;
    std::rotate(cyc.begin(), cyc.begin() + static_cast<long>(best), cyc.end());
    bool dup = false;
    for (const auto& o : orbits)
      if (distance(o.point, cyc[0]) < 1e-6) dup = true;
    if (dup) continue;
    SaddleOrbit o;
    o.point = cyc[0];
    o.period = n;
    o.primitive_period = prim;
    o.cycle = std::move(cyc);
    o.newton_residual = cycle_residual(g, o.cycle);
    fill_multipliers(g, o, opt.neutral_band);
    orbits.push_back(std::move(o));
  }
  std::sort(orbits.begin(), orbits.end(), [](const SaddleOrbit& a, const SaddleOrbit& b) { return lex_less(a.point, b.point); });
  for (auto& o : orbits) {
    out.fixed_point_count += o.primitive_period;
    if (o.kind == OrbitKind::Saddle) {
      out.saddle_point_count += o.primitive_period;
      out.saddles.push_back(std::move(o));
    } else {
      if (o.kind != OrbitKind::Sink) out.hyperbolicity_doubtful = true;
      out.non_saddles.push_back(std::move(o));
    }
  }
  if (!out.non_saddles.empty())
    out.warnings.push_back(std::to_string(out.non_saddles.size()) + " non-saddle orbits excluded");
  if (out.saddles.empty()) throw std::runtime_error("no saddle orbits of period " + std::to_string(n));
  return out;
}

/// Signature with the seed count and tolerance given directly.
inline PeriodicSearch find_periodic(const HenonMap& g, int n, const JuliaSample& sample, int seeds_per_box,
                                    double tol) {
  PeriodicOptions opt;
  opt.seeds_per_box = seeds_per_box;
  opt.tol = tol;
  return find_periodic(g, n, &sample, opt);
}

// ---------------------------------------------------------------------------
// Unstable directions

/// Fixed generic starting vector for pushforwards.
inline VectorC2 generic_vector() { return normalized({cplx{0.6, 0.3}, cplx{-0.5, 0.55}}); }

class OrbitEscapeError : public std::runtime_error {
 public:
  explicit OrbitEscapeError(long step)
      : std::runtime_error("backward orbit left V at step " + std::to_string(step)), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Pushes v forward along a finite orbit segment; returns the unit vector at the last point.
inline VectorC2 pushforward_direction(const HenonMap& g, std::span<const PointC2> segment,
                                      VectorC2 v = generic_vector()) {
  for (std::size_t i = 0; i + 1 < segment.size(); ++i) v = normalized(jacobian(g, segment[i]) * v);
  return v;
}

/// Dg^m(g^{-m} p) v0, normalized. The backward orbit is computed by direct
/// iteration and must stay in V.
inline VectorC2 unstable_direction(const HenonMap& g, const PointC2& p, int m) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  const double r = g.escape_radius();
  std::vector<PointC2> orbit(static_cast<std::size_t>(m) + 1);
  orbit[static_cast<std::size_t>(m)] = p;
  for (int k = 1; k <= m; ++k) {
    PointC2 q;
    try {
      q = eval_inverse(g, orbit[static_cast<std::size_t>(m - k + 1)], {}, k);
    } catch (const RangeError&) {
      throw OrbitEscapeError(k);
    }
    if (std::abs(q.z) > r || std::abs(q.w) > r) throw OrbitEscapeError(k);
    orbit[static_cast<std::size_t>(m - k)] = q;
  }
  return pushforward_direction(g, orbit);
}

/// Same along the exact backward orbit of a periodic cycle, ending at cycle[index].
inline VectorC2 unstable_direction(const HenonMap& g, const SaddleOrbit& orbit, int m, int index = 0) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  const int n = static_cast<int>(orbit.cycle.size());
  std::vector<PointC2> seg(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) seg[static_cast<std::size_t>(k)] = orbit.cycle[static_cast<std::size_t>(((index - m + k) % n + n) % n)];
  return pushforward_direction(g, seg);
}

}  // namespace henon
