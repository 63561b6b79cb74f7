#pragma once

// True orbit segments near pseudo-orbits of a box covering. A random walk on
// the transition graph gives box centers c_0 .. c_N; the segment x_0 .. x_N is
// the solution of g(x_j) = x_{j+1} with z(x_0) = z(c_0) and w(x_N) = w(c_N)
// pinned, solved by Newton on the factor-level recurrence.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "henon_dim/henon_map.hpp"
#include "henon_dim/julia_sampler.hpp"

namespace henon {

struct OrbitSegment {
  std::vector<PointC2> points;  // points[j + 1] = g(points[j])
  double residual = 0.0;
};

/// Newton solve of the pinned boundary value problem started from the
/// pseudo-orbit `guess`. Fails when Newton stalls or a point leaves the
/// bidisk of the given radius.
inline std::optional<OrbitSegment> shadow_segment(const HenonMap& g, std::span<const PointC2> guess, double radius,
                                                  int max_steps = 40) {
  if (guess.size() < 2) return std::nullopt;
  const int m = g.factor_count();
  const int steps = static_cast<int>(guess.size()) - 1;
  const int size = steps * m;  // unknowns u_0 .. u_{size-1}
  const cplx u_first = guess.front().z;  // u_{-1}
  const cplx u_last = guess.back().w;    // u_{size}
  std::vector<int> fidx(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) fidx[static_cast<std::size_t>(k)] = g.factor_at_step(k);

  Eigen::VectorXcd u(size);
  for (int j = 0; j < steps; ++j) {
    PointC2 q = guess[static_cast<std::size_t>(j)];
    for (int r = 0; r < m; ++r) {
      u[j * m + r] = q.w;
      q = apply_factor(g.factor(fidx[static_cast<std::size_t>(j * m + r)]), q);
    }
  }
  auto at = [&](const Eigen::VectorXcd& v, int k) { return k < 0 ? u_first : (k >= size ? u_last : v[k]); };
  auto residual = [&](const Eigen::VectorXcd& v) {
    Eigen::VectorXcd r(size);
    for (int k = 0; k < size; ++k) {
      const auto& f = g.factor(fidx[static_cast<std::size_t>(k)]);
      r[k] = f.poly(v[k]) + f.twist * at(v, k - 1) - at(v, k + 1);
    }
    return r;
  };
  Eigen::VectorXcd r = residual(u);
  double rn = r.cwiseAbs().maxCoeff();
  bool converged = false;
  for (int it = 0; it < max_steps && std::isfinite(rn); ++it) {
    if (rn <= 1e-12 * (1.0 + u.cwiseAbs().maxCoeff())) {
      converged = true;
      break;
    }
    Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(size, size);
    for (int k = 0; k < size; ++k) {
      const auto& f = g.factor(fidx[static_cast<std::size_t>(k)]);
      jac(k, k) = f.poly.derivative(u[k]);
      if (k > 0) jac(k, k - 1) = f.twist;
      if (k + 1 < size) jac(k, k + 1) = -1.0;
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jac);
    const Eigen::VectorXcd du = lu.solve(-r);
    if (!du.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXcd trial = u + lambda * du;
      Eigen::VectorXcd tr = residual(trial);
      const double tn = tr.cwiseAbs().maxCoeff();
      if (std::isfinite(tn) && tn < rn) {
        u = std::move(trial);
        r = std::move(tr);
        rn = tn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (!converged && !(rn <= 1e-12 * (1.0 + u.cwiseAbs().maxCoeff()))) return std::nullopt;

  OrbitSegment seg;
  seg.points.resize(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j) seg.points[static_cast<std::size_t>(j)] = {at(u, j * m - 1), at(u, j * m)};
  for (const auto& p : seg.points)
    if (!(std::abs(p.z) <= radius && std::abs(p.w) <= radius)) return std::nullopt;
  for (int j = 0; j < steps; ++j)
    seg.residual = std::max(seg.residual, distance(eval(g, seg.points[static_cast<std::size_t>(j)]),
                                                   seg.points[static_cast<std::size_t>(j) + 1]));
  return seg;
}

/// Random walk of `steps` moves on the transition graph. Each move picks
/// uniformly among the neighbours whose centers lie within d_min + 2h of the
/// image of the current center. Backward walks use g^{-1} and predecessors
/// and return the boxes in forward time order.
inline std::optional<std::vector<std::uint32_t>> graph_walk(const HenonMap& g, const JuliaSample& s,
                                                            const TransitionGraph& tg, std::uint32_t start, int steps,
                                                            bool forward, std::mt19937_64& rng) {
  std::vector<std::uint32_t> path{start};
  const double slack = 2.0 * s.resolution;
  for (int k = 0; k < steps; ++k) {
    const std::uint32_t cur = path.back();
    const auto& nb = forward ? tg.succ[cur] : tg.pred[cur];
    if (nb.empty()) return std::nullopt;
    PointC2 img;
    try {
      img = forward ? eval(g, s.boxes[cur].center_point()) : eval_inverse(g, s.boxes[cur].center_point());
    } catch (const RangeError&) {
      return std::nullopt;
    }
    std::vector<double> dist(nb.size());
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nb.size(); ++i) {
      dist[i] = distance(img, s.boxes[nb[i]].center_point());
      dmin = std::min(dmin, dist[i]);
    }
    std::vector<std::uint32_t> close;
    for (std::size_t i = 0; i < nb.size(); ++i)
      if (dist[i] <= dmin + slack) close.push_back(nb[i]);
    std::uniform_int_distribution<std::size_t> pick(0, close.size() - 1);
    path.push_back(close[pick(rng)]);
  }
  if (!forward) std::reverse(path.begin(), path.end());
  return path;
}

/// Box centers along a path, as the initial guess for shadow_segment.
inline std::vector<PointC2> path_centers(const JuliaSample& s, const std::vector<std::uint32_t>& path) {
  std::vector<PointC2> c;
  c.reserve(path.size());
  for (auto i : path) c.push_back(s.boxes[i].center_point());
  return c;
}

/// Deterministic per-item generator derived from a run seed.
inline std::mt19937_64 item_rng(std::uint64_t seed, std::uint64_t item) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(item), static_cast<std::uint32_t>(item >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace henon
