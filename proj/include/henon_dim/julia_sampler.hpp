#pragma once

// Box coverings of J, J+ n V, J- n V and K- n V by recursive 16-way
// subdivision of V. A child survives when the box transition graph gives it a
// successor and/or a predecessor, depending on the target; transitions are
// decided with an affine Taylor model of g that encloses the true image.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "henon_dim/classification.hpp"
#include "henon_dim/henon_map.hpp"
#include "henon_dim/parallel.hpp"

namespace henon {

enum class Target { J, Jplus, Jminus, Kminus };

inline const char* to_string(Target t) {
  switch (t) {
    case Target::J: return "J";
    case Target::Jplus: return "Jplus";
    case Target::Jminus: return "Jminus";
    case Target::Kminus: return "Kminus";
  }
  return "?";
}

inline Target target_from_string(const std::string& s) {
  if (s == "J") return Target::J;
  if (s == "Jplus" || s == "J+") return Target::Jplus;
  if (s == "Jminus" || s == "J-") return Target::Jminus;
  if (s == "Kminus" || s == "K-") return Target::Kminus;
  throw std::invalid_argument("unknown sample target '" + s + "'");
}

inline constexpr int kMaxDepth = 15;

/// Grid cell at some depth, packed as four 16-bit indices (Re z, Im z, Re w, Im w).
using CellKey = std::uint64_t;

inline CellKey pack_cell(const std::array<std::uint32_t, 4>& k) {
  return (CellKey{k[0]} << 48) | (CellKey{k[1]} << 32) | (CellKey{k[2]} << 16) | CellKey{k[3]};
}

inline std::array<std::uint32_t, 4> unpack_cell(CellKey key) {
  return {static_cast<std::uint32_t>(key >> 48) & 0xffffu, static_cast<std::uint32_t>(key >> 32) & 0xffffu,
          static_cast<std::uint32_t>(key >> 16) & 0xffffu, static_cast<std::uint32_t>(key) & 0xffffu};
}

/// Ancestor of a cell `levels` subdivisions up.
inline CellKey ancestor_cell(CellKey key, int levels) {
  auto k = unpack_cell(key);
  for (auto& x : k) x >>= levels;
  return pack_cell(k);
}

/// The root box [-radius, radius]^4 subdivided `depth` times.
struct BoxGrid {
  double radius = 1.0;
  int depth = 0;

  double half_width() const { return radius / static_cast<double>(1u << depth); }
  std::uint32_t cells_per_axis() const { return 1u << depth; }

  BoxR4 box(CellKey key) const {
    const auto k = unpack_cell(key);
    const double h = half_width();
    BoxR4 b;
    b.half_width = h;
    for (std::size_t i = 0; i < 4; ++i) b.center[i] = -radius + (2.0 * k[i] + 1.0) * h;
    return b;
  }

  CellKey cell_of(const PointC2& p) const {
    const auto x = to_real4(p);
    std::array<std::uint32_t, 4> k{};
    const double n = cells_per_axis();
    for (std::size_t i = 0; i < 4; ++i) {
      const double u = std::floor((x[i] + radius) / (2.0 * half_width()));
      k[i] = static_cast<std::uint32_t>(std::clamp(u, 0.0, n - 1.0));
    }
    return pack_cell(k);
  }
};

struct JuliaSample {
  std::vector<BoxR4> boxes;
  std::vector<CellKey> cells;  // sorted, parallel to boxes
  double resolution = 0.0;     // half width of the leaves
  Target target = Target::J;
  int n_max = kDefaultHorizon;
  int depth = 0;
  double radius = 0.0;  // radius of V
  std::vector<std::size_t> count_per_depth;

  BoxGrid grid() const { return {radius, depth}; }
  std::size_t size() const { return boxes.size(); }

  /// Index of the leaf containing p, or -1.
  long find(const PointC2& p) const {
    if (!(max_modulus(p) <= 2.0 * radius)) return -1;
    const auto x = to_real4(p);
    for (double v : x)
      if (std::abs(v) > radius) return -1;
    const CellKey key = grid().cell_of(p);
    const auto it = std::lower_bound(cells.begin(), cells.end(), key);
    if (it == cells.end() || *it != key) return -1;
    return static_cast<long>(it - cells.begin());
  }
};

class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Affine enclosure of g over a box

/// g(c + delta) lies in gc + M delta + E with |E_i| <= err_i for every delta in
/// [-h, h]^4. M is the real form of the complex Jacobian at the center.
struct AffineEnclosure {
  std::array<double, 4> gc{};
  std::array<double, 16> m{};
  std::array<double, 16> minv{};
  std::array<double, 4> err{};
  double h = 0.0;
  bool valid = false;
};

namespace detail {

inline void embed_complex_2x2(const Matrix2C& l, std::array<double, 16>& out) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const cplx v = l(r, c);
      const std::size_t base = static_cast<std::size_t>(2 * r * 4 + 2 * c);
      out[base] = v.real();
      out[base + 1] = -v.imag();
      out[base + 4] = v.imag();
      out[base + 5] = v.real();
    }
}

}  // namespace detail

inline AffineEnclosure affine_enclosure(const HenonMap& g, const BoxR4& box) {
  AffineEnclosure out;
  out.h = box.half_width;
  const double reach = box.half_width * std::sqrt(2.0);
  cplx cz{box.center[0], box.center[1]}, cw{box.center[2], box.center[3]};
  Matrix2C l = Matrix2C::identity();
  double ez = 0.0, ew = 0.0;
  for (int i = g.factor_count(); i-- > 0;) {
    const auto& f = g.factor(i);
    const double ru = (std::abs(l(1, 0)) + std::abs(l(1, 1))) * reach + ew;
    const auto t = f.poly.taylor_at(cw);
    // Taylor remainder sum_{k>=2} |P^(k)(cw) / k!| ru^k
    double rem = 0.0, pw = ru * ru;
    for (std::size_t k = 2; k < t.size(); ++k, pw *= ru) rem += std::abs(t[k]) * pw;
    const cplx new_cw = t[0] + f.twist * cz;
    Matrix2C nl;
    nl(0, 0) = l(1, 0);
    nl(0, 1) = l(1, 1);
    nl(1, 0) = t[1] * l(1, 0) + f.twist * l(0, 0);
    nl(1, 1) = t[1] * l(1, 1) + f.twist * l(0, 1);
    const double new_ew = std::abs(t[1]) * ew + std::abs(f.twist) * ez + rem;
    ez = ew;
    ew = new_ew;
    cz = cw;
    cw = new_cw;
    l = nl;
  }
  if (!is_finite(cz) || !is_finite(cw) || !l.finite() || !std::isfinite(ez) || !std::isfinite(ew)) return out;
  out.gc = {cz.real(), cz.imag(), cw.real(), cw.imag()};
  detail::embed_complex_2x2(l, out.m);
  const cplx det = l.det();
  Matrix2C inv{{l(1, 1) / det, -l(0, 1) / det, -l(1, 0) / det, l(0, 0) / det}};
  if (!inv.finite()) return out;
  detail::embed_complex_2x2(inv, out.minv);
  // Rounding in the center evaluation, relative to the size of the terms.
  const double slack = 1e-12 * (1.0 + std::max(std::abs(cz), std::abs(cw)));
  out.err = {ez + slack, ez + slack, ew + slack, ew + slack};
  out.valid = true;
  return out;
}

/// Calls visit(j) for every cell j of the sorted set whose box passes the
/// two-sided enclosure test against g(box). visit returns false to stop.
template <class Visit>
void for_each_image_cell(const AffineEnclosure& e, const BoxGrid& grid, const std::vector<CellKey>& cells,
                         Visit&& visit) {
  if (!e.valid) return;
  const double hb = grid.half_width();
  const double width = 2.0 * hb;
  const long n = static_cast<long>(grid.cells_per_axis());
  std::array<long, 4> lo{}, hi{};
  for (std::size_t i = 0; i < 4; ++i) {
    double ext = e.err[i] + hb;
    for (std::size_t j = 0; j < 4; ++j) ext += std::abs(e.m[4 * i + j]) * e.h;
    const double a = (e.gc[i] - ext + grid.radius) / width - 0.5;
    const double b = (e.gc[i] + ext + grid.radius) / width - 0.5;
    if (b < 0.0 || a > static_cast<double>(n - 1)) return;
    lo[i] = std::max(0L, static_cast<long>(std::ceil(a)));
    hi[i] = std::min(n - 1, static_cast<long>(std::floor(b)));
    if (lo[i] > hi[i]) return;
  }
  // Preimage test: M^{-1}(b - gc) must reach the source box.
  std::array<double, 4> rhs{};
  for (std::size_t i = 0; i < 4; ++i) {
    rhs[i] = e.h * (1.0 + 1e-12);
    for (std::size_t j = 0; j < 4; ++j) rhs[i] += std::abs(e.minv[4 * i + j]) * (hb + e.err[j]);
  }
  auto center = [&](long k) { return -grid.radius + (2.0 * static_cast<double>(k) + 1.0) * hb; };
  for (long k0 = lo[0]; k0 <= hi[0]; ++k0)
    for (long k1 = lo[1]; k1 <= hi[1]; ++k1)
      for (long k2 = lo[2]; k2 <= hi[2]; ++k2) {
        const std::array<double, 3> b{center(k0) - e.gc[0], center(k1) - e.gc[1], center(k2) - e.gc[2]};
        double t_lo = center(lo[3]) - e.gc[3] - 1e-9 * hb, t_hi = center(hi[3]) - e.gc[3] + 1e-9 * hb;
        bool empty = false;
        for (std::size_t i = 0; i < 4 && !empty; ++i) {
          const double c = e.minv[4 * i] * b[0] + e.minv[4 * i + 1] * b[1] + e.minv[4 * i + 2] * b[2];
          const double s = e.minv[4 * i + 3];
          if (std::abs(s) < 1e-300) {
            empty = std::abs(c) > rhs[i];
            continue;
          }
          double u = (-rhs[i] - c) / s, v = (rhs[i] - c) / s;
          if (u > v) std::swap(u, v);
          t_lo = std::max(t_lo, u);
          t_hi = std::min(t_hi, v);
          empty = t_lo > t_hi;
        }
        if (empty) continue;
        const long k3a = std::max(lo[3], static_cast<long>(std::ceil((t_lo + e.gc[3] + grid.radius) / width - 0.5)));
        const long k3b = std::min(hi[3], static_cast<long>(std::floor((t_hi + e.gc[3] + grid.radius) / width - 0.5)));
        if (k3a > k3b) continue;
        const CellKey first = pack_cell({static_cast<std::uint32_t>(k0), static_cast<std::uint32_t>(k1),
                                         static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k3a)});
        const CellKey last = pack_cell({static_cast<std::uint32_t>(k0), static_cast<std::uint32_t>(k1),
                                        static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k3b)});
        for (auto it = std::lower_bound(cells.begin(), cells.end(), first); it != cells.end() && *it <= last; ++it)
          if (!visit(static_cast<std::size_t>(it - cells.begin()))) return;
      }
}

// ---------------------------------------------------------------------------
// Box transition graph on one level

/// Successor lists of the covering: j in succ[i] when g(box_i) may meet box_j.
struct TransitionGraph {
  std::vector<std::vector<std::uint32_t>> succ;
  std::vector<std::vector<std::uint32_t>> pred;
};

inline TransitionGraph transition_graph(const HenonMap& g, const JuliaSample& s) {
  TransitionGraph tg;
  const auto grid = s.grid();
  tg.succ.resize(s.size());
  tg.pred.resize(s.size());
  parallel_for(s.size(), [&](std::size_t i) {
    const auto e = affine_enclosure(g, s.boxes[i]);
    for_each_image_cell(e, grid, s.cells, [&](std::size_t j) {
      tg.succ[i].push_back(static_cast<std::uint32_t>(j));
      return true;
    });
  });
  for (std::size_t i = 0; i < s.size(); ++i)
    for (auto j : tg.succ[i]) tg.pred[j].push_back(static_cast<std::uint32_t>(i));
  return tg;
}

struct SampleOptions {
  double radius = 0.0;  // radius of V; 0 means the escape radius of the map
  int status_probes = 16;
  int max_trim_passes = 6;
};

namespace detail {

inline bool needs_successor(Target t) { return t == Target::J || t == Target::Jplus; }
inline bool needs_predecessor(Target t) { return t == Target::J || t == Target::Jminus || t == Target::Kminus; }

/// One pass of the graph selection; returns the number of cells removed.
inline std::size_t trim_pass(const HenonMap& g, const BoxGrid& grid, const std::vector<CellKey>& cells,
                             std::vector<unsigned char>& alive, Target target) {
  const std::size_t n = cells.size();
  std::vector<std::atomic<unsigned char>> has_pred(n);
  std::vector<unsigned char> has_succ(n, 0);
  const bool want_succ = needs_successor(target), want_pred = needs_predecessor(target);
  parallel_for(n, [&](std::size_t i) {
    if (!alive[i]) return;
    const auto e = affine_enclosure(g, grid.box(cells[i]));
    for_each_image_cell(e, grid, cells, [&](std::size_t j) {
      if (!alive[j]) return true;
      has_succ[i] = 1;
      if (want_pred) has_pred[j].store(1, std::memory_order_relaxed);
      return want_pred;
    });
  });
  std::size_t removed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    const bool keep = (!want_succ || has_succ[i]) && (!want_pred || has_pred[i].load(std::memory_order_relaxed));
    if (!keep) {
      alive[i] = 0;
      ++removed;
    }
  }
  return removed;
}

/// Boxes whose probes all stay bounded lie in the interior of K+ or K- and
/// carry no boundary at this resolution.
inline bool interior_box(const HenonMap& g, const BoxR4& box, Target target, int n_max, int probes) {
  if (target == Target::Kminus) return false;
  const auto pts = box_probes(box, probes);
  const bool fwd = target == Target::J || target == Target::Jplus;
  const bool bwd = target == Target::J || target == Target::Jminus;
  if (fwd && probe_verdict(g, pts, Direction::Forward, n_max) == ProbeVerdict::AllBounded) return true;
  if (bwd && probe_verdict(g, pts, Direction::Backward, n_max) == ProbeVerdict::AllBounded) return true;
  return false;
}

}  // namespace detail

/// Covering of the target set at resolution radius / 2^depth. Every level
/// keeps the children that meet V, survive the transition-graph selection
/// and, for the boundary targets, are not interior to K+ or K-.
inline JuliaSample sample(const HenonMap& g, Target target, int depth, int n_max = kDefaultHorizon,
                          const SampleOptions& opt = {}) {
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  if (depth > kMaxDepth) throw std::invalid_argument("depth must be at most " + std::to_string(kMaxDepth));
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  JuliaSample s;
  s.target = target;
  s.n_max = n_max;
  s.radius = opt.radius > 0.0 ? opt.radius : g.escape_radius();
  std::vector<CellKey> cells{pack_cell({0, 0, 0, 0})};
  s.count_per_depth.push_back(1);
  for (int level = 1; level <= depth; ++level) {
    const BoxGrid grid{s.radius, level};
    std::vector<CellKey> children;
    children.reserve(cells.size() * 16);
    for (CellKey parent : cells) {
      const auto k = unpack_cell(parent);
      for (std::uint32_t c = 0; c < 16; ++c) {
        std::array<std::uint32_t, 4> ck{};
        for (std::size_t i = 0; i < 4; ++i) ck[i] = 2 * k[i] + ((c >> i) & 1u);
        const CellKey key = pack_cell(ck);
        if (meets_bidisk(grid.box(key), s.radius)) children.push_back(key);
      }
    }
    std::sort(children.begin(), children.end());
    std::vector<unsigned char> alive(children.size(), 1);
    if (target != Target::Kminus) {
      parallel_for(children.size(), [&](std::size_t i) {
        if (detail::interior_box(g, grid.box(children[i]), target, n_max, opt.status_probes)) alive[i] = 0;
      });
    }
    for (int pass = 0; pass < opt.max_trim_passes; ++pass)
      if (detail::trim_pass(g, grid, children, alive, target) == 0) break;
    cells.clear();
    for (std::size_t i = 0; i < children.size(); ++i)
      if (alive[i]) cells.push_back(children[i]);
    s.count_per_depth.push_back(cells.size());
    if (cells.empty())
      throw SampleError("empty " + std::string(to_string(target)) + " sample at depth " + std::to_string(level) +
                        "; increase n_max or depth");
  }
  s.depth = depth;
  const BoxGrid grid{s.radius, depth};
  s.resolution = grid.half_width();
  s.cells = std::move(cells);
  s.boxes.reserve(s.cells.size());
  for (CellKey key : s.cells) s.boxes.push_back(grid.box(key));
  return s;
}

}  // namespace henon
