#pragma once

// Unstable/stable pressure estimates, Bowen-Ruelle roots and box counting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "henon_dim/julia_sampler.hpp"
#include "henon_dim/orbit_segments.hpp"
#include "henon_dim/parallel.hpp"
#include "henon_dim/periodic_orbits.hpp"

namespace henon {

enum class Side { Unstable, Stable };

inline const char* to_string(Side s) { return s == Side::Unstable ? "unstable" : "stable"; }

/// log sum exp(x_i), summed in ascending order so the result does not depend
/// on the input order.
inline double log_sum_exp(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("empty sum");
  std::sort(x.begin(), x.end());
  const double top = x.back();
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

/// (1/n) log sum_p |lambda_u(p)|^{-t} (unstable) or sum_p |lambda_s(p)|^t
/// (stable) over the points of Fix(g^n) on saddle orbits. An orbit of
/// primitive period q contributes q points with equal multipliers.
inline double pressure_periodic(std::span<const SaddleOrbit> orbits, double t, Side side) {
  if (orbits.empty()) throw std::invalid_argument("pressure needs at least one orbit");
  if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
  const int n = orbits.front().period;
  std::vector<double> terms;
  terms.reserve(orbits.size());
  for (const auto& o : orbits) {
    if (o.period != n) throw std::invalid_argument("orbits of different periods in one pressure sum");
    const double w = side == Side::Unstable ? -t * o.log_abs_lambda_u : t * o.log_abs_lambda_s;
    terms.push_back(std::log(static_cast<double>(o.primitive_period)) + w);
  }
  return log_sum_exp(std::move(terms)) / n;
}

inline double pressure_periodic(const PeriodicSearch& s, double t, Side side) {
  return pressure_periodic(std::span<const SaddleOrbit>(s.saddles), t, side);
}

struct PressurePoint {
  double t = 0.0;
  double value = 0.0;
};

struct PressureCurve {
  Side side = Side::Unstable;
  int n = 0;
  std::vector<PressurePoint> points;
  std::string estimator = "periodic";

  bool strictly_decreasing() const {
    for (std::size_t i = 1; i < points.size(); ++i)
      if (!(points[i].value < points[i - 1].value)) return false;
    return true;
  }
};

/// Parses "lo:hi:step" into an inclusive grid.
inline std::vector<double> parse_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos) throw std::invalid_argument("grid must look like lo:hi:step");
  const double lo = std::stod(spec.substr(0, a));
  const double hi = std::stod(spec.substr(a + 1, b - a - 1));
  const double step = std::stod(spec.substr(b + 1));
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad grid '" + spec + "'");
  std::vector<double> out;
  const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  // snapped so 3 * 0.1 prints as 0.3
  for (long i = 0; i <= count; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  return out;
}

inline PressureCurve pressure_curve(const PeriodicSearch& s, const std::vector<double>& ts, Side side) {
  PressureCurve c;
  c.side = side;
  c.n = s.n;
  for (double t : ts) c.points.push_back({t, pressure_periodic(s, t, side)});
  return c;
}

// ---------------------------------------------------------------------------
// Bowen-Ruelle root

struct RootResult {
  double root = 0.0;
  double lo = 0.0, hi = 0.0;  // final bracket
  int iterations = 0;
  bool expanded = false;  // upper end had to be raised past the requested bracket
  std::vector<std::string> warnings;
};

class RootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bisection for the zero of a decreasing pressure function, to bracket width
/// below 1e-9. The upper end is doubled up to t_max when needed.
inline RootResult bowen_ruelle_root(const std::function<double(double)>& pressure, double t_lo = 0.0,
                                    double t_hi = 2.0, double t_max = 4.0) {
  if (!(t_lo < t_hi)) throw std::invalid_argument("bracket must satisfy t_lo < t_hi");
  RootResult r;
  const double f_lo = pressure(t_lo);
  if (f_lo == 0.0) {
    // one saddle point: P(0) = log 1
    r.root = r.lo = r.hi = t_lo;
    r.warnings.push_back("pressure vanishes at the lower end; root taken there");
    return r;
  }
  if (!(f_lo > 0.0)) throw RootError("pressure is not positive at the lower end of the bracket");
  double f_hi = pressure(t_hi);
  while (!(f_hi < 0.0) && t_hi < t_max) {
    t_hi = std::min(t_max, 2.0 * t_hi);
    f_hi = pressure(t_hi);
    r.expanded = true;
  }
  if (r.expanded) r.warnings.push_back("bracket expanded to t_hi = " + std::to_string(t_hi));
  if (!(f_hi < 0.0)) throw RootError("no sign change of the pressure on [t_lo, t_max]");
  double lo = t_lo, hi = t_hi;
  while (hi - lo >= 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (pressure(mid) > 0.0 ? lo : hi) = mid;
    ++r.iterations;
  }
  r.lo = lo;
  r.hi = hi;
  r.root = 0.5 * (lo + hi);
  return r;
}

// ---------------------------------------------------------------------------
// Separated sets

struct SeparatedSet {
  std::vector<PointC2> points;
  std::vector<std::size_t> indices;  // into the candidate list
  int n = 0;
  double epsilon = 0.0;
};

/// Bowen distance max_{i<n} |x_i - y_i| between two forward orbits.
inline double bowen_distance(std::span<const PointC2> x, std::span<const PointC2> y, int n) {
  double d = 0.0;
  for (int i = 0; i < n; ++i) d = std::max(d, distance(x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]));
  return d;
}

/// Greedy maximal (n, eps)-separated subset; candidates are visited in
/// lexicographic order of their initial points.
inline SeparatedSet separated_set(const std::vector<std::vector<PointC2>>& orbits, int n, double epsilon) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < orbits.size(); ++i)
    if (orbits[i].size() >= static_cast<std::size_t>(n)) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(orbits[a][0], orbits[b][0]); });
  SeparatedSet s;
  s.n = n;
  s.epsilon = epsilon;
  for (std::size_t i : order) {
    bool far = true;
    for (std::size_t j : s.indices)
      if (bowen_distance(orbits[i], orbits[j], n) < epsilon) {
        far = false;
        break;
      }
    if (far) {
      s.indices.push_back(i);
      s.points.push_back(orbits[i][0]);
    }
  }
  return s;
}

struct SeparatedOptions {
  int m_dir = 10;  // pushforward depth for the finite-time directions
  int walks_per_box = 2;
  std::uint64_t seed = 1;
};

/// Probe orbits from a J sample with finite-time Birkhoff sums of
/// log ||Dg|_{E^u}|| and log ||Dg|_{E^s}||. Each probe is the middle of a
/// shadowed segment of length 2 m_dir + n, so both directions have m_dir
/// steps to settle.
struct SeparatedProbes {
  int n = 0;
  int m_dir = 0;
  std::vector<std::vector<PointC2>> orbits;  // n forward points per probe
  std::vector<double> sum_u;
  std::vector<double> sum_s;
  long walks = 0;
  long failed = 0;
};

inline SeparatedProbes separated_probes(const HenonMap& g, const JuliaSample& s, int n,
                                        const SeparatedOptions& opt = {}) {
  if (s.target != Target::J) throw std::invalid_argument("separated-set pressure needs a J sample");
  if (opt.m_dir < 10) throw std::invalid_argument("m_dir must be at least 10");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const auto tg = transition_graph(g, s);
  const std::size_t per = static_cast<std::size_t>(std::max(1, opt.walks_per_box));
  const std::size_t walks = s.size() * per;
  struct Item {
    bool ok = false;
    std::vector<PointC2> orbit;
    double su = 0.0, ss = 0.0;
  };
  std::vector<Item> items(walks);
  const int m = opt.m_dir;
  parallel_for(walks, [&](std::size_t w) {
    const auto box = static_cast<std::uint32_t>(w / per);
    auto rng = item_rng(opt.seed, w);
    auto back = graph_walk(g, s, tg, box, m, false, rng);
    auto fwd = back ? graph_walk(g, s, tg, box, n + m, true, rng) : std::nullopt;
    if (!fwd) return;
    std::vector<std::uint32_t> path(*back);
    path.insert(path.end(), fwd->begin() + 1, fwd->end());
    const auto seg = shadow_segment(g, path_centers(s, path), s.radius);
    if (!seg) return;
    const auto& x = seg->points;
    Item it;
    // unstable: push v0 from x_0 to the probe x_m, then along n steps
    VectorC2 v = pushforward_direction(g, std::span<const PointC2>(x.data(), static_cast<std::size_t>(m) + 1));
    for (int i = 0; i < n; ++i) {
      const VectorC2 dv = jacobian(g, x[static_cast<std::size_t>(m + i)]) * v;
      it.su += std::log(norm(dv));
      v = normalized(dv);
    }
    // stable: pull v0 back from the end to x_{m+n}, then n more steps to the probe
    VectorC2 u = generic_vector();
    const std::size_t last = x.size() - 1;
    for (std::size_t k = last; k > static_cast<std::size_t>(m + n); --k) u = normalized(jacobian_inverse(g, x[k]) * u);
    double back_sum = 0.0;
    for (int k = m + n; k > m; --k) {
      const VectorC2 du = jacobian_inverse(g, x[static_cast<std::size_t>(k)]) * u;
      back_sum += std::log(norm(du));
      u = normalized(du);
    }
    it.ss = -back_sum;
    it.orbit.assign(x.begin() + m, x.begin() + m + n);
    it.ok = std::isfinite(it.su) && std::isfinite(it.ss);
    items[w] = std::move(it);
  });
  SeparatedProbes p;
  p.n = n;
  p.m_dir = m;
  p.walks = static_cast<long>(walks);
  for (auto& it : items) {
    if (!it.ok) {
      ++p.failed;
      continue;
    }
    p.orbits.push_back(std::move(it.orbit));
    p.sum_u.push_back(it.su);
    p.sum_s.push_back(it.ss);
  }
  return p;
}

struct SeparatedPressure {
  SeparatedSet set;
  const SeparatedProbes* probes = nullptr;

  double operator()(double t, Side side) const {
    std::vector<double> terms;
    for (std::size_t i : set.indices)
      terms.push_back(side == Side::Unstable ? -t * probes->sum_u[i] : t * probes->sum_s[i]);
    return log_sum_exp(std::move(terms)) / set.n;
  }
};

inline SeparatedPressure separated_pressure(const SeparatedProbes& p, double epsilon) {
  SeparatedPressure sp{separated_set(p.orbits, p.n, epsilon), &p};
  if (sp.set.points.size() < 2)
    throw std::runtime_error("separated set has fewer than 2 points; use a finer sample");
  return sp;
}

/// One-shot form: (1/n) log sum over a maximal (n, eps)-separated set of
/// exp(-t S_n phi^u) or exp(t S_n phi^s).
inline double pressure_separated(const HenonMap& g, const JuliaSample& s, int n, double epsilon, double t, Side side,
                                 int m_dir, std::uint64_t seed = 1) {
  SeparatedOptions opt;
  opt.m_dir = m_dir;
  opt.seed = seed;
  const auto probes = separated_probes(g, s, n, opt);
  return separated_pressure(probes, epsilon)(t, side);
}

// ---------------------------------------------------------------------------
// Box counting

struct BoxCountPoint {
  int level = 0;
  double epsilon = 0.0;  // box side length
  std::size_t count = 0;
};

struct BoxDimension {
  double estimate = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the fit in log N
  std::vector<BoxCountPoint> points;
};

/// Counts occupied cells of side radius * 2^{1 - level} by coarsening the
/// leaves of the sample, then fits log N against log(1 / eps).
inline BoxDimension box_dimension(const JuliaSample& s, const std::vector<int>& levels) {
  if (levels.size() < 4) throw std::invalid_argument("box dimension needs at least 4 scales");
  const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
  if (*hi - *lo < 2) throw std::invalid_argument("box dimension scales must span at least 2 octaves");
  if (*lo < 0 || *hi > s.depth) throw std::invalid_argument("box dimension level outside the sample depth");
  BoxDimension b;
  for (int level : levels) {
    std::vector<CellKey> cells;
    cells.reserve(s.cells.size());
    for (CellKey c : s.cells) cells.push_back(ancestor_cell(c, s.depth - level));
    std::sort(cells.begin(), cells.end());
    const auto count = static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
    b.points.push_back({level, 2.0 * s.radius / static_cast<double>(1u << level), count});
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : b.points) {
    mx += std::log(1.0 / p.epsilon);
    my += std::log(static_cast<double>(p.count));
  }
  const double k = static_cast<double>(b.points.size());
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : b.points) {
    const double x = std::log(1.0 / p.epsilon) - mx;
    sxx += x * x;
    sxy += x * (std::log(static_cast<double>(p.count)) - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("degenerate box-count fit");
  b.estimate = sxy / sxx;
  b.intercept = my - b.estimate * mx;
  double ss = 0.0;
  for (const auto& p : b.points) {
    const double e = std::log(static_cast<double>(p.count)) - (b.intercept + b.estimate * std::log(1.0 / p.epsilon));
    ss += e * e;
  }
  b.residual = std::sqrt(ss / k);
  return b;
}

/// The finest `count` levels of the sample.
inline std::vector<int> finest_levels(const JuliaSample& s, int count) {
  std::vector<int> out;
  for (int l = std::max(0, s.depth - count + 1); l <= s.depth; ++l) out.push_back(l);
  return out;
}

}  // namespace henon
