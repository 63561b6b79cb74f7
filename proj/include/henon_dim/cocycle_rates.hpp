#pragma once

// Derivative growth rates: s_bar / s_under from periodic multipliers and
// s+ / s- as growth of max ||Dg^{+-n}|| over J+- n V.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "henon_dim/classification.hpp"
#include "henon_dim/julia_sampler.hpp"
#include "henon_dim/orbit_segments.hpp"
#include "henon_dim/parallel.hpp"
#include "henon_dim/periodic_orbits.hpp"

namespace henon {

struct RateRow {
  int n = 0;
  double max_value = 0.0;
  double min_value = 0.0;
};

struct GrowthRates {
  double s_bar = 0.0;
  double s_under = 0.0;
  double s_bar_gap = 0.0;  // |value(n_last) - value(n_prev)|
  double s_under_gap = 0.0;
  std::vector<RateRow> per_n;
  std::string source = "periodic";
};

/// Max and min of (1/n) log|lambda_u| over the saddles of each period.
inline GrowthRates growth_rates_periodic(std::span<const PeriodicSearch> searches) {
  if (searches.empty()) throw std::invalid_argument("no periodic data");
  GrowthRates g;
  for (const auto& s : searches) {
    if (s.saddles.empty()) throw std::invalid_argument("empty orbit list for period " + std::to_string(s.n));
    RateRow row{s.n, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (const auto& o : s.saddles) {
      const double v = o.log_abs_lambda_u / s.n;
      row.max_value = std::max(row.max_value, v);
      row.min_value = std::min(row.min_value, v);
    }
    g.per_n.push_back(row);
  }
  std::sort(g.per_n.begin(), g.per_n.end(), [](const RateRow& a, const RateRow& b) { return a.n < b.n; });
  const auto& last = g.per_n.back();
  g.s_bar = last.max_value;
  g.s_under = last.min_value;
  if (g.per_n.size() >= 2) {
    const auto& prev = g.per_n[g.per_n.size() - 2];
    g.s_bar_gap = std::abs(last.max_value - prev.max_value);
    g.s_under_gap = std::abs(last.min_value - prev.min_value);
  }
  return g;
}

struct SignedRate {
  Direction sign = Direction::Forward;
  double value = 0.0;  // value at the largest n
  std::vector<std::pair<int, double>> per_n;
  long probes_used = 0;
  long probes_dropped = 0;
  long periodic_probes = 0;
  std::vector<int> periodic_attains;  // per n: 1 when a periodic probe gives the max
};

struct NormRates {
  double s_plus = 0.0;
  double s_minus = 0.0;
  std::vector<std::pair<int, double>> per_n_plus;
  std::vector<std::pair<int, double>> per_n_minus;
  double radius_used = 0.0;
  long probes_plus = 0, dropped_plus = 0;
  long probes_minus = 0, dropped_minus = 0;
};

struct RateOptions {
  int margin = 4;  // extra steps at the far end of each segment
  int walks_per_box = 1;
  std::size_t max_walks = 20000;  // larger samples are thinned by a fixed stride
  std::uint64_t seed = 1;
};

/// (1/n) log ||Dg^{+-n}(p)|| along exact periodic cycles; the probes lie in J.
inline SignedRate norm_rate_periodic(const HenonMap& g, std::span<const SaddleOrbit> orbits, std::vector<int> n_list,
                                     Direction sign) {
  if (orbits.empty()) throw std::invalid_argument("no orbits");
  std::sort(n_list.begin(), n_list.end());
  SignedRate r;
  r.sign = sign;
  for (int n : n_list) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& o : orbits) {
      const int len = static_cast<int>(o.cycle.size());
      for (int start = 0; start < len; ++start) {
        Matrix2C m = Matrix2C::identity();
        for (int k = 0; k < n; ++k) {
          if (sign == Direction::Forward)
            m = jacobian(g, o.cycle[static_cast<std::size_t>((start + k) % len)]) * m;
          else
            m = jacobian_inverse(g, o.cycle[static_cast<std::size_t>(((start - k) % len + len) % len)]) * m;
        }
        best = std::max(best, std::log(spectral_norm(m)));
      }
    }
    r.per_n.emplace_back(n, best / n);
  }
  r.probes_used = static_cast<long>(orbits.size());
  r.value = r.per_n.back().second;
  return r;
}

/// (1/n) log max ||Dg^{+-n}(x)|| over probes x built from the sample: one
/// shadowed orbit segment per walk, starting (forward) or ending (backward)
/// in a sample box. Probes whose segment cannot be kept in V are dropped.
/// Points of the given periodic cycles lie in J and are added as probes;
/// random walks alone almost never follow a cycle for n steps.
inline SignedRate norm_rate(const HenonMap& g, const JuliaSample& s, std::vector<int> n_list, Direction sign,
                            const RateOptions& opt = {}, std::span<const SaddleOrbit> cycles = {}) {
  if (n_list.empty()) throw std::invalid_argument("n_list is empty");
  std::sort(n_list.begin(), n_list.end());
  if (n_list.front() < 1) throw std::invalid_argument("n_list entries must be positive");
  const bool forward = sign == Direction::Forward;
  if (forward && (s.target == Target::Jminus || s.target == Target::Kminus))
    throw std::invalid_argument("forward rates need a J or Jplus sample");
  if (!forward && s.target == Target::Jplus) throw std::invalid_argument("backward rates need a J, Jminus or Kminus sample");
  const int n_top = n_list.back();
  const int length = n_top + opt.margin;
  const auto tg = transition_graph(g, s);
  const auto per_box = static_cast<std::size_t>(std::max(1, opt.walks_per_box));
  const std::size_t stride = std::max<std::size_t>(1, (s.size() * per_box + opt.max_walks - 1) / std::max<std::size_t>(1, opt.max_walks));
  const std::size_t walks = (s.size() * per_box + stride - 1) / stride;
  // log ||Dg^{+-n}|| per walk and per n; empty marks a dropped probe
  std::vector<std::vector<double>> logs(walks);
  parallel_for(walks, [&](std::size_t w) {
    const auto box = static_cast<std::uint32_t>(w * stride / per_box);
    auto rng = item_rng(opt.seed, w);
    auto path = graph_walk(g, s, tg, box, length, forward, rng);
    if (!path) return;
    const auto guess = path_centers(s, *path);
    auto seg = shadow_segment(g, guess, s.radius);
    if (!seg) return;
    std::vector<double> out;
    Matrix2C m = Matrix2C::identity();
    std::size_t next = 0;
    for (int k = 1; k <= n_top; ++k) {
      if (forward) {
        m = jacobian(g, seg->points[static_cast<std::size_t>(k - 1)]) * m;
      } else {
        const std::size_t idx = seg->points.size() - static_cast<std::size_t>(k);
        m = jacobian_inverse(g, seg->points[idx]) * m;
      }
      if (next < n_list.size() && n_list[next] == k) {
        out.push_back(std::log(spectral_norm(m)));
        ++next;
      }
    }
    logs[w] = std::move(out);
  });
  SignedRate r;
  r.sign = sign;
  std::vector<double> best(n_list.size(), -std::numeric_limits<double>::infinity());
  for (const auto& l : logs) {
    if (l.size() != n_list.size()) {
      ++r.probes_dropped;
      continue;
    }
    ++r.probes_used;
    for (std::size_t i = 0; i < l.size(); ++i) best[i] = std::max(best[i], l[i]);
  }
  if (r.probes_used == 0) throw std::runtime_error("all rate probes dropped; refine the sample");
  std::vector<double> periodic(n_list.size(), -std::numeric_limits<double>::infinity());
  if (!cycles.empty()) {
    const auto p = norm_rate_periodic(g, cycles, n_list, sign);
    for (std::size_t i = 0; i < n_list.size(); ++i) periodic[i] = p.per_n[i].second * n_list[i];
    for (const auto& o : cycles) r.periodic_probes += static_cast<long>(o.cycle.size());
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    r.per_n.emplace_back(n_list[i], std::max(best[i], periodic[i]) / n_list[i]);
    r.periodic_attains.push_back(periodic[i] >= best[i] ? 1 : 0);
  }
  r.value = r.per_n.back().second;
  return r;
}

inline NormRates norm_rates(const HenonMap& g, const JuliaSample& plus_sample, const JuliaSample& minus_sample,
                            const std::vector<int>& n_list, const RateOptions& opt = {},
                            std::span<const SaddleOrbit> cycles = {}) {
  const auto p = norm_rate(g, plus_sample, n_list, Direction::Forward, opt, cycles);
  const auto m = norm_rate(g, minus_sample, n_list, Direction::Backward, opt, cycles);
  NormRates r;
  r.s_plus = p.value;
  r.s_minus = m.value;
  r.per_n_plus = p.per_n;
  r.per_n_minus = m.per_n;
  r.radius_used = plus_sample.radius;
  r.probes_plus = p.probes_used;
  r.dropped_plus = p.probes_dropped;
  r.probes_minus = m.probes_used;
  r.dropped_minus = m.probes_dropped;
  return r;
}

struct HolderBound {
  double exponent = 0.0;   // log d / s
  double dim_lower = 0.0;  // 2 + log d / s
};

inline HolderBound holder_bound(const HenonMap& g, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("growth rate must be positive and finite");
  const double e = std::log(static_cast<double>(g.degree())) / s;
  return {e, 2.0 + e};
}

struct HolderBounds {
  HolderBound plus;
  HolderBound minus;
};

inline HolderBounds holder_bound(const HenonMap& g, const NormRates& rates) {
  return {holder_bound(g, rates.s_plus), holder_bound(g, rates.s_minus)};
}

}  // namespace henon
