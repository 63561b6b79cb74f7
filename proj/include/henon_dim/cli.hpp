#pragma once

// Command-line runner. Every subcommand writes <out>/<subcommand>.json and,
// where there is a table, <out>/<subcommand>*.csv.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "henon_dim/classification.hpp"
#include "henon_dim/cocycle_rates.hpp"
#include "henon_dim/dimension_report.hpp"
#include "henon_dim/fixtures.hpp"
#include "henon_dim/io.hpp"
#include "henon_dim/julia_sampler.hpp"
#include "henon_dim/parallel.hpp"
#include "henon_dim/periodic_orbits.hpp"
#include "henon_dim/pressure.hpp"

namespace henon::cli {

/// Bad flags or inputs; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string map_file;
  std::string fixture;
  std::string out_dir = ".";
  int depth = -1;  // -1: subcommand default
  int n_max = kDefaultHorizon;
  std::string periods = "1..8";
  std::string t_grid = "0:2:0.1";
  double epsilon = 2.0;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string target = "J";
  int grid = 65;
  double window = 0.0;  // 0: escape radius
  double z0_re = 0.0, z0_im = 0.0;
  std::string n_list = "4,8,12,16";
  int levels = 4;
  std::string moduli = "0.3,0.1,0.03";
  bool with_box = false;
  bool no_separated = false;
  double tol = kDefaultGreenTolerance;

  /// Everything that can change an output byte. Threads and paths are left out.
  json to_json() const {
    return {{"subcommand", subcommand}, {"depth", depth},   {"n_max", n_max},       {"periods", periods},
            {"t_grid", t_grid},         {"epsilon", epsilon}, {"seed", seed},       {"target", target},
            {"grid", grid},             {"window", window}, {"z0", {z0_re, z0_im}}, {"n_list", n_list},
            {"levels", levels},         {"moduli", moduli}, {"with_box", with_box}, {"no_separated", no_separated},
            {"tol", tol}};
  }
};

inline std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  try {
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(s.substr(0, dots));
      const int hi = std::stoi(s.substr(dots + 2));
      if (hi < lo) throw UsageError(std::string(what) + ": empty range");
      for (int i = lo; i <= hi; ++i) out.push_back(i);
    } else {
      std::stringstream in(s);
      std::string item;
      while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const std::logic_error&) {
    throw UsageError(std::string(what) + ": cannot parse '" + s + "'");
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1) throw UsageError(std::string(what) + " entries must be positive");
    if (i > 0 && out[i] <= out[i - 1]) throw UsageError(std::string(what) + " must be ascending");
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  try {
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw UsageError(std::string(what) + ": cannot parse '" + s + "'");
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

inline json point_json(const PointC2& p) { return {p.z.real(), p.z.imag(), p.w.real(), p.w.imag()}; }
inline json complex_json(cplx c) { return {c.real(), c.imag()}; }

inline json orbit_json(const SaddleOrbit& o) {
  return {{"point", point_json(o.point)},
          {"period", o.period},
          {"primitive_period", o.primitive_period},
          {"lambda_u", complex_json(o.lambda_u)},
          {"lambda_s", complex_json(o.lambda_s)},
          {"log_abs_lambda_u", o.log_abs_lambda_u},
          {"log_abs_lambda_s", o.log_abs_lambda_s},
          {"residual", o.newton_residual},
          {"kind", to_string(o.kind)}};
}

inline json search_json(const PeriodicSearch& s, bool with_orbits) {
  json j = {{"n", s.n},
            {"fixed_point_count", s.fixed_point_count},
            {"saddle_point_count", s.saddle_point_count},
            {"saddle_orbits", s.saddles.size()},
            {"non_saddle_orbits", s.non_saddles.size()},
            {"paths", s.paths},
            {"paths_retracked", s.paths_retracked},
            {"paths_failed", s.paths_failed},
            {"seeds_tried", s.seeds_tried},
            {"singular_seeds", s.singular_seeds},
            {"newton_only_roots", s.newton_only_roots},
            {"hyperbolicity_doubtful", s.hyperbolicity_doubtful},
            {"warnings", s.warnings}};
  if (with_orbits) {
    json a = json::array();
    for (const auto& o : s.saddles) a.push_back(orbit_json(o));
    for (const auto& o : s.non_saddles) a.push_back(orbit_json(o));
    j["orbits"] = a;
  }
  return j;
}

inline json rates_json(const GrowthRates& g, const NormRates& r) {
  json per_n = json::array();
  for (const auto& row : g.per_n) per_n.push_back({{"n", row.n}, {"max", row.max_value}, {"min", row.min_value}});
  auto pairs = [](const std::vector<std::pair<int, double>>& v) {
    json a = json::array();
    for (const auto& [n, x] : v) a.push_back({{"n", n}, {"value", x}});
    return a;
  };
  return {{"s_bar", g.s_bar},
          {"s_under", g.s_under},
          {"s_bar_gap", g.s_bar_gap},
          {"s_under_gap", g.s_under_gap},
          {"periodic_per_n", per_n},
          {"s_plus", r.s_plus},
          {"s_minus", r.s_minus},
          {"per_n_plus", pairs(r.per_n_plus)},
          {"per_n_minus", pairs(r.per_n_minus)},
          {"radius", r.radius_used},
          {"probes_plus", r.probes_plus},
          {"dropped_plus", r.dropped_plus},
          {"probes_minus", r.probes_minus},
          {"dropped_minus", r.dropped_minus}};
}

inline json box_json(const BoxDimension& b) {
  json pts = json::array();
  for (const auto& p : b.points) pts.push_back({{"level", p.level}, {"epsilon", p.epsilon}, {"count", p.count}});
  return {{"estimate", b.estimate}, {"intercept", b.intercept}, {"residual", b.residual}, {"points", pts}};
}

inline json report_json(const DimensionReport& r) {
  json roots = json::array();
  for (const auto& row : r.roots)
    roots.push_back({{"n", row.n},
                     {"t_u", row.t_u},
                     {"t_s", row.t_s},
                     {"count", row.count},
                     {"s_bar", row.s_bar},
                     {"s_under", row.s_under},
                     {"sandwich_u", {row.sandwich_u_lo, row.sandwich_u_hi}},
                     {"sandwich_s", {row.sandwich_s_lo, row.sandwich_s_hi}},
                     {"identity_error", row.identity_error}});
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"lhs", c.lhs},
                      {"relation", c.relation},
                      {"rhs", c.rhs},
                      {"slack", c.relation == ">=" ? c.lhs - c.rhs : c.rhs - c.lhs},
                      {"pass", c.pass},
                      {"advisory", c.advisory}});
  json j = {{"degree", r.degree},
            {"det_paper", complex_json(r.det_paper)},
            {"det_signed", complex_json(r.det_signed)},
            {"escape_radius", r.escape_radius},
            {"inverted", r.inverted},
            {"t_u", r.t_u},
            {"t_s", r.t_s},
            {"dim_J", r.dim_J},
            {"dim_Jplus", r.dim_Jplus},
            {"dim_Jminus", r.dim_Jminus},
            {"promo_lower", r.promo_lower},
            {"promo_upper", r.promo_upper},
            {"corneu_bound", r.corneu_bound},
            {"cantor_flag", r.cantor_flag},
            {"box_bound", r.box_bound},
            {"green_lower_plus", r.green_lower_plus},
            {"green_lower_minus", r.green_lower_minus},
            {"holder_plus", r.holder_plus},
            {"holder_minus", r.holder_minus},
            {"roots", roots},
            {"rates", rates_json(r.growth, r.norm)},
            {"sample_sizes", r.sample_sizes},
            {"checks", checks},
            {"all_pass", r.all_pass()},
            {"hyperbolicity_doubtful", r.hyperbolicity_doubtful},
            {"warnings", r.warnings},
            {"annotations", r.annotations}};
  if (r.box) {
    j["box_dim_Kminus"] = r.box_dim_Kminus;
    j["box_fit"] = box_json(*r.box);
  } else {
    j["box_dim_Kminus"] = nullptr;
  }
  if (r.separated) {
    const auto& s = *r.separated;
    j["separated"] = {{"n", s.n},
                      {"epsilon", s.epsilon},
                      {"set_size", s.set_size},
                      {"separated_t0", s.separated_t0},
                      {"periodic_t0", s.periodic_t0},
                      {"separated_t1", s.separated_t1},
                      {"periodic_t1", s.periodic_t1}};
  }
  json searches = json::array();
  for (const auto& s : r.searches) searches.push_back(search_json(s, false));
  j["periodic"] = searches;
  return j;
}

/// Runs one subcommand on a parsed config; returns the written files.
class Runner {
 public:
  explicit Runner(RunConfig cfg) : cfg_(std::move(cfg)) {}

  std::vector<std::string> run() {
    if (cfg_.n_max < 1) throw UsageError("--nmax must be at least 1");
    if (!(cfg_.epsilon > 0.0)) throw UsageError("--eps must be positive");
    if (!(cfg_.tol > 0.0)) throw UsageError("--tol must be positive");
    if (cfg_.threads < 0) throw UsageError("--threads must be non-negative");
    set_thread_count(cfg_.threads);
    dir_ = output_dir(cfg_.out_dir);
    if (cfg_.subcommand == "selftest") return selftest();
    load();
    const auto& s = cfg_.subcommand;
    if (s == "classify") return classify_grid(false);
    if (s == "green") return classify_grid(true);
    if (s == "sample") return sample_cmd();
    if (s == "periodic-orbits") return periodic_cmd();
    if (s == "rates") return rates_cmd();
    if (s == "pressure-curve") return pressure_cmd();
    if (s == "dimension-report") return report_cmd();
    if (s == "box-dim") return box_cmd();
    if (s == "sweep") return sweep_cmd();
    throw UsageError("unknown subcommand " + s);
  }

  bool selftest_passed() const { return selftest_ok_; }
  const std::string& summary() const { return summary_; }

 private:
  RunConfig cfg_;
  std::optional<HenonMap> map_;
  std::filesystem::path dir_;
  OutputHeader header_;
  std::string summary_;
  bool selftest_ok_ = true;

  void load() {
    if (!cfg_.map_file.empty() && !cfg_.fixture.empty()) throw UsageError("give either --map or --fixture");
    if (!cfg_.map_file.empty()) {
      try {
        map_ = load_map(cfg_.map_file);
      } catch (const MapFileError& e) {
        throw UsageError(e.what());
      }
    } else if (!cfg_.fixture.empty()) {
      try {
        map_ = fixtures::by_name(cfg_.fixture);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    } else {
      throw UsageError("--map is required");
    }
    header_ = {cfg_.subcommand, map_hash(*map_), config_hash(cfg_.to_json()), cfg_.seed};
  }

  int depth_or(int fallback) const {
    const int d = cfg_.depth < 0 ? fallback : cfg_.depth;
    if (d < 1 || d > kMaxDepth) throw UsageError("--depth must lie in 1.." + std::to_string(kMaxDepth));
    return d;
  }

  Target target() const {
    try {
      return target_from_string(cfg_.target);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  std::vector<double> t_grid() const {
    try {
      return parse_grid(cfg_.t_grid);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--tgrid: ") + e.what());
    }
  }

  std::string write_json(const std::string& name, json body) {
    json doc = {{"header", header_.to_json()}, {"map", map_ ? map_to_json(*map_) : json(nullptr)}};
    for (auto& [k, v] : body.items()) doc[k] = std::move(v);
    const auto path = dir_ / (name + ".json");
    atomic_write(path, doc.dump(2) + "\n");
    return path.string();
  }

  std::string write_csv(const std::string& name, const CsvTable& t) {
    const auto path = dir_ / (name + ".csv");
    atomic_write(path, t.str(header_));
    return path.string();
  }

  std::vector<std::string> classify_grid(bool with_green) {
    const HenonMap& g = *map_;
    if (cfg_.grid < 2) throw UsageError("--grid must be at least 2");
    const double half = cfg_.window > 0.0 ? cfg_.window : g.escape_radius();
    const int n = cfg_.grid;
    const cplx z0{cfg_.z0_re, cfg_.z0_im};
    struct Row {
      PointC2 p;
      EscapeResult f, b;
      GreenValue gp, gm;
    };
    std::vector<Row> rows(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    run_stage(cfg_.subcommand, [&] {
      parallel_for(rows.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k) / n, j = static_cast<int>(k) % n;
        const double x = -half + 2.0 * half * i / (n - 1), y = -half + 2.0 * half * j / (n - 1);
        Row& r = rows[k];
        r.p = {z0, cplx{x, y}};
        r.f = classify(g, r.p, Direction::Forward, cfg_.n_max);
        r.b = classify(g, r.p, Direction::Backward, cfg_.n_max);
        if (with_green) {
          r.gp = green(g, r.p, Direction::Forward, cfg_.tol, cfg_.n_max);
          r.gm = green(g, r.p, Direction::Backward, cfg_.tol, cfg_.n_max);
        }
      });
      return 0;
    });
    std::vector<std::string> cols{"re_z", "im_z", "re_w", "im_w", "forward", "forward_steps", "backward", "backward_steps"};
    if (with_green) cols.insert(cols.end(), {"g_plus", "g_minus"});
    CsvTable t(cols);
    long both = 0, kp = 0, km = 0;
    double gmax = 0.0;
    long unconverged = 0;
    for (const auto& r : rows) {
      auto st = [](const EscapeResult& e) { return std::string(e.escaped() ? "escaped" : "bounded"); };
      std::vector<std::string> cells{fmt(r.p.z.real()), fmt(r.p.z.imag()), fmt(r.p.w.real()), fmt(r.p.w.imag()),
                                     st(r.f),            std::to_string(r.f.steps), st(r.b), std::to_string(r.b.steps)};
      if (with_green) {
        cells.push_back(fmt(r.gp.value));
        cells.push_back(fmt(r.gm.value));
        gmax = std::max(gmax, r.gp.value);
        if (r.f.escaped() && !r.gp.converged) ++unconverged;
      }
      t.row(cells);
      kp += !r.f.escaped();
      km += !r.b.escaped();
      both += !r.f.escaped() && !r.b.escaped();
    }
    json body = {{"slice", {{"z0", complex_json(z0)}, {"half_width", half}, {"grid", n}}},
                 {"points", rows.size()},
                 {"in_Kplus", kp},
                 {"in_Kminus", km},
                 {"in_K", both}};
    if (with_green) {
      body["g_plus_max"] = gmax;
      body["g_plus_unconverged"] = unconverged;
    }
    summary_ = cfg_.subcommand + ": " + std::to_string(rows.size()) + " points, " + std::to_string(both) + " in K";
    return {write_json(cfg_.subcommand, body), write_csv(cfg_.subcommand, t)};
  }

  std::vector<std::string> sample_cmd() {
    const auto tg = target();
    const int depth = depth_or(6);
    const auto s = run_stage("sample", [&] { return sample(*map_, tg, depth, cfg_.n_max); });
    CsvTable t({"index", "x0", "x1", "x2", "x3", "half_width"});
    for (std::size_t i = 0; i < s.boxes.size(); ++i) {
      const auto& b = s.boxes[i];
      t.row({std::to_string(i), fmt(b.center[0]), fmt(b.center[1]), fmt(b.center[2]), fmt(b.center[3]),
             fmt(b.half_width)});
    }
    json body = {{"target", to_string(s.target)},    {"depth", s.depth},       {"radius", s.radius},
                 {"resolution", s.resolution},       {"boxes", s.size()},      {"count_per_depth", s.count_per_depth}};
    summary_ = "sample: " + std::to_string(s.size()) + " boxes for " + to_string(s.target);
    return {write_json("sample", body), write_csv("sample", t)};
  }

  std::vector<PeriodicSearch> searches(const std::vector<int>& periods, const JuliaSample& j) {
    std::vector<PeriodicSearch> out;
    PeriodicOptions po;
    po.seed = cfg_.seed;
    for (int n : periods) out.push_back(run_stage("periodic", [&] { return find_periodic(*map_, n, &j, po); }));
    return out;
  }

  std::vector<PeriodicSearch> searches_with_default_sample(const std::vector<int>& periods, int depth) {
    const auto j = run_stage("sample", [&] { return sample(*map_, Target::J, depth, cfg_.n_max); });
    return searches(periods, j);
  }

  std::vector<std::string> periodic_cmd() {
    const auto periods = parse_int_list(cfg_.periods, "--periods");
    const auto all = searches_with_default_sample(periods, depth_or(6));
    CsvTable t({"n", "index", "re_z", "im_z", "re_w", "im_w", "primitive_period", "abs_lambda_u", "abs_lambda_s",
                "residual", "kind"});
    json list = json::array();
    for (const auto& s : all) {
      list.push_back(search_json(s, true));
      std::size_t k = 0;
      auto add = [&](const SaddleOrbit& o) {
        t.row({std::to_string(s.n), std::to_string(k++), fmt(o.point.z.real()), fmt(o.point.z.imag()),
               fmt(o.point.w.real()), fmt(o.point.w.imag()), std::to_string(o.primitive_period),
               fmt(std::abs(o.lambda_u)), fmt(std::abs(o.lambda_s)), fmt(o.newton_residual), to_string(o.kind)});
      };
      for (const auto& o : s.saddles) add(o);
      for (const auto& o : s.non_saddles) add(o);
    }
    std::string counts;
    for (const auto& s : all) counts += (counts.empty() ? "" : " ") + std::to_string(s.fixed_point_count);
    summary_ = "periodic-orbits: Fix(g^n) counts " + counts;
    return {write_json("periodic-orbits", {{"periods", list}}), write_csv("periodic-orbits", t)};
  }

  std::vector<std::string> rates_cmd() {
    const auto periods = parse_int_list(cfg_.periods, "--periods");
    const auto n_list = parse_int_list(cfg_.n_list, "--nlist");
    const int depth = depth_or(5);
    const auto all = searches_with_default_sample(periods, 6);
    const auto growth = run_stage("rates", [&] { return growth_rates_periodic(all); });
    std::vector<SaddleOrbit> cycles;
    for (const auto& s : all)
      for (const auto& o : s.saddles)
        if (o.primitive_period == o.period) cycles.push_back(o);
    const auto norm = run_stage("rates", [&] {
      const auto plus = sample(*map_, Target::Jplus, depth, cfg_.n_max);
      const auto minus = sample(*map_, Target::Jminus, depth, cfg_.n_max);
      RateOptions ro;
      ro.seed = cfg_.seed;
      return norm_rates(*map_, plus, minus, n_list, ro, cycles);
    });
    CsvTable t({"quantity", "n", "value"});
    for (const auto& row : growth.per_n) {
      t.row({"s_bar", std::to_string(row.n), fmt(row.max_value)});
      t.row({"s_under", std::to_string(row.n), fmt(row.min_value)});
    }
    for (const auto& [n, v] : norm.per_n_plus) t.row({"s_plus", std::to_string(n), fmt(v)});
    for (const auto& [n, v] : norm.per_n_minus) t.row({"s_minus", std::to_string(n), fmt(v)});
    summary_ = "rates: s_bar " + fmt(growth.s_bar) + ", s_under " + fmt(growth.s_under) + ", s+ " + fmt(norm.s_plus) +
               ", s- " + fmt(norm.s_minus);
    return {write_json("rates", rates_json(growth, norm)), write_csv("rates", t)};
  }

  std::vector<std::string> pressure_cmd() {
    const auto periods = parse_int_list(cfg_.periods, "--periods");
    const auto ts = t_grid();
    const auto all = searches_with_default_sample(periods, depth_or(6));
    CsvTable t({"n", "t", "pressure_u", "pressure_s"});
    json list = json::array();
    for (const auto& s : all) {
      const auto cu = pressure_curve(s, ts, Side::Unstable);
      const auto cs = pressure_curve(s, ts, Side::Stable);
      for (std::size_t i = 0; i < ts.size(); ++i)
        t.row({std::to_string(s.n), fmt(ts[i]), fmt(cu.points[i].value), fmt(cs.points[i].value)});
      const auto ru = run_stage("roots", [&] {
        return bowen_ruelle_root([&](double x) { return pressure_periodic(s, x, Side::Unstable); });
      });
      const auto rs = run_stage("roots", [&] {
        return bowen_ruelle_root([&](double x) { return pressure_periodic(s, x, Side::Stable); });
      });
      list.push_back({{"n", s.n},
                      {"t_u", ru.root},
                      {"t_s", rs.root},
                      {"decreasing_u", cu.strictly_decreasing()},
                      {"decreasing_s", cs.strictly_decreasing()},
                      {"warnings", ru.warnings}});
    }
    summary_ = "pressure-curve: " + std::to_string(all.size()) + " periods, t_u(n=" + std::to_string(all.back().n) +
               ") = " + fmt(list.back()["t_u"].get<double>());
    return {write_json("pressure-curve", {{"curves", list}}), write_csv("pressure-curve", t)};
  }

  std::vector<std::string> box_cmd() {
    Target tg = Target::Kminus;
    if (cfg_.target != "J") tg = target();
    const int depth = depth_or(7);
    if (cfg_.levels < 4) throw UsageError("--levels must be at least 4");
    const auto s = run_stage("sample", [&] { return sample(*map_, tg, depth, cfg_.n_max); });
    const auto b = run_stage("box-dim", [&] { return box_dimension(s, finest_levels(s, cfg_.levels)); });
    CsvTable t({"level", "epsilon", "count"});
    for (const auto& p : b.points) t.row({std::to_string(p.level), fmt(p.epsilon), std::to_string(p.count)});
    json body = box_json(b);
    body["target"] = to_string(tg);
    summary_ = "box-dim: slope " + fmt(b.estimate) + " for " + to_string(tg);
    return {write_json("box-dim", body), write_csv("box-dim", t)};
  }

  ReportConfig report_config() const {
    ReportConfig rc;
    rc.periods = parse_int_list(cfg_.periods, "--periods");
    rc.n_max = cfg_.n_max;
    rc.rate_n = parse_int_list(cfg_.n_list, "--nlist");
    rc.epsilon = cfg_.epsilon;
    rc.seed = cfg_.seed;
    rc.t_grid = t_grid();
    rc.separated = !cfg_.no_separated;
    if (cfg_.depth > 0) rc.box_depth = depth_or(7);
    rc.box_levels = cfg_.levels;
    if (rc.box_levels < 4) throw UsageError("--levels must be at least 4");
    return rc;
  }

  std::vector<std::string> report_cmd() {
    const auto rc = report_config();
    const auto r = dimension_report(*map_, rc);
    std::vector<std::string> files{write_json("dimension-report", report_json(r))};
    CsvTable pc({"side", "n", "t", "pressure"});
    for (const auto* c : {&r.curve_u, &r.curve_s})
      for (const auto& p : c->points) pc.row({to_string(c->side), std::to_string(c->n), fmt(p.t), fmt(p.value)});
    files.push_back(write_csv("dimension-report_pressure", pc));
    CsvTable rt({"quantity", "n", "value"});
    for (const auto& row : r.growth.per_n) {
      rt.row({"s_bar", std::to_string(row.n), fmt(row.max_value)});
      rt.row({"s_under", std::to_string(row.n), fmt(row.min_value)});
    }
    for (const auto& [n, v] : r.norm.per_n_plus) rt.row({"s_plus", std::to_string(n), fmt(v)});
    for (const auto& [n, v] : r.norm.per_n_minus) rt.row({"s_minus", std::to_string(n), fmt(v)});
    files.push_back(write_csv("dimension-report_rates", rt));
    if (r.box) {
      CsvTable bt({"level", "epsilon", "count"});
      for (const auto& p : r.box->points) bt.row({std::to_string(p.level), fmt(p.epsilon), std::to_string(p.count)});
      files.push_back(write_csv("dimension-report_box", bt));
    }
    long failed = 0;
    for (const auto& c : r.checks) failed += !c.pass;
    summary_ = "dimension-report: dim_J " + fmt(r.dim_J) + ", cantor_flag " + (r.cantor_flag ? "true" : "false") + ", " +
               std::to_string(r.checks.size() - static_cast<std::size_t>(failed)) + "/" +
               std::to_string(r.checks.size()) + " checks pass";
    return files;
  }

  std::vector<std::string> sweep_cmd() {
    auto rc = report_config();
    rc.box_dim = cfg_.with_box;
    rc.separated = false;
    const auto moduli = parse_double_list(cfg_.moduli, "--moduli");
    std::vector<SweepEntry> entries;
    try {
      entries = sweep(*map_, moduli, rc);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    CsvTable t({"modulus", "dim_Jminus", "box_bound", "t_u", "t_s", "s_minus", "corneu", "error"});
    json list = json::array();
    for (const auto& e : entries) {
      if (e.report) {
        const auto& r = *e.report;
        const auto* c = r.check("corneu");
        t.row({fmt(e.modulus), fmt(r.dim_Jminus), fmt(r.box_bound), fmt(r.t_u), fmt(r.t_s), fmt(r.norm.s_minus),
               c && c->pass ? "pass" : "fail", ""});
        json j = report_json(r);
        j["modulus"] = e.modulus;
        list.push_back(j);
      } else {
        t.row({fmt(e.modulus), "", "", "", "", "", "", e.error});
        list.push_back({{"modulus", e.modulus}, {"error", e.error}});
      }
    }
    summary_ = "sweep: " + std::to_string(entries.size()) + " members";
    return {write_json("sweep", {{"members", list}}), write_csv("sweep", t)};
  }

  std::vector<std::string> selftest() {
    struct Fixture {
      const char* name;
      HenonMap g;
    };
    const std::vector<Fixture> fx{{"H1", fixtures::h1()}, {"H2", fixtures::h2()}, {"H3", fixtures::h3()}};
    auto line = [&](const std::string& what, bool ok, double value) {
      std::printf("%s %s (%.3g)\n", ok ? "PASS" : "FAIL", what.c_str(), value);
      selftest_ok_ = selftest_ok_ && ok;
    };
    for (const auto& f : fx) {
      std::mt19937_64 rng(cfg_.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double r = f.g.escape_radius();
      double trip = 0.0, det = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const PointC2 p{cplx{u(rng), u(rng)} * r, cplx{u(rng), u(rng)} * r};
        trip = std::max(trip, distance(eval_inverse(f.g, eval(f.g, p)), p));
        trip = std::max(trip, distance(eval(f.g, eval_inverse(f.g, p)), p));
        det = std::max(det, std::abs(jacobian(f.g, p).det() - f.g.det_signed()));
      }
      line(std::string(f.name) + " round trip", trip < 1e-12, trip);
      line(std::string(f.name) + " determinant", det < 1e-12, det);
      double ident = 0.0;
      for (int n = 1; n <= 4; ++n) {
        const auto s = find_periodic(f.g, n, nullptr);
        for (double t : {0.0, 0.5, 1.0, 1.5, 2.0})
          ident = std::max(ident, std::abs(pressure_periodic(s, t, Side::Stable) - pressure_periodic(s, t, Side::Unstable) -
                                           t * f.g.log_abs_det()));
      }
      line(std::string(f.name) + " pressure identity", ident < 1e-10, ident);
    }
    summary_ = std::string("selftest: ") + (selftest_ok_ ? "all identities pass" : "identity failure");
    return {};
  }
};

inline void add_common(CLI::App* app, RunConfig& c) {
  app->add_option("--map", c.map_file, "map description JSON file");
  app->add_option("--fixture", c.fixture, "built-in map H1, H2 or H3 instead of --map");
  app->add_option("--out", c.out_dir, "output directory (overridden by HENON_DIM_OUT_DIR)");
  app->add_option("--nmax", c.n_max, "escape horizon");
  app->add_option("--seed", c.seed, "seed for jitter and walks");
  app->add_option("--threads", c.threads, "worker threads, 0 for all cores");
}

inline int run(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Dimension estimates for compositions of generalized Henon maps", "henon_dim"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"classify", "escape classification on a w-slice"},
                      {"green", "Green functions on a w-slice"},
                      {"sample", "box covering of J, J+, J- or K-"},
                      {"periodic-orbits", "all points of Fix(g^n)"},
                      {"rates", "growth rates s_bar, s_under, s+, s-"},
                      {"pressure-curve", "periodic pressure curves and roots"},
                      {"dimension-report", "full pipeline with verdicts"},
                      {"box-dim", "box-counting slope"},
                      {"sweep", "reports over twist moduli"},
                      {"selftest", "exact identities on built-in maps"}};
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, cfg);
    const std::string n = s.name;
    if (n == "classify" || n == "green") {
      sub->add_option("--grid", cfg.grid, "points per axis");
      sub->add_option("--window", cfg.window, "half width of the w window");
      sub->add_option("--z0-re", cfg.z0_re);
      sub->add_option("--z0-im", cfg.z0_im);
      if (n == "green") sub->add_option("--tol", cfg.tol, "Green convergence tolerance");
    }
    if (n == "sample" || n == "box-dim") sub->add_option("--target", cfg.target, "J, Jplus, Jminus or Kminus");
    if (n != "classify" && n != "green" && n != "selftest") sub->add_option("--depth", cfg.depth, "subdivision depth");
    if (n == "periodic-orbits" || n == "rates" || n == "pressure-curve" || n == "dimension-report" || n == "sweep")
      sub->add_option("--periods", cfg.periods, "periods, e.g. 1..8 or 4,6,8");
    if (n == "pressure-curve" || n == "dimension-report" || n == "sweep")
      sub->add_option("--tgrid", cfg.t_grid, "lo:hi:step");
    if (n == "rates" || n == "dimension-report" || n == "sweep") sub->add_option("--nlist", cfg.n_list, "rate horizons");
    if (n == "dimension-report" || n == "sweep") {
      sub->add_option("--eps", cfg.epsilon, "separation for the separated-set cross-check");
      sub->add_flag("--no-separated", cfg.no_separated, "skip the separated-set cross-check");
    }
    if (n == "box-dim" || n == "dimension-report" || n == "sweep") sub->add_option("--levels", cfg.levels, "fit scales");
    if (n == "sweep") {
      sub->add_option("--moduli", cfg.moduli, "descending twist moduli in (0, 1]");
      sub->add_flag("--with-box", cfg.with_box, "also run box counting per member");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  Runner runner(cfg);
  try {
    const auto files = runner.run();
    std::cout << runner.summary();
    for (const auto& f : files) std::cout << (f == files.front() ? " -> " : ", ") << f;
    std::cout << "\n";
    return runner.selftest_passed() ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.detail() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error in stage " << cfg.subcommand << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace henon::cli
