#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidpass/lst.hpp"
#include "fluidpass/model.hpp"
#include "fluidpass/montecarlo.hpp"
#include "fluidpass/suites.hpp"
#include "fluidpass/timestep.hpp"

namespace fluidpass {

struct RunConfig {
  FluidModel model;
  StationaryDistribution dist;
  Scheme scheme = Scheme::upwind1_rk4;
  std::vector<Scheme> compare_schemes;  // for compare(); baseline first
  double dx = 0.1;
  std::optional<double> dt;
  double t_end = 0.0;
  std::vector<double> output_times;
  std::vector<double> x_values;
  int initial_state = -1;  // canonical index; -1 = stationary start
  long mc_paths = 1000000;
  std::uint64_t mc_seed = 1;
};

namespace detail {

inline Scheme parse_scheme(const std::string& s) {
  if (s == "upwind1-rk4") return Scheme::upwind1_rk4;
  if (s == "upwind1-bdf2") return Scheme::upwind1_bdf2;
  if (s == "limiter3-rk3b") return Scheme::limiter3_rk3b;
  if (s == "lst-aw") return Scheme::lst_aw;
  if (s == "mc") return Scheme::mc;
  fail(ErrorCode::ConfigError, "unknown scheme '" + s + "'");
}

inline FluidModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("Q") || !j.contains("rates") || !j.contains("bmax"))
    fail(ErrorCode::ConfigError, "model needs Q, rates, bmax");
  const auto& qj = j.at("Q");
  const auto s = static_cast<Eigen::Index>(qj.size());
  Eigen::MatrixXd q(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& row = qj.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != s)
      fail(ErrorCode::ConfigError, "Q must be square");
    for (Eigen::Index k = 0; k < s; ++k)
      q(i, k) = row.at(static_cast<size_t>(k)).get<double>();
  }
  const auto& rj = j.at("rates");
  if (static_cast<Eigen::Index>(rj.size()) != s)
    fail(ErrorCode::ConfigError, "rates length must match Q");
  Eigen::VectorXd r(s);
  for (Eigen::Index i = 0; i < s; ++i) r[i] = rj.at(static_cast<size_t>(i)).get<double>();
  return validate(q, r, j.at("bmax").get<double>());
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad JSON in ") + path + ": " + e.what());
  }
  return j;
}

/// Output time grid: explicit list, or (t_start, t_stop, dt) segments, or a
/// single uniform spacing from 0 to t_end. t=0 is always included.
inline std::vector<double> output_grid(const nlohmann::json& j, double t_end) {
  std::vector<double> times;
  if (j.contains("output_times")) {
    times = j.at("output_times").get<std::vector<double>>();
  } else if (j.contains("output_segments")) {
    times.push_back(0.0);
    for (const auto& seg : j.at("output_segments")) {
      const double t0 = seg.at(0).get<double>();
      const double t1 = seg.at(1).get<double>();
      const double dt = seg.at(2).get<double>();
      if (!(dt > 0.0) || t1 < t0)
        fail(ErrorCode::ConfigError, "output segment needs t0 <= t1 and dt > 0");
      const int k = static_cast<int>(std::floor((t1 - t0) / dt + 1e-9));
      for (int i = 0; i <= k; ++i) times.push_back(t0 + i * dt);
    }
  } else {
    const double dt = j.value("output_dt", t_end > 0.0 ? t_end / 100.0 : 1.0);
    if (!(dt > 0.0)) fail(ErrorCode::ConfigError, "output_dt must be positive");
    const int k = static_cast<int>(std::floor(t_end / dt + 1e-9));
    for (int i = 0; i <= k; ++i) times.push_back(i * dt);
    if (times.empty() || times.back() < t_end - 1e-12) times.push_back(t_end);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.empty() || times.front() > 0.0) times.insert(times.begin(), 0.0);
  for (double t : times)
    if (t < 0.0 || t > t_end + 1e-12)
      fail(ErrorCode::ConfigError, "output times must lie in [0, t_end]");
  return times;
}

inline RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir) {
  RunConfig cfg;
  if (j.contains("model")) {
    cfg.model = model_from_json(j.at("model"));
  } else if (j.contains("model_file")) {
    std::filesystem::path p = j.at("model_file").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    cfg.model = model_from_json(load_json(p.string()));
  } else if (j.contains("suite")) {
    cfg.model = suites::by_name(j.at("suite").get<std::string>(),
                                j.value("scale", 1.0));
  } else {
    fail(ErrorCode::ConfigError, "config needs model, model_file, or suite");
  }
  cfg.dist = stationary(cfg.model);

  if (j.contains("scheme")) cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (j.contains("schemes"))
    for (const auto& s : j.at("schemes"))
      cfg.compare_schemes.push_back(parse_scheme(s.get<std::string>()));

  cfg.dx = j.value("dx", 0.1);
  if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
  cfg.t_end = j.value("t_end", 0.0);
  if (cfg.t_end < 0.0) fail(ErrorCode::ConfigError, "t_end must be >= 0");
  cfg.output_times = output_grid(j, cfg.t_end);

  if (j.contains("x")) {
    if (j.at("x").is_array())
      cfg.x_values = j.at("x").get<std::vector<double>>();
    else
      cfg.x_values = {j.at("x").get<double>()};
  }
  if (cfg.x_values.empty()) fail(ErrorCode::ConfigError, "config needs x");
  for (double x : cfg.x_values)
    if (x < 0.0 || x > cfg.model.bmax)
      fail(ErrorCode::ConfigError, "x must lie in [0, bmax]");

  if (j.contains("initial_state") && !j.at("initial_state").is_string()) {
    const int orig = j.at("initial_state").get<int>();
    if (orig < 0 || orig >= cfg.model.size())
      fail(ErrorCode::ConfigError, "initial_state out of range");
    for (int c = 0; c < cfg.model.size(); ++c)
      if (cfg.model.to_original[static_cast<size_t>(c)] == orig) cfg.initial_state = c;
  }
  cfg.mc_paths = j.value("paths", 1000000L);
  cfg.mc_seed = j.value("seed", std::uint64_t{1});
  if (cfg.mc_paths < 1) fail(ErrorCode::ConfigError, "paths must be >= 1");
  return cfg;
}

/// Linear interpolation of one state's values at level x, clamped to the
/// grid's span.
inline double interp_state(const Eigen::VectorXd& field, const SpaceGrid& grid,
                           int state, double x) {
  const int n = grid.n;
  const auto k = field.segment(static_cast<Eigen::Index>(state) * n, n);
  if (x <= grid.points.front()) return k[0];
  if (x >= grid.points.back()) return k[n - 1];
  const double pos = (x - grid.points[0]) / grid.dx;
  int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 2);
  const double frac = pos - lo;
  return (1.0 - frac) * k[lo] + frac * k[lo + 1];
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

struct RunResult {
  double x = 0.0;
  PassageCdf cdf;                          // stationary-start J(x, .)
  std::vector<std::vector<double>> state_cdfs;  // fixed-state runs: per canonical state
  double wall_seconds = 0.0;
  double lst_condition = 0.0;
};

/// Computes the passage CDF for one x with one scheme. Stationary start
/// yields J(x, .); a fixed initial state yields the per-state curves for the
/// PDE/LST paths and that state's curve for Monte Carlo.
inline RunResult run_one(const RunConfig& cfg, Scheme scheme, double x) {
  if (cfg.model.draining_count() == 0)
    fail(ErrorCode::NoDrainingState, "no state drains the buffer; passage never occurs");

  RunResult res;
  res.x = x;
  const auto t0 = std::chrono::steady_clock::now();
  const int s = cfg.model.size();

  switch (scheme) {
    case Scheme::mc: {
      SimConfig sim;
      sim.paths = cfg.mc_paths;
      sim.seed = cfg.mc_seed;
      sim.t_end = std::max(cfg.t_end, 1e-300);
      sim.x = x;
      sim.initial_state = cfg.initial_state;
      if (cfg.t_end == 0.0) {
        res.cdf.times = cfg.output_times;
        res.cdf.values.assign(cfg.output_times.size(), x > 0.0 ? 0.0 : 1.0);
      } else {
        const auto samples = sample_passages(cfg.model, cfg.dist, sim);
        res.cdf = empirical_cdf(samples, cfg.output_times);
      }
      res.cdf.jump_times = discontinuity_times(cfg.model, x);
      break;
    }
    case Scheme::lst_aw: {
      if (cfg.initial_state >= 0) {
        res.cdf.times = cfg.output_times;
        res.cdf.values.assign(cfg.output_times.size(), 0.0);
        res.state_cdfs.assign(static_cast<size_t>(s),
                              std::vector<double>(cfg.output_times.size(), 0.0));
        double worst = 0.0;
        parallel_for(static_cast<long>(cfg.output_times.size()), [&](long i) {
          const double t = cfg.output_times[static_cast<size_t>(i)];
          if (t <= 0.0) return;
          for (int a = 0; a < s; ++a) {
            double local = 0.0;
            auto transform = [&](Complex w) {
              const LstSystem sys = boundary_system(cfg.model, w);
              local = std::max(local, sys.condition);
              return ktilde(cfg.model, sys, x)[a] / w;
            };
            res.state_cdfs[static_cast<size_t>(a)][static_cast<size_t>(i)] =
                invert_aw(transform, t);
            worst = std::max(worst, local);
          }
        });
        res.lst_condition = worst;
        res.cdf.jump_times = discontinuity_times(cfg.model, x);
      } else {
        res.cdf = passage_cdf_lst(cfg.model, cfg.dist, x, cfg.output_times, {},
                                  &res.lst_condition);
      }
      break;
    }
    default: {  // PDE schemes
      const GridKind kind = scheme == Scheme::limiter3_rk3b ? GridKind::cell_centered
                                                            : GridKind::vertex;
      const SpaceGrid grid = make_space_grid(cfg.model, cfg.dx, kind);
      const Trajectory traj =
          integrate(cfg.model, grid, scheme, cfg.t_end, cfg.output_times, cfg.dt);
      res.cdf.times = traj.times;
      res.cdf.jump_times = discontinuity_times(cfg.model, x);
      if (cfg.initial_state >= 0)
        res.state_cdfs.assign(static_cast<size_t>(s),
                              std::vector<double>(traj.times.size(), 0.0));
      for (size_t i = 0; i < traj.snapshots.size(); ++i) {
        double j = 0.0;
        for (int a = 0; a < s; ++a) {
          const double ka = detail::interp_state(traj.snapshots[i], grid, a, x);
          j += cfg.dist.pi[a] * ka;
          if (cfg.initial_state >= 0) res.state_cdfs[static_cast<size_t>(a)][i] = ka;
        }
        res.cdf.values.push_back(j);
      }
      break;
    }
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

namespace detail {

inline std::string x_suffix(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return std::string("_x") + buf;
}

inline void write_csv(const std::filesystem::path& path, const RunConfig& cfg,
                      const RunResult& res) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  const int s = cfg.model.size();
  if (cfg.initial_state >= 0 && !res.state_cdfs.empty()) {
    // columns in the user's original state order
    std::vector<int> orig_to_canon(static_cast<size_t>(s));
    for (int c = 0; c < s; ++c)
      orig_to_canon[static_cast<size_t>(cfg.model.to_original[static_cast<size_t>(c)])] = c;
    out << "t";
    for (int o = 0; o < s; ++o) out << ",K_" << (o + 1);
    out << "\n";
    for (size_t i = 0; i < res.cdf.times.size(); ++i) {
      out << fmt_double(res.cdf.times[i]);
      for (int o = 0; o < s; ++o)
        out << ","
            << fmt_double(res.state_cdfs[static_cast<size_t>(
                   orig_to_canon[static_cast<size_t>(o)])][i]);
      out << "\n";
    }
  } else if (cfg.initial_state >= 0) {  // MC fixed-state: one column
    out << "t,K_" << (cfg.model.to_original[static_cast<size_t>(cfg.initial_state)] + 1)
        << "\n";
    for (size_t i = 0; i < res.cdf.times.size(); ++i)
      out << fmt_double(res.cdf.times[i]) << "," << fmt_double(res.cdf.values[i]) << "\n";
  } else {
    out << "t,J\n";
    for (size_t i = 0; i < res.cdf.times.size(); ++i)
      out << fmt_double(res.cdf.times[i]) << "," << fmt_double(res.cdf.values[i]) << "\n";
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

inline void write_sidecar(const std::filesystem::path& path, const RunConfig& cfg,
                          Scheme scheme, const RunResult& res) {
  nlohmann::json meta;
  meta["scheme"] = scheme_name(scheme);
  meta["x"] = res.x;
  meta["t_end"] = cfg.t_end;
  meta["wall_seconds"] = res.wall_seconds;
  if (scheme == Scheme::upwind1_rk4 || scheme == Scheme::upwind1_bdf2 ||
      scheme == Scheme::limiter3_rk3b) {
    meta["dx"] = cfg.dx;
    if (cfg.dt) meta["dt"] = *cfg.dt;
  }
  if (scheme == Scheme::lst_aw) meta["lst_condition"] = res.lst_condition;
  if (scheme == Scheme::mc) {
    meta["paths"] = cfg.mc_paths;
    meta["seed"] = cfg.mc_seed;
    meta["censored_fraction"] = res.cdf.censored_fraction;
    meta["dkw_halfwidth_99"] = res.cdf.dkw_halfwidth;
  }
  meta["jump_times"] = res.cdf.jump_times;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << meta.dump(2) << "\n";
}

}  // namespace detail

/// `run` entry point: one scheme, one or more x values, CSV + JSON sidecar
/// per x in the output directory.
inline std::vector<std::filesystem::path> run(const RunConfig& cfg,
                                              const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + out_dir.string());
  std::vector<std::filesystem::path> written;
  for (double x : cfg.x_values) {
    const RunResult res = run_one(cfg, cfg.scheme, x);
    const std::string stem =
        std::string(scheme_name(cfg.scheme)) + detail::x_suffix(x);
    const auto csv = out_dir / (stem + ".csv");
    detail::write_csv(csv, cfg, res);
    detail::write_sidecar(out_dir / (stem + ".json"), cfg, cfg.scheme, res);
    written.push_back(csv);
  }
  return written;
}

struct CompareRow {
  Scheme scheme;
  std::vector<double> errors;       // signed, vs baseline, per output time
  double sup_error = 0.0;           // excluding discontinuity windows
  double wall_seconds = 0.0;
  bool lst_failed = false;
  std::string lst_diagnostic;
};

struct CompareReport {
  double x = 0.0;
  Scheme baseline;
  std::vector<double> times;
  std::vector<double> baseline_values;
  std::vector<CompareRow> rows;
  double window = 0.0;
  std::vector<double> jump_times;
};

/// `compare` entry point: runs every requested scheme on the shared output
/// grid and reports signed errors against the baseline (first scheme listed,
/// conventionally mc). The sup norm excludes windows around known jumps.
inline CompareReport compare(const RunConfig& cfg, double x) {
  if (cfg.compare_schemes.size() < 2)
    fail(ErrorCode::ConfigError, "compare needs at least two schemes");

  CompareReport rep;
  rep.x = x;
  rep.baseline = cfg.compare_schemes.front();
  rep.times = cfg.output_times;
  rep.jump_times = discontinuity_times(cfg.model, x);

  const RunResult base = run_one(cfg, rep.baseline, x);
  rep.baseline_values = base.cdf.values;

  double max_inv_rate = 0.0;
  for (int i = 0; i < cfg.model.size(); ++i)
    if (cfg.model.rates[i] != 0.0)
      max_inv_rate = std::max(max_inv_rate, 1.0 / std::abs(cfg.model.rates[i]));
  double base_res = 0.0;
  for (size_t i = 1; i < rep.times.size(); ++i)
    base_res = std::max(base_res, rep.times[i] - rep.times[i - 1]);
  rep.window = 5.0 * std::max(cfg.dx * max_inv_rate, base_res);

  for (size_t k = 1; k < cfg.compare_schemes.size(); ++k) {
    CompareRow row;
    row.scheme = cfg.compare_schemes[k];
    try {
      const RunResult res = run_one(cfg, row.scheme, x);
      row.wall_seconds = res.wall_seconds;
      for (size_t i = 0; i < rep.times.size(); ++i) {
        const double e = res.cdf.values[i] - rep.baseline_values[i];
        row.errors.push_back(e);
        bool near_jump = false;
        for (double tj : rep.jump_times)
          if (std::abs(rep.times[i] - tj) <= rep.window) near_jump = true;
        if (!near_jump) row.sup_error = std::max(row.sup_error, std::abs(e));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IllConditioned || row.scheme != Scheme::lst_aw)
        throw;
      row.lst_failed = true;
      row.lst_diagnostic = e.what();
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

struct BenchRow {
  Scheme scheme;
  double wall_seconds = 0.0;
  double dx = 0.0;
  bool failed = false;
  std::string note;
};

/// `bench` entry point: times every scheme on a named suite with suite-sized
/// default parameters. Absolute numbers are informational; ordering is what
/// the acceptance checks assert.
inline std::vector<BenchRow> bench(const std::string& suite, double scale) {
  RunConfig cfg;
  cfg.model = suites::by_name(suite, scale);
  cfg.dist = stationary(cfg.model);
  const bool big = suite == "example3" || suite == "example4";
  cfg.dx = big ? 0.5 : 0.1;
  cfg.t_end = big ? 10.0 : 20.0;
  cfg.x_values = {suite == "example2" ? 6.0 : 5.0};
  cfg.mc_paths = 100000;
  const int k = static_cast<int>(cfg.t_end / 0.5);
  for (int i = 0; i <= k; ++i) cfg.output_times.push_back(i * 0.5);

  std::vector<BenchRow> rows;
  for (Scheme s : {Scheme::upwind1_rk4, Scheme::limiter3_rk3b, Scheme::upwind1_bdf2,
                   Scheme::lst_aw, Scheme::mc}) {
    BenchRow row;
    row.scheme = s;
    row.dx = cfg.dx;
    RunConfig local = cfg;
    if (s == Scheme::upwind1_bdf2)
      local.dt = cfl_dt(cfg.model, make_space_grid(cfg.model, cfg.dx, GridKind::vertex),
                        TimeScheme::rk4);
    try {
      const RunResult res = run_one(local, s, cfg.x_values[0]);
      row.wall_seconds = res.wall_seconds;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IllConditioned || s != Scheme::lst_aw) throw;
      row.failed = true;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fluidpass
