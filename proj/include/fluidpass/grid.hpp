#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "fluidpass/model.hpp"

namespace fluidpass {

enum class GridKind { vertex, cell_centered };

/// Uniform spatial grid on [0, bmax]. Vertex grids put points on both
/// endpoints (first-order scheme); cell-centered grids put points at
/// (p - 1/2) dx with faces on the endpoints (flux-limited scheme).
struct SpaceGrid {
  GridKind kind = GridKind::vertex;
  int n = 0;
  double dx = 0.0;
  std::vector<double> points;
};

struct TimeGrid {
  int m = 0;        // number of steps
  double dt = 0.0;
  double t_end = 0.0;
};

enum class TimeScheme { rk4, rk3b, bdf2 };

/// Chooses the point count so dx <= dx_request with the endpoints landing
/// exactly on 0 and bmax (dx shrinks to fit; the domain is never padded).
inline SpaceGrid make_space_grid(const FluidModel& model, double dx_request,
                                 GridKind kind) {
  if (!(dx_request > 0.0) || dx_request > model.bmax)
    fail(ErrorCode::DegenerateGrid, "dx_request must lie in (0, bmax]");
  SpaceGrid g;
  g.kind = kind;
  const double cells = std::ceil(model.bmax / dx_request - 1e-9);
  if (kind == GridKind::vertex) {
    g.n = static_cast<int>(cells) + 1;
    if (g.n < 3) fail(ErrorCode::DegenerateGrid, "vertex grid needs n >= 3");
    g.dx = model.bmax / (g.n - 1);
    g.points.resize(static_cast<size_t>(g.n));
    for (int p = 0; p < g.n; ++p) g.points[static_cast<size_t>(p)] = p * g.dx;
    g.points.back() = model.bmax;  // exact endpoint
  } else {
    g.n = static_cast<int>(cells);
    if (g.n < 4) fail(ErrorCode::DegenerateGrid, "cell-centered grid needs n >= 4");
    g.dx = model.bmax / g.n;
    g.points.resize(static_cast<size_t>(g.n));
    for (int p = 0; p < g.n; ++p) g.points[static_cast<size_t>(p)] = (p + 0.5) * g.dx;
  }
  return g;
}

/// Advection-stable step: min |dx/r| over nonzero rates for RK4, a quarter of
/// that for RK3b (positivity safety factor for the nonlinear limited scheme).
/// BDF2 has no step restriction; the caller's request passes through.
inline double cfl_dt(const FluidModel& model, const SpaceGrid& grid,
                     TimeScheme scheme,
                     std::optional<double> requested = std::nullopt) {
  if (scheme == TimeScheme::bdf2) {
    if (!requested || !(*requested > 0.0))
      fail(ErrorCode::ConfigError, "bdf2 needs an explicit dt");
    return *requested;
  }
  double best = 0.0;
  bool any = false;
  for (int i = 0; i < model.size(); ++i) {
    const double r = model.rates[i];
    if (r == 0.0) continue;
    const double dt = grid.dx / std::abs(r);
    best = any ? std::min(best, dt) : dt;
    any = true;
  }
  if (!any) fail(ErrorCode::AllRatesZero, "all rates are zero");
  return scheme == TimeScheme::rk3b ? 0.25 * best : best;
}

/// Snaps t_end to a whole number of steps (dt only shrinks, so an advective
/// stability bound on the requested dt still holds).
inline TimeGrid make_time_grid(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0))
    fail(ErrorCode::ConfigError, "need dt > 0 and t_end >= 0");
  TimeGrid g;
  g.t_end = t_end;
  if (t_end == 0.0) {
    g.m = 0;
    g.dt = dt;
    return g;
  }
  g.m = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  g.dt = t_end / g.m;
  return g;
}

}  // namespace fluidpass
