#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fluidpass/grid.hpp"
#include "fluidpass/model.hpp"

namespace fluidpass {

/// Koren limiter; third-order accurate in smooth regions and inside the
/// Sweby TVD region with cap 2.
inline double koren_limiter(double f) {
  return std::max(0.0, std::min({2.0 * f, (1.0 + 2.0 * f) / 3.0, 2.0}));
}

/// Sentinel for degenerate gradient ratios; the limiter maps it to 0.
inline constexpr double kFlatRatio = -std::numeric_limits<double>::infinity();

/// Ratio of consecutive solution gradients. Zero (or nearly-zero) upwind
/// gradients collapse to the sentinel, which downstream means phi = 0,
/// i.e. a local first-order fallback.
inline double limited_ratio(double num, double den) {
  constexpr double theta = 1e-14;
  constexpr double tiny = std::numeric_limits<double>::min();
  if (std::abs(den) <= theta * (std::abs(num) + std::abs(den) + tiny))
    return kFlatRatio;
  return num / den;
}

/// Nonlinear flux-limited RHS on a cell-centered grid: K -> A(K) K.
///
/// Face layout per state: flux[i] sits at x = i*dx for i = 0..n, so flux[0]
/// is the x=0 face and flux[n] the bmax face. Draining states take the
/// Dirichlet value K(0,t)=1 as the upstream ghost at the two leftmost faces;
/// filling states evolve their last cell by the pure coupling ODE.
class LimitedRhs {
public:
  LimitedRhs(FluidModel model, SpaceGrid grid, bool use_limiter = true)
      : model_(std::move(model)), grid_(std::move(grid)), use_limiter_(use_limiter) {
    if (grid_.kind != GridKind::cell_centered)
      fail(ErrorCode::WrongGridKind, "flux-limited scheme needs a cell-centered grid");
  }

  const FluidModel& model() const { return model_; }
  const SpaceGrid& grid() const { return grid_; }

  /// Fills one state's n+1 face fluxes.
  void face_fluxes(const Eigen::VectorXd& field, int state,
                   Eigen::VectorXd& flux) const {
    const int n = grid_.n;
    if (field.size() != static_cast<Eigen::Index>(n) * model_.size())
      fail(ErrorCode::DimensionMismatch, "field size mismatch");
    flux.resize(n + 1);
    const double r = model_.rates[state];
    if (r == 0.0) {
      flux.setZero();
      return;
    }
    const auto k = field.segment(static_cast<Eigen::Index>(state) * n, n);
    if (!use_limiter_) {
      // pure first-order upwind at every face
      if (r < 0.0) {
        flux[0] = r;
        for (int i = 1; i <= n; ++i) flux[i] = r * k[i - 1];
      } else {
        for (int i = 0; i < n; ++i) flux[i] = r * k[i];
        flux[n] = 0.0;  // unused: last cell follows the coupling ODE
      }
      return;
    }
    if (r < 0.0) {
      flux[0] = r;  // Dirichlet inflow, K(0,t) = 1
      // face 1: limited with the boundary value as upstream ghost
      flux[1] = r * (k[0] + 0.5 * phi(limited_ratio(k[1] - k[0], k[0] - 1.0)) * (k[0] - 1.0));
      for (int i = 2; i < n; ++i) {
        const double up = k[i - 1] - k[i - 2];
        const double f = limited_ratio(k[i] - k[i - 1], up);
        flux[i] = r * (k[i - 1] + 0.5 * phi(f) * up);
      }
      flux[n] = r * (1.5 * k[n - 1] - 0.5 * k[n - 2]);  // outflow, no limiter
    } else {
      flux[0] = r * (1.5 * k[0] - 0.5 * k[1]);  // outflow, no limiter
      for (int i = 1; i < n - 1; ++i) {
        const double up = k[i] - k[i + 1];
        const double f = limited_ratio(k[i - 1] - k[i], up);
        flux[i] = r * (k[i] + 0.5 * phi(f) * up);
      }
      flux[n - 1] = r * 0.5 * (k[n - 1] + k[n - 2]);  // central
      flux[n] = 0.0;  // unused: last cell follows the coupling ODE
    }
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& field) const {
    const int n = grid_.n;
    const int s = model_.size();
    if (field.size() != static_cast<Eigen::Index>(n) * s)
      fail(ErrorCode::DimensionMismatch, "field size mismatch");
    Eigen::VectorXd out(field.size());
    Eigen::VectorXd flux;
    for (int a = 0; a < s; ++a) {
      face_fluxes(field, a, flux);
      auto d = out.segment(static_cast<Eigen::Index>(a) * n, n);
      const double inv_dx = 1.0 / grid_.dx;
      for (int p = 0; p < n; ++p) d[p] = (flux[p + 1] - flux[p]) * inv_dx;
      if (model_.rates[a] > 0.0) d[n - 1] = 0.0;  // pure ODE boundary cell
      for (int b = 0; b < s; ++b) {
        const double q = model_.generator(a, b);
        if (q != 0.0) d += q * field.segment(static_cast<Eigen::Index>(b) * n, n);
      }
    }
    return out;
  }

private:
  static double phi(double f) { return koren_limiter(f); }

  FluidModel model_;
  SpaceGrid grid_;
  bool use_limiter_;
};

}  // namespace fluidpass
