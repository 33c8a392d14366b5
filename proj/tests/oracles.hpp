// Independent reference implementations used only by the tests. Each one is
// a deliberately naive, dense, or closed-form re-derivation of something the
// library computes by a different route.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "fluidpass/grid.hpp"
#include "fluidpass/limiter.hpp"
#include "fluidpass/model.hpp"

namespace oracles {

/// Dense first-order upwind operator assembled row by row from the
/// difference equations: draining rows use the left-sided difference
/// (r/dx)(K^p - K^{p-1}) with a frozen Dirichlet row at p=1; filling rows
/// use the right-sided difference with coupling-only rows at both ends.
inline Eigen::MatrixXd dense_upwind(const fluidpass::FluidModel& model,
                                    const fluidpass::SpaceGrid& grid) {
  const int n = grid.n;
  const int s = model.size();
  const double dx = grid.dx;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * s, n * s);
  for (int st = 0; st < s; ++st) {
    const double r = model.rates[st];
    for (int p = 0; p < n; ++p) {
      const int row = st * n + p;
      if (r <= 0.0) {
        if (p == 0) continue;  // held at the boundary value
        a(row, row) += r / dx;
        a(row, st * n + p - 1) += -r / dx;
      } else if (p >= 1 && p <= n - 2) {
        a(row, st * n + p + 1) += r / dx;
        a(row, row) += -r / dx;
      }
      const bool couples = r > 0.0 || p > 0;
      if (couples)
        for (int b = 0; b < s; ++b) a(row, b * n + p) += model.generator(st, b);
    }
  }
  return a;
}

/// First-order upwind RHS written directly on a cell-centered grid, as
/// pointwise differences (no flux bookkeeping): the target of the
/// limiter-off reduction.
inline Eigen::VectorXd first_order_cell_rhs(const fluidpass::FluidModel& model,
                                            const fluidpass::SpaceGrid& grid,
                                            const Eigen::VectorXd& field) {
  const int n = grid.n;
  const int s = model.size();
  const double dx = grid.dx;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * s);
  for (int st = 0; st < s; ++st) {
    const double r = model.rates[st];
    for (int p = 0; p < n; ++p) {
      const int row = st * n + p;
      if (r < 0.0) {
        const double left = p == 0 ? 1.0 : field[row - 1];
        out[row] += (r / dx) * (field[row] - left);
      } else if (r > 0.0 && p < n - 1) {
        out[row] += (r / dx) * (field[row + 1] - field[row]);
      }
      for (int b = 0; b < s; ++b)
        out[row] += model.generator(st, b) * field[b * n + p];
    }
  }
  return out;
}

/// Literal transcription of the limited face fluxes for one state on a
/// cell-centered grid, evaluated with scalar arithmetic and 1-based cell
/// indices K^1..K^n (faces at i*dx for i = 0..n).
inline Eigen::VectorXd limited_fluxes(const fluidpass::FluidModel& model,
                                      const fluidpass::SpaceGrid& grid,
                                      const Eigen::VectorXd& field, int state) {
  const int n = grid.n;
  const double r = model.rates[state];
  auto kk = [&](int p) { return field[state * n + (p - 1)]; };  // 1-based
  auto phi = [](double f) { return fluidpass::koren_limiter(f); };
  auto ratio = [](double num, double den) {
    return fluidpass::limited_ratio(num, den);
  };
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(n + 1);
  if (r == 0.0) return flux;
  if (r < 0.0) {
    flux[0] = r * 1.0;
    flux[1] = r * (kk(1) + 0.5 * phi(ratio(kk(2) - kk(1), kk(1) - 1.0)) * (kk(1) - 1.0));
    for (int p = 2; p <= n - 1; ++p)  // face p+1/2, upstream cell p
      flux[p] = r * (kk(p) + 0.5 * phi(ratio(kk(p + 1) - kk(p), kk(p) - kk(p - 1))) *
                                (kk(p) - kk(p - 1)));
    flux[n] = r * (1.5 * kk(n) - 0.5 * kk(n - 1));
  } else {
    flux[0] = r * (1.5 * kk(1) - 0.5 * kk(2));
    for (int p = 1; p <= n - 2; ++p)  // face p+1/2, upstream cell p+1
      flux[p] = r * (kk(p + 1) + 0.5 * phi(ratio(kk(p) - kk(p + 1), kk(p + 1) - kk(p + 2))) *
                                    (kk(p + 1) - kk(p + 2)));
    flux[n - 1] = r * 0.5 * (kk(n) + kk(n - 1));
    flux[n] = 0.0;
  }
  return flux;
}

/// RHS transcription built on the flux transcription above plus the
/// coupling terms, with the last cell of filling states as a pure ODE.
inline Eigen::VectorXd limited_rhs(const fluidpass::FluidModel& model,
                                   const fluidpass::SpaceGrid& grid,
                                   const Eigen::VectorXd& field) {
  const int n = grid.n;
  const int s = model.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * s);
  for (int st = 0; st < s; ++st) {
    const Eigen::VectorXd flux = limited_fluxes(model, grid, field, st);
    for (int p = 0; p < n; ++p)
      out[st * n + p] = (flux[p + 1] - flux[p]) / grid.dx;
    if (model.rates[st] > 0.0) out[st * n + n - 1] = 0.0;
    for (int p = 0; p < n; ++p)
      for (int b = 0; b < s; ++b)
        out[st * n + p] += model.generator(st, b) * field[b * n + p];
  }
  return out;
}

/// Closed-form transform of the stationary-start passage CDF for the
/// two-state test model (Q = [[-1,1],[1,-1]], r = (1,-2), bmax = 10).
inline std::complex<double> two_state_jtilde(double x, std::complex<double> w) {
  using C = std::complex<double>;
  const C rw = std::sqrt(9.0 * w * w + 18.0 * w + C(1.0));
  const C num = (w / 2.0 + 1.0) * std::exp(0.25 * x * (-rw + w + 1.0)) *
                ((rw - 3.0 * w - 1.0) * std::exp(0.5 * x * rw) +
                 std::exp(5.0 * rw) * (rw + 3.0 * w + 1.0));
  const C den = (w + 1.0) * (std::exp(5.0 * rw) + 1.0) * rw -
                (3.0 * w * w + 6.0 * w + 1.0) * (1.0 - std::exp(5.0 * rw));
  return num / den;
}

/// Random irreducible model with mixed rate signs, for property tests.
inline fluidpass::FluidModel random_model(std::mt19937_64& gen, int max_states = 4) {
  std::uniform_int_distribution<int> size_d(2, max_states);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> rate_d(-3.0, 3.0);
  const int s = size_d(gen);
  Eigen::MatrixXd q(s, s);
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j)
      if (j != i) {
        q(i, j) = u(gen);
        row += q(i, j);
      }
    q(i, i) = -row;
  }
  Eigen::VectorXd r(s);
  for (int i = 0; i < s; ++i) r[i] = rate_d(gen);
  r[s - 1] = -std::abs(r[s - 1]) - 0.1;  // keep at least one draining state
  return fluidpass::validate(q, r, 2.0 + 8.0 * u(gen));
}

}  // namespace oracles
