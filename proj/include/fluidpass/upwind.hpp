#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "fluidpass/grid.hpp"
#include "fluidpass/model.hpp"

namespace fluidpass {

/// Semi-discrete first-order upwind operator: dK/dt = A K, with K laid out
/// state-major, K = (K_1^1..K_1^n, ..., K_S^1..K_S^n).
///
/// Boundary rows:
///  - r <= 0, p = 1: identically zero (Dirichlet K(0,t) = 1 held constant,
///    written into the initial field).
///  - r > 0, p = 1: coupling terms only (characteristics leave the boundary).
///  - r > 0, p = n: coupling terms only, i.e. dK(bmax,t)/dt = sum_b q_ab K_b.
struct SpatialOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  int n = 0;
  int states = 0;

  Eigen::Index dimension() const { return matrix.rows(); }
};

inline SpatialOperator assemble(const FluidModel& model, const SpaceGrid& grid) {
  if (grid.kind != GridKind::vertex)
    fail(ErrorCode::WrongGridKind, "first-order upwind needs a vertex grid");
  const int n = grid.n;
  const int s = model.size();
  const double dx = grid.dx;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * static_cast<size_t>(s) * (2 + static_cast<size_t>(s)));

  for (int a = 0; a < s; ++a) {
    const double r = model.rates[a];
    const int base = a * n;
    int couple_begin = 0, couple_end = n;  // rows carrying sum_b q_ab K_b^p
    if (r <= 0.0) {
      couple_begin = 1;  // p = 1 is the Dirichlet row
      for (int p = 1; p < n; ++p) {
        trips.emplace_back(base + p, base + p, r / dx);
        trips.emplace_back(base + p, base + p - 1, -r / dx);
      }
    } else {
      for (int p = 1; p < n - 1; ++p) {
        trips.emplace_back(base + p, base + p + 1, r / dx);
        trips.emplace_back(base + p, base + p, -r / dx);
      }
    }
    for (int p = couple_begin; p < couple_end; ++p)
      for (int b = 0; b < s; ++b)
        if (model.generator(a, b) != 0.0)
          trips.emplace_back(base + p, b * n + p, model.generator(a, b));
  }

  SpatialOperator op;
  op.n = n;
  op.states = s;
  op.matrix.resize(n * s, n * s);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  return op;
}

/// K(x, 0): zero everywhere except K(0, 0) = 1 for draining states. On a
/// cell-centered grid every point has x > 0, so the field starts at zero and
/// the boundary value enters through the face flux.
inline Eigen::VectorXd initial_field(const FluidModel& model, const SpaceGrid& grid) {
  Eigen::VectorXd k = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n) * model.size());
  if (grid.kind == GridKind::vertex) {
    for (int a = 0; a < model.size(); ++a)
      if (model.rates[a] <= 0.0) k[static_cast<Eigen::Index>(a) * grid.n] = 1.0;
  }
  return k;
}

inline Eigen::VectorXd apply(const SpatialOperator& op, const Eigen::VectorXd& field) {
  if (field.size() != op.dimension())
    fail(ErrorCode::DimensionMismatch, "field/operator size mismatch");
  return op.matrix * field;
}

}  // namespace fluidpass
