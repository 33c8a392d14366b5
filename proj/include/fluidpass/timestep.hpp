#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fluidpass/grid.hpp"
#include "fluidpass/limiter.hpp"
#include "fluidpass/upwind.hpp"

namespace fluidpass {

enum class Scheme { upwind1_rk4, upwind1_bdf2, limiter3_rk3b, lst_aw, mc };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::upwind1_rk4: return "upwind1-rk4";
    case Scheme::upwind1_bdf2: return "upwind1-bdf2";
    case Scheme::limiter3_rk3b: return "limiter3-rk3b";
    case Scheme::lst_aw: return "lst-aw";
    case Scheme::mc: return "mc";
  }
  return "?";
}

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> snapshots;
  Scheme scheme = Scheme::upwind1_rk4;
};

namespace detail {
inline void check_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) fail(ErrorCode::NonFinite, "non-finite value in time step");
}
}  // namespace detail

/// Classical four-stage Runge-Kutta step for any RHS callable.
template <class Rhs>
Eigen::VectorXd rk4_step_with(const Rhs& f, const Eigen::VectorXd& k, double dt) {
  const Eigen::VectorXd p1 = f(k);
  const Eigen::VectorXd p2 = f(k + (dt / 2.0) * p1);
  const Eigen::VectorXd p3 = f(k + (dt / 2.0) * p2);
  const Eigen::VectorXd p4 = f(k + dt * p3);
  Eigen::VectorXd out = k + (dt / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
  detail::check_finite(out);
  return out;
}

inline Eigen::VectorXd rk4_step(const SpatialOperator& op,
                                const Eigen::VectorXd& field, double dt) {
  return rk4_step_with([&](const Eigen::VectorXd& v) { return apply(op, v); },
                       field, dt);
}

/// Three-stage RK3b step; the RHS is re-evaluated at every stage since the
/// limited operator depends on the field.
template <class Rhs>
Eigen::VectorXd rk3b_step_with(const Rhs& f, const Eigen::VectorXd& k, double dt) {
  const Eigen::VectorXd p1 = f(k);
  const Eigen::VectorXd p2 = f(k + dt * p1);
  const Eigen::VectorXd p3 = f(k + (dt / 4.0) * (p1 + p2));
  Eigen::VectorXd out = k + (dt / 6.0) * (p1 + p2 + 4.0 * p3);
  detail::check_finite(out);
  return out;
}

inline Eigen::VectorXd rk3b_step(const LimitedRhs& rhs,
                                 const Eigen::VectorXd& field, double dt) {
  return rk3b_step_with([&](const Eigen::VectorXd& v) { return rhs(v); }, field, dt);
}

/// Implicit BDF2 with a sparse LU factored once and reused. The second value
/// is bootstrapped with one implicit-Euler step.
class Bdf2Stepper {
public:
  Bdf2Stepper(const SpatialOperator& op, double dt) : dt_(dt) {
    const Eigen::Index dim = op.dimension();
    Eigen::SparseMatrix<double> identity(dim, dim);
    identity.setIdentity();
    Eigen::SparseMatrix<double> euler = identity - dt * Eigen::SparseMatrix<double>(op.matrix);
    euler_lu_.compute(euler);
    if (euler_lu_.info() != Eigen::Success)
      fail(ErrorCode::SingularSystem, "implicit-Euler factorization failed");
    Eigen::SparseMatrix<double> bdf2 =
        identity - (2.0 / 3.0) * dt * Eigen::SparseMatrix<double>(op.matrix);
    bdf2_lu_.compute(bdf2);
    if (bdf2_lu_.info() != Eigen::Success)
      fail(ErrorCode::SingularSystem, "BDF2 factorization failed");
  }

  /// Advances one step, updating (prev, curr) in place.
  void step(Eigen::VectorXd& prev, Eigen::VectorXd& curr) {
    Eigen::VectorXd next;
    if (!have_two_) {
      next = euler_lu_.solve(curr);
      have_two_ = true;
    } else {
      next = bdf2_lu_.solve((4.0 / 3.0) * curr - (1.0 / 3.0) * prev);
    }
    detail::check_finite(next);
    prev = std::move(curr);
    curr = std::move(next);
  }

  double dt() const { return dt_; }

private:
  double dt_;
  bool have_two_ = false;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> euler_lu_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> bdf2_lu_;
};

inline Trajectory bdf2_advance(const SpatialOperator& op,
                               const Eigen::VectorXd& field0, double dt, int steps) {
  Trajectory traj;
  traj.scheme = Scheme::upwind1_bdf2;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(field0);
  Bdf2Stepper stepper(op, dt);
  Eigen::VectorXd prev = field0, curr = field0;
  for (int q = 1; q <= steps; ++q) {
    stepper.step(prev, curr);
    traj.times.push_back(q * dt);
    traj.snapshots.push_back(curr);
  }
  return traj;
}

/// Dense matrix exponential reference, K(t) = exp(A t) K(0). Small instances
/// only.
inline Eigen::VectorXd expm_reference(const SpatialOperator& op,
                                      const Eigen::VectorXd& field0, double t) {
  if (op.dimension() > 400)
    fail(ErrorCode::TooLarge, "dense exponential limited to dimension 400");
  if (field0.size() != op.dimension())
    fail(ErrorCode::DimensionMismatch, "field/operator size mismatch");
  Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix) * t;
  return dense.exp() * field0;
}

/// Runs a scheme from the zero-time field to t_end, recording snapshots at
/// the requested output times (nearest step). dt defaults to the scheme's
/// stability bound; BDF2 requires an explicit dt.
inline Trajectory integrate(const FluidModel& model, const SpaceGrid& grid,
                            Scheme scheme, double t_end,
                            const std::vector<double>& output_times,
                            std::optional<double> dt_request = std::nullopt) {
  Trajectory traj;
  traj.scheme = scheme;

  std::function<void(Eigen::VectorXd&)> step_fn;
  double dt = 0.0;
  Eigen::VectorXd field = initial_field(model, grid);

  SpatialOperator op;
  std::optional<Bdf2Stepper> bdf2;
  std::optional<LimitedRhs> limited;
  Eigen::VectorXd bdf2_prev;

  switch (scheme) {
    case Scheme::upwind1_rk4:
      op = assemble(model, grid);
      dt = dt_request.value_or(cfl_dt(model, grid, TimeScheme::rk4));
      step_fn = [&op, &dt](Eigen::VectorXd& k) { k = rk4_step(op, k, dt); };
      break;
    case Scheme::limiter3_rk3b:
      limited.emplace(model, grid);
      dt = dt_request.value_or(cfl_dt(model, grid, TimeScheme::rk3b));
      step_fn = [&limited, &dt](Eigen::VectorXd& k) { k = rk3b_step(*limited, k, dt); };
      break;
    case Scheme::upwind1_bdf2: {
      op = assemble(model, grid);
      dt = cfl_dt(model, grid, TimeScheme::bdf2, dt_request);
      break;  // stepper built after dt is snapped below
    }
    default:
      fail(ErrorCode::ConfigError, "integrate() handles PDE schemes only");
  }

  const TimeGrid tg = make_time_grid(t_end, dt);
  dt = tg.dt;
  if (scheme == Scheme::upwind1_bdf2) {
    bdf2.emplace(op, dt);
    bdf2_prev = field;
    step_fn = [&bdf2, &bdf2_prev](Eigen::VectorXd& k) { bdf2->step(bdf2_prev, k); };
  }

  // map output times to step indices (nearest step, clamped)
  std::vector<std::pair<int, double>> marks;
  for (double t : output_times) {
    int q = static_cast<int>(std::llround(t / dt));
    q = std::clamp(q, 0, tg.m);
    marks.emplace_back(q, t);
  }
  std::sort(marks.begin(), marks.end());

  size_t next_mark = 0;
  auto record = [&](int q) {
    while (next_mark < marks.size() && marks[next_mark].first == q) {
      traj.times.push_back(marks[next_mark].second);
      traj.snapshots.push_back(field);
      ++next_mark;
    }
  };
  record(0);
  for (int q = 1; q <= tg.m; ++q) {
    step_fn(field);
    if (!field.allFinite())
      fail(ErrorCode::NonFinite,
           "field overflowed at step " + std::to_string(q) +
               " (dt = " + std::to_string(dt) +
               " likely violates the stability bound)");
    record(q);
  }
  return traj;
}

}  // namespace fluidpass
