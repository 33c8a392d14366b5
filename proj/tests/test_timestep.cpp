#include <doctest.h>

#include <cmath>
#include <random>

#include "fluidpass/suites.hpp"
#include "fluidpass/timestep.hpp"
#include "oracles.hpp"

using namespace fluidpass;

namespace {
/// 1x1 operator dk/dt = lambda k, for scalar integrator checks.
SpatialOperator scalar_operator(double lambda) {
  SpatialOperator op;
  op.n = 1;
  op.states = 1;
  op.matrix.resize(1, 1);
  op.matrix.insert(0, 0) = lambda;
  op.matrix.makeCompressed();
  return op;
}
}  // namespace

TEST_CASE("rk4 with a zero operator is the identity") {
  const SpatialOperator op = scalar_operator(0.0);
  Eigen::VectorXd k(1);
  k << 0.7;
  CHECK(rk4_step(op, k, 0.5)[0] == 0.7);
}

TEST_CASE("rk4 matches the exponential to fifth order on the scalar decay") {
  auto f = [](const Eigen::VectorXd& k) -> Eigen::VectorXd { return -k; };
  Eigen::VectorXd k(1);
  k << 1.0;
  const double got = rk4_step_with(f, k, 0.1)[0];
  CHECK(got == doctest::Approx(0.90483750).epsilon(1e-8));
  CHECK(std::abs(got - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("one rk4 step tracks the dense exponential") {
  const FluidModel m = suites::example1();
  const SpaceGrid g = make_space_grid(m, 1.0, GridKind::vertex);
  const SpatialOperator op = assemble(m, g);
  const double dt = 0.01;
  const Eigen::VectorXd k0 = initial_field(m, g);
  const Eigen::VectorXd stepped = rk4_step(op, k0, dt);
  const Eigen::VectorXd exact = expm_reference(op, k0, dt);
  CHECK((stepped - exact).cwiseAbs().maxCoeff() <= 1e-6 * dt);
}

TEST_CASE("rk3b with a zero RHS is the identity") {
  auto f = [](const Eigen::VectorXd& k) { return Eigen::VectorXd::Zero(k.size()).eval(); };
  Eigen::VectorXd k(1);
  k << 0.3;
  CHECK(rk3b_step_with(f, k, 0.5)[0] == 0.3);
}

TEST_CASE("rk3b matches the exponential to fourth order on the scalar decay") {
  auto f = [](const Eigen::VectorXd& k) -> Eigen::VectorXd { return -k; };
  Eigen::VectorXd k(1);
  k << 1.0;
  const double got = rk3b_step_with(f, k, 0.1)[0];
  CHECK(std::abs(got - std::exp(-0.1)) < 1e-5);
}

TEST_CASE("bdf2 with a zero operator is constant") {
  const SpatialOperator op = scalar_operator(0.0);
  const Trajectory traj = bdf2_advance(op, Eigen::VectorXd::Constant(1, 0.4), 0.1, 10);
  for (const auto& snap : traj.snapshots) CHECK(snap[0] == doctest::Approx(0.4));
}

TEST_CASE("bdf2 decays monotonically on a stiff scalar") {
  const SpatialOperator op = scalar_operator(-1000.0);
  const Trajectory traj = bdf2_advance(op, Eigen::VectorXd::Ones(1), 0.1, 50);
  double prev = 1.0;
  for (size_t i = 1; i < traj.snapshots.size(); ++i) {
    const double v = std::abs(traj.snapshots[i][0]);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("bdf2 stays bounded for random stable systems at any step size") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int dim = 6;
    Eigen::MatrixXd mrand(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) mrand(i, j) = nrm(gen);
    const Eigen::MatrixXd stable = -mrand.transpose() * mrand - Eigen::MatrixXd::Identity(dim, dim);
    SpatialOperator op;
    op.n = dim;
    op.states = 1;
    op.matrix = stable.sparseView();
    for (double dt : {0.01, 1.0, 100.0}) {
      const Trajectory traj = bdf2_advance(op, Eigen::VectorXd::Ones(dim), dt, 200);
      for (const auto& snap : traj.snapshots)
        CHECK(snap.cwiseAbs().maxCoeff() <= 2.0);
    }
  }
}

TEST_CASE("bdf2 agrees with rk4 on a coarse two-state run") {
  const FluidModel m = suites::example1();
  const SpaceGrid g = make_space_grid(m, 0.5, GridKind::vertex);
  const SpatialOperator op = assemble(m, g);
  const std::vector<double> out = {20.0};
  const Trajectory rk = integrate(m, g, Scheme::upwind1_rk4, 20.0, out);
  const Trajectory bdf = integrate(m, g, Scheme::upwind1_bdf2, 20.0, out, 0.05);
  REQUIRE(rk.snapshots.size() == 1);
  REQUIRE(bdf.snapshots.size() == 1);
  CHECK((rk.snapshots[0] - bdf.snapshots[0]).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("integrator order on the scalar decay") {
  const std::vector<double> dts = {0.2, 0.1, 0.05};
  auto order_of = [&](auto advance) {
    std::vector<double> errs;
    for (double dt : dts) {
      const int steps = static_cast<int>(std::llround(1.0 / dt));
      const double err = std::abs(advance(dt, steps) - std::exp(-1.0));
      errs.push_back(err);
    }
    // least-squares slope of log(err) vs log(dt)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < dts.size(); ++i) {
      const double lx = std::log(dts[i]), ly = std::log(errs[i]);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double n = static_cast<double>(dts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };

  auto f = [](const Eigen::VectorXd& k) -> Eigen::VectorXd { return -k; };
  const double rk4_slope = order_of([&](double dt, int steps) {
    Eigen::VectorXd k = Eigen::VectorXd::Ones(1);
    for (int q = 0; q < steps; ++q) k = rk4_step_with(f, k, dt);
    return k[0];
  });
  CHECK(rk4_slope == doctest::Approx(4.0).epsilon(0.075));

  const double rk3_slope = order_of([&](double dt, int steps) {
    Eigen::VectorXd k = Eigen::VectorXd::Ones(1);
    for (int q = 0; q < steps; ++q) k = rk3b_step_with(f, k, dt);
    return k[0];
  });
  CHECK(rk3_slope == doctest::Approx(3.0).epsilon(0.1));

  const SpatialOperator op = scalar_operator(-1.0);
  const double bdf_slope = order_of([&](double dt, int steps) {
    const Trajectory traj = bdf2_advance(op, Eigen::VectorXd::Ones(1), dt, steps);
    return traj.snapshots.back()[0];
  });
  CHECK(bdf_slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("dense exponential reference") {
  const SpatialOperator zero = scalar_operator(0.0);
  Eigen::VectorXd k(1);
  k << 0.9;
  CHECK(expm_reference(zero, k, 3.0)[0] == doctest::Approx(0.9));

  const SpatialOperator decay = scalar_operator(-1.0);
  CHECK(expm_reference(decay, Eigen::VectorXd::Ones(1), 1.0)[0] ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  SpatialOperator big;
  big.matrix.resize(401, 401);
  CHECK_THROWS_AS(expm_reference(big, Eigen::VectorXd::Zero(401), 1.0), Error);
}

TEST_CASE("rk4 trajectory matches the dense exponential on a fine step") {
  const FluidModel m = suites::example1();
  const SpaceGrid g = make_space_grid(m, 1.0, GridKind::vertex);  // n = 11
  const SpatialOperator op = assemble(m, g);
  const Eigen::VectorXd k0 = initial_field(m, g);
  const double dt = 0.001;
  Eigen::VectorXd k = k0;
  for (int q = 0; q < 1000; ++q) k = rk4_step(op, k, dt);
  const Eigen::VectorXd exact = expm_reference(op, k0, 1.0);
  CHECK((k - exact).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("integrate with t_end = 0 returns the initial field") {
  const FluidModel m = suites::example1();
  const SpaceGrid g = make_space_grid(m, 0.5, GridKind::vertex);
  const Trajectory traj = integrate(m, g, Scheme::upwind1_rk4, 0.0, {0.0});
  REQUIRE(traj.snapshots.size() == 1);
  CHECK(traj.snapshots[0] == initial_field(m, g));
}

TEST_CASE("single draining state produces a step front at x/|r|") {
  Eigen::MatrixXd q(1, 1);
  q << 0.0;
  Eigen::VectorXd r(1);
  r << -2.0;
  const FluidModel m = validate(q, r, 10.0);
  const SpaceGrid g = make_space_grid(m, 0.05, GridKind::vertex);
  // exact solution: K(x, t) = 1 for x < 2t, 0 for x > 2t
  const Trajectory traj = integrate(m, g, Scheme::upwind1_rk4, 2.0, {2.0});
  const Eigen::VectorXd& k = traj.snapshots[0];
  for (int p = 0; p < g.n; ++p) {
    const double x = g.points[static_cast<size_t>(p)];
    // first-order upwind smears the front over O(sqrt(dx * t))
    if (x < 4.0 - 1.75) CHECK(k[p] >= 0.99);
    if (x > 4.0 + 1.75) CHECK(k[p] <= 0.01);
  }
}

TEST_CASE("recorded snapshots are componentwise nondecreasing in time") {
  const FluidModel m = suites::example2();
  const SpaceGrid g = make_space_grid(m, 0.5, GridKind::vertex);
  std::vector<double> out;
  for (int i = 0; i <= 20; ++i) out.push_back(i);
  const Trajectory traj = integrate(m, g, Scheme::upwind1_rk4, 20.0, out);
  for (size_t i = 1; i < traj.snapshots.size(); ++i)
    CHECK((traj.snapshots[i] - traj.snapshots[i - 1]).minCoeff() >= -1e-8);
}

TEST_CASE("integrate rejects non-PDE schemes") {
  const FluidModel m = suites::example1();
  const SpaceGrid g = make_space_grid(m, 0.5, GridKind::vertex);
  CHECK_THROWS_AS(integrate(m, g, Scheme::mc, 1.0, {1.0}), Error);
}
