#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "fluidpass/model.hpp"
#include "fluidpass/montecarlo.hpp"

namespace fluidpass::suites {

/// Two-state chain, one filling and one draining state.
inline FluidModel example1() {
  Eigen::MatrixXd q(2, 2);
  q << -1.0, 1.0, 1.0, -1.0;
  Eigen::VectorXd r(2);
  r << 1.0, -2.0;
  return validate(q, r, 10.0);
}

/// Five states, uniform switching at rate 1/10, mixed rates.
inline FluidModel example2() {
  const int s = 5;
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(s, s, 0.1);
  q.diagonal().setConstant(-0.4);
  Eigen::VectorXd r(s);
  r << 4.0, 2.0, -1.0, -2.0, 3.0;
  return validate(q, r, 10.0);
}

namespace detail {
/// Standard normal via Box-Muller on a splitmix64 stream; one draw per call
/// (the second variate is discarded to keep the sampling order obvious).
inline double standard_normal(SplitMix64& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Rates ~ N(-50, 100), resampled as a block until the drift is negative.
inline Eigen::VectorXd negative_drift_rates(const FluidModel& shell,
                                            const StationaryDistribution& dist,
                                            int s, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::VectorXd r(s);
    for (int i = 0; i < s; ++i) r[i] = -50.0 + 100.0 * standard_normal(rng);
    // pi of the shell chain is independent of the rates, so the drift test
    // can use it directly
    if (dist.pi.dot(r) < 0.0) return r;
    (void)shell;
  }
  fail(ErrorCode::ConfigError, "could not sample negative-drift rates");
}
}  // namespace detail

/// Birth-death chain with periodic boundary, unit exit rates, and random
/// rates with negative drift.
inline FluidModel example3(int s = 20, std::uint64_t seed = 7) {
  if (s < 3) fail(ErrorCode::ConfigError, "birth-death suite needs at least 3 states");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    q(i, i) = -1.0;
    q(i, (i + 1) % s) = 0.5;
    q(i, (i + s - 1) % s) = 0.5;
  }
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(s);
  const FluidModel shell = validate(q, unit, 10.0);
  const StationaryDistribution dist = stationary(shell);
  return validate(q, detail::negative_drift_rates(shell, dist, s, seed), 10.0);
}

/// Fully connected chain with uniform off-diagonal rate 1/S; same random
/// rates as the birth-death suite.
inline FluidModel example4(int s = 20, std::uint64_t seed = 7) {
  if (s < 2) fail(ErrorCode::ConfigError, "dense suite needs at least 2 states");
  Eigen::MatrixXd q =
      Eigen::MatrixXd::Constant(s, s, 1.0 / static_cast<double>(s));
  q.diagonal().setConstant(-(s - 1.0) / static_cast<double>(s));
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(s);
  const FluidModel shell = validate(q, unit, 10.0);
  const StationaryDistribution dist = stationary(shell);
  return validate(q, detail::negative_drift_rates(shell, dist, s, seed), 10.0);
}

inline FluidModel by_name(const std::string& name, double scale = 1.0) {
  if (!(scale > 0.0)) fail(ErrorCode::UnknownSuite, "scale must be positive");
  const int s = std::max(3, static_cast<int>(std::lround(20.0 * scale)));
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "example3") return example3(s);
  if (name == "example4") return example4(s);
  fail(ErrorCode::UnknownSuite, "unknown suite '" + name + "'");
}

}  // namespace fluidpass::suites
