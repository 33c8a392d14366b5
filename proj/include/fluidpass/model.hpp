#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fluidpass/errors.hpp"

namespace fluidpass {

/// A Markov-modulated fluid queue: background CTMC generator, per-state net
/// fluid rates, and a finite buffer capacity. States are kept in canonical
/// order (rates nonincreasing); the permutation back to the user's ordering
/// is recorded so results can be relabeled on output.
struct FluidModel {
  Eigen::MatrixXd generator;       // canonical order, rows sum to 0
  Eigen::VectorXd rates;           // nonincreasing
  double bmax = 0.0;
  std::vector<int> to_original;    // canonical index -> user index

  int size() const { return static_cast<int>(rates.size()); }

  /// Number of states with nonnegative rate (they come first).
  int filling_count() const {
    int c = 0;
    for (int i = 0; i < size(); ++i)
      if (rates[i] >= 0.0) ++c;
    return c;
  }

  int draining_count() const { return size() - filling_count(); }
};

struct StationaryDistribution {
  Eigen::VectorXd pi;  // canonical order
};

namespace detail {
inline constexpr double kGeneratorTol = 1e-12;
}

/// Checks generator/rate/capacity consistency and returns the model with
/// states permuted so that rates are nonincreasing (stable on ties).
inline FluidModel validate(const Eigen::MatrixXd& generator,
                           const Eigen::VectorXd& rates, double bmax) {
  const auto s = rates.size();
  if (s < 1) fail(ErrorCode::DimensionMismatch, "model needs at least one state");
  if (generator.rows() != s || generator.cols() != s)
    fail(ErrorCode::DimensionMismatch, "generator must be SxS with S = rates.size()");
  if (!(bmax > 0.0)) fail(ErrorCode::NonPositiveBuffer, "bmax must be positive");
  for (Eigen::Index i = 0; i < s; ++i) {
    if (std::abs(generator.row(i).sum()) > detail::kGeneratorTol)
      fail(ErrorCode::NonGenerator, "generator row " + std::to_string(i) + " does not sum to 0");
    for (Eigen::Index j = 0; j < s; ++j) {
      if (i != j && generator(i, j) < 0.0)
        fail(ErrorCode::NonGenerator, "negative off-diagonal generator entry");
    }
    if (generator(i, i) > 0.0)
      fail(ErrorCode::NonGenerator, "positive diagonal generator entry");
  }

  std::vector<int> order(static_cast<size_t>(s));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rates[a] > rates[b]; });

  FluidModel m;
  m.bmax = bmax;
  m.to_original = order;
  m.rates.resize(s);
  m.generator.resize(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    m.rates[i] = rates[order[static_cast<size_t>(i)]];
    for (Eigen::Index j = 0; j < s; ++j)
      m.generator(i, j) = generator(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  return m;
}

/// Solves pi Q = 0, sum(pi) = 1 by replacing one balance equation with the
/// normalization constraint.
inline StationaryDistribution stationary(const FluidModel& model) {
  const int s = model.size();
  if (s == 1) return {Eigen::VectorXd::Ones(1)};

  Eigen::FullPivLU<Eigen::MatrixXd> rank_check(model.generator);
  rank_check.setThreshold(1e-10);
  if (rank_check.rank() < s - 1)
    fail(ErrorCode::Reducible, "generator has more than one null direction");

  Eigen::MatrixXd sys = model.generator.transpose();
  sys.row(s - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs[s - 1] = 1.0;
  Eigen::VectorXd pi = sys.partialPivLu().solve(rhs);

  if ((pi.transpose() * model.generator).cwiseAbs().maxCoeff() > 1e-10)
    fail(ErrorCode::Reducible, "stationary residual too large");
  return {pi};
}

inline double drift(const FluidModel& model, const StationaryDistribution& dist) {
  return dist.pi.dot(model.rates);
}

/// Earliest possible hit time from level x: drain at the fastest rate.
inline double earliest_hit_time(const FluidModel& model, double x) {
  const double r_last = model.rates[model.size() - 1];
  if (r_last >= 0.0)
    fail(ErrorCode::NoDrainingState, "no state drains the buffer");
  return -x / r_last;
}

/// Probability mass at the earliest hit time under a stationary start: the
/// chain starts in the fastest-draining state and holds until the buffer is
/// empty.
inline double jump_mass_at_tmin(const FluidModel& model,
                                const StationaryDistribution& dist, double x) {
  const int last = model.size() - 1;
  if (model.rates[last] >= 0.0)
    fail(ErrorCode::NoDrainingState, "no state drains the buffer");
  const double exponent = -model.generator(last, last) * x / model.rates[last];
  return dist.pi[last] * std::exp(exponent);
}

/// Times where J(x,.) can have an atom: pure drains in a single state.
inline std::vector<double> discontinuity_times(const FluidModel& model, double x) {
  std::vector<double> out;
  for (int i = 0; i < model.size(); ++i)
    if (model.rates[i] < 0.0) out.push_back(x / -model.rates[i]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace fluidpass
