#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include "fluidpass/cdf.hpp"
#include "fluidpass/model.hpp"
#include "fluidpass/parallel.hpp"

namespace fluidpass {

using Complex = std::complex<double>;

/// Spectral data of the pencil Q + s R - w I at one frequency w, together
/// with the solved boundary coefficients.
///
/// Scaling convention: for roots with Re(s_k) > 0 the factor e^{s_k bmax} is
/// folded into the coefficient (coef_k = a_k e^{s_k bmax}), so every
/// exponential appearing in the boundary system and in evaluation has a
/// nonpositive real exponent.
struct LstSystem {
  Complex w;
  Eigen::VectorXcd roots;           // ascending real part, ties by imag
  Eigen::MatrixXcd vectors;         // eigenvectors as columns
  Eigen::VectorXcd coef;            // rescaled boundary coefficients
  std::vector<bool> grows;          // Re(s_k) > 0
  double condition = 0.0;           // boundary-system condition estimate
  bool defective_warning = false;   // eigenvector matrix badly conditioned
};

namespace detail {
inline constexpr double kIllConditioned = 1.0 / (64.0 * 2.220446049250313e-16);
}

/// Roots s_k(w) of det(Q + s R - w I) = 0 with eigenvectors, via the
/// eigenproblem of R^{-1}(wI - Q). Requires all rates nonzero.
inline void eigensystem(const FluidModel& model, Complex w,
                        Eigen::VectorXcd& roots, Eigen::MatrixXcd& vectors) {
  const int s = model.size();
  for (int i = 0; i < s; ++i)
    if (model.rates[i] == 0.0)
      fail(ErrorCode::ZeroRate, "transform path requires nonzero rates");

  Eigen::MatrixXcd pencil(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      pencil(i, j) = ((i == j ? w : Complex(0)) - model.generator(i, j)) / model.rates[i];

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(pencil);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::EigFailure, "eigenvalue solver did not converge");

  std::vector<int> order(static_cast<size_t>(s));
  std::iota(order.begin(), order.end(), 0);
  const auto& vals = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
    return vals[a].imag() < vals[b].imag();
  });
  roots.resize(s);
  vectors.resize(s, s);
  for (int k = 0; k < s; ++k) {
    roots[k] = vals[order[static_cast<size_t>(k)]];
    vectors.col(k) = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
  }
}

/// Assembles and solves the boundary system: the top block imposes the bmax
/// condition through M(w) for filling states, the bottom block the x=0
/// condition for draining states.
inline LstSystem boundary_system(const FluidModel& model, Complex w) {
  const int s = model.size();
  const int s_plus = model.filling_count();

  LstSystem sys;
  sys.w = w;
  eigensystem(model, w, sys.roots, sys.vectors);

  {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.vectors);
    const double smin = svd.singularValues()(s - 1);
    if (smin <= 0.0 || svd.singularValues()(0) / smin > 1e12)
      sys.defective_warning = true;
  }

  Eigen::MatrixXcd m_block(s_plus, s);
  for (int a = 0; a < s_plus; ++a)
    for (int j = 0; j < s; ++j)
      m_block(a, j) = (a == j) ? Complex(1)
                               : model.generator(a, j) / (model.generator(a, a) - w);

  sys.grows.resize(static_cast<size_t>(s));
  Eigen::MatrixXcd system(s, s);
  const Eigen::MatrixXcd top = m_block * sys.vectors;
  for (int k = 0; k < s; ++k) {
    const bool g = sys.roots[k].real() > 0.0;
    sys.grows[static_cast<size_t>(k)] = g;
    const Complex top_scale = g ? Complex(1) : std::exp(sys.roots[k] * model.bmax);
    const Complex bot_scale = g ? std::exp(-sys.roots[k] * model.bmax) : Complex(1);
    if (s_plus > 0) system.block(0, k, s_plus, 1) = top.col(k) * top_scale;
    system.block(s_plus, k, s - s_plus, 1) =
        sys.vectors.block(s_plus, k, s - s_plus, 1) * bot_scale;
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()(s - 1);
  sys.condition = smin > 0.0 ? svd.singularValues()(0) / smin
                             : std::numeric_limits<double>::infinity();
  if (sys.condition > detail::kIllConditioned) {
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < s; ++k) {
      const double e = std::abs(sys.roots[k].real()) * model.bmax;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    fail(ErrorCode::IllConditioned,
         "boundary system condition " + std::to_string(sys.condition) +
             "; |Re(s_k) bmax| spans [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "]");
  }

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(s);
  rhs.tail(s - s_plus).setOnes();
  sys.coef = svd.solve(rhs);
  return sys;
}

/// K~_a(x, w) for all states: Phi diag(e^{s_k x}) a, evaluated with the
/// rescaled coefficients.
inline Eigen::VectorXcd ktilde(const FluidModel& model, const LstSystem& sys, double x) {
  const int s = model.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s);
  for (int k = 0; k < s; ++k) {
    const Complex e = sys.grows[static_cast<size_t>(k)]
                          ? std::exp(sys.roots[k] * (x - model.bmax))
                          : std::exp(sys.roots[k] * x);
    out += sys.coef[k] * e * sys.vectors.col(k);
  }
  return out;
}

/// J~(x, w) = sum_a pi_a K~_a(x, w).
inline Complex jtilde(const FluidModel& model, const StationaryDistribution& dist,
                      const LstSystem& sys, double x) {
  return (dist.pi.cast<Complex>().transpose() * ktilde(model, sys, x))(0);
}

/// Abate-Whitt Euler inversion parameters. The defaults evaluate the
/// transform at 1 + burnin + euler_terms points on the Bromwich contour.
struct AwParams {
  double decay = 18.4;   // e^{-decay} discretization error scale
  int burnin = 15;
  int euler_terms = 11;
};

/// Inverts an ordinary Laplace transform at t by the Euler-summation
/// algorithm: alternating series on the contour w_k = (A + 2 pi i k)/(2t)
/// with binomial averaging of the last euler_terms+1 partial sums.
inline double invert_aw(const std::function<Complex(Complex)>& transform,
                        double t, const AwParams& params = {}) {
  if (!(t > 0.0)) fail(ErrorCode::NonPositiveTime, "inversion requires t > 0");
  const double a = params.decay;
  const int n = params.burnin;
  const int m = params.euler_terms;
  const double pi_ = 3.14159265358979323846;

  double partial = 0.5 * transform(Complex(a / (2.0 * t), 0.0)).real();
  std::vector<double> sums;
  sums.reserve(static_cast<size_t>(n + m));
  double sign = -1.0;
  for (int k = 1; k <= n + m; ++k) {
    const Complex wk(a / (2.0 * t), k * pi_ / t);
    partial += sign * transform(wk).real();
    sums.push_back(partial);
    sign = -sign;
  }

  double acc = 0.0;
  double binom = std::pow(2.0, -m);  // C(m,0)/2^m, updated multiplicatively
  for (int j = 0; j <= m; ++j) {
    acc += binom * sums[static_cast<size_t>(n - 1 + j)];
    binom = binom * (m - j) / (j + 1.0);
  }
  return std::exp(a / 2.0) / t * acc;
}

/// First-passage CDF by transform inversion: J(x,t) values at the requested
/// times, each inverted from J~(x,w)/w (the ordinary transform of the CDF).
/// Time points run in parallel; every w needs its own eigensystem.
inline PassageCdf passage_cdf_lst(const FluidModel& model,
                                  const StationaryDistribution& dist, double x,
                                  const std::vector<double>& times,
                                  const AwParams& params = {},
                                  double* max_condition = nullptr) {
  PassageCdf cdf;
  cdf.times = times;
  cdf.values.assign(times.size(), 0.0);
  cdf.jump_times = discontinuity_times(model, x);

  std::vector<double> conditions(times.size(), 0.0);
  parallel_for(static_cast<long>(times.size()), [&](long i) {
    const double t = times[static_cast<size_t>(i)];
    if (t <= 0.0) return;  // J(x, 0) = 0 for x > 0
    double worst = 0.0;
    auto transform = [&](Complex w) {
      const LstSystem sys = boundary_system(model, w);
      worst = std::max(worst, sys.condition);
      return jtilde(model, dist, sys, x) / w;
    };
    cdf.values[static_cast<size_t>(i)] = invert_aw(transform, t, params);
    conditions[static_cast<size_t>(i)] = worst;
  });
  if (max_condition)
    *max_condition = *std::max_element(conditions.begin(), conditions.end());
  return cdf;
}

}  // namespace fluidpass
