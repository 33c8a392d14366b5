#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fluidpass/cdf.hpp"
#include "fluidpass/model.hpp"
#include "fluidpass/parallel.hpp"

namespace fluidpass {

/// splitmix64: tiny, statistically solid, and trivially splittable — each
/// path derives its own stream from (seed, path index), so results do not
/// depend on how paths are distributed over threads.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1]; never returns 0 so -log(u) stays finite.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
  std::uint64_t state_;
};

struct SimConfig {
  long paths = 100000;
  std::uint64_t seed = 1;
  double t_end = 0.0;       // censoring horizon
  double x = 0.0;           // initial buffer level
  int initial_state = -1;   // canonical index; -1 = stationary draw
};

namespace detail {
inline std::uint64_t path_seed(std::uint64_t seed, long path) {
  SplitMix64 mix(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(path + 1)));
  return mix.next();
}
}  // namespace detail

/// Simulates one path of the exact dynamics and returns the first time the
/// buffer empties, or +inf if censored at t_end. Holding times are
/// exponential; within a holding interval the level moves linearly, so the
/// crossing instant t + b/|r| is exact. The level clips at bmax.
inline double simulate_passage(const FluidModel& model, double x, int state,
                               double t_end, SplitMix64& rng) {
  if (!(x >= 0.0) || x > model.bmax)
    fail(ErrorCode::ConfigError, "initial level must lie in [0, bmax]");
  if (state < 0 || state >= model.size())
    fail(ErrorCode::ConfigError, "initial state out of range");
  if (x == 0.0) return 0.0;

  const int s = model.size();
  double t = 0.0, b = x;
  int a = state;
  while (t < t_end) {
    const double exit_rate = -model.generator(a, a);
    const double hold = exit_rate > 0.0 ? rng.exponential(exit_rate)
                                        : std::numeric_limits<double>::infinity();
    const double r = model.rates[a];
    if (r < 0.0) {
      const double hit = b / -r;
      if (hit <= hold) {
        const double when = t + hit;
        return when <= t_end ? when : std::numeric_limits<double>::infinity();
      }
    }
    if (hold == std::numeric_limits<double>::infinity())
      return std::numeric_limits<double>::infinity();  // absorbed, never empties
    t += hold;
    b = std::clamp(b + r * hold, 0.0, model.bmax);
    if (b == 0.0) return t <= t_end ? t : std::numeric_limits<double>::infinity();

    // jump: draw the next state proportionally to the off-diagonal row
    double u = rng.uniform() * exit_rate;
    int next = a;
    for (int j = 0; j < s; ++j) {
      if (j == a) continue;
      u -= model.generator(a, j);
      if (u <= 0.0) { next = j; break; }
      next = j;  // guard against roundoff on the last entry
    }
    a = next;
  }
  return std::numeric_limits<double>::infinity();
}

/// Samples first-passage times over cfg.paths independent paths. The initial
/// state is drawn from pi unless fixed. Returned times are sorted; censored
/// paths appear as +inf at the tail.
inline std::vector<double> sample_passages(const FluidModel& model,
                                           const StationaryDistribution& dist,
                                           const SimConfig& cfg) {
  if (cfg.paths < 1) fail(ErrorCode::ConfigError, "need at least one path");
  if (!(cfg.t_end > 0.0)) fail(ErrorCode::NonPositiveTime, "t_end must be positive");
  std::vector<double> out(static_cast<size_t>(cfg.paths));
  parallel_for(cfg.paths, [&](long p) {
    SplitMix64 rng(detail::path_seed(cfg.seed, p));
    int state = cfg.initial_state;
    if (state < 0) {
      double u = rng.uniform();
      state = model.size() - 1;
      for (int j = 0; j < model.size(); ++j) {
        u -= dist.pi[j];
        if (u <= 0.0) { state = j; break; }
      }
    }
    out[static_cast<size_t>(p)] =
        simulate_passage(model, cfg.x, state, cfg.t_end, rng);
  });
  std::sort(out.begin(), out.end());
  return out;
}

/// Right-continuous empirical CDF of the sampled passage times, evaluated at
/// the requested times, with the 99% Dvoretzky-Kiefer-Wolfowitz half-width.
inline PassageCdf empirical_cdf(const std::vector<double>& samples,
                                const std::vector<double>& times) {
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples");
  const double n = static_cast<double>(samples.size());
  PassageCdf cdf;
  cdf.times = times;
  cdf.values.reserve(times.size());
  for (double t : times) {
    const auto it = std::upper_bound(samples.begin(), samples.end(), t);
    cdf.values.push_back(static_cast<double>(it - samples.begin()) / n);
  }
  const auto first_inf = std::lower_bound(samples.begin(), samples.end(),
                                          std::numeric_limits<double>::infinity());
  cdf.censored_fraction = static_cast<double>(samples.end() - first_inf) / n;
  cdf.dkw_halfwidth = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
  return cdf;
}

struct PassageMean {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Sample mean and standard error of the passage time; refuses if the
/// censored share reaches 0.1% since the mean would then be meaningfully
/// biased.
inline PassageMean mean_passage(const std::vector<double>& samples) {
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples");
  long finite = 0;
  double sum = 0.0;
  for (double t : samples) {
    if (std::isfinite(t)) {
      sum += t;
      ++finite;
    }
  }
  const double censored =
      1.0 - static_cast<double>(finite) / static_cast<double>(samples.size());
  if (censored >= 0.001)
    fail(ErrorCode::TooCensored,
         "censored fraction " + std::to_string(censored) + " too high for a mean");
  PassageMean out;
  out.mean = sum / static_cast<double>(finite);
  if (finite > 1) {
    double ss = 0.0;
    for (double t : samples)
      if (std::isfinite(t)) ss += (t - out.mean) * (t - out.mean);
    out.stderr_ = std::sqrt(ss / (static_cast<double>(finite) - 1.0) /
                            static_cast<double>(finite));
  }
  return out;
}

}  // namespace fluidpass
