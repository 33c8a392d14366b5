#pragma once

#include <vector>

namespace fluidpass {

/// A sampled first-passage distribution J(x,.) or K_a(x,.) on a time grid.
struct PassageCdf {
  std::vector<double> times;
  std::vector<double> values;
  double censored_fraction = 0.0;
  double dkw_halfwidth = 0.0;       // 99% band for empirical CDFs, else 0
  std::vector<double> jump_times;   // known atoms of the distribution
};

}  // namespace fluidpass
