#pragma once

#include <cstddef>
#include <vector>

namespace coarselab {

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(std::vector<double> v, double p);

struct TrendTest {
  double s = 0;        // Mann-Kendall S
  double p_increasing = 1;  // one-sided p for an increasing trend
  bool exact = true;
};

// Exact permutation distribution of S for n <= 9, normal approximation above.
TrendTest mann_kendall(const std::vector<double>& v);

struct Interval {
  double estimate = 0;
  double lo = 0;
  double hi = 0;
  double half_width() const { return (hi - lo) / 2; }
};

// Batch-means interval for the mean of i.i.d. draws at level conf.
Interval batch_means(const std::vector<double>& v, std::size_t batches, double conf = 0.95);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  double slope_lo = 0;
  double slope_hi = 0;
  std::size_t n = 0;
};

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y, double conf = 0.95);

// Wilson interval for a binomial proportion.
Interval wilson(std::size_t hits, std::size_t n, double conf = 0.95);

}  // namespace coarselab
