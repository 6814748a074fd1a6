#pragma once

#include <cstdint>
#include <vector>

namespace bipcp {
namespace stats {

struct Interval {
    double lo, hi;
};

// Wilson score interval for a binomial proportion; z defaults to 95%
Interval wilson(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

// two-sample Kolmogorov-Smirnov: statistic and asymptotic p-value
struct KsResult {
    double statistic;
    double p_value;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// least squares y = slope*x + intercept with optional per-point weights
struct Fit {
    double slope, intercept;
    double slope_stderr;
    std::size_t n;
};
Fit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& w = {});

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace stats
}  // namespace bipcp
