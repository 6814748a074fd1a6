#include "bipcp/stats.hpp"

#include <algorithm>
#include <cmath>

#include "bipcp/errors.hpp"

namespace bipcp {
namespace stats {

Interval wilson(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) throw InsufficientData("wilson: trials must be positive");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {(centre - half) / denom, (centre + half) / denom};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InsufficientData("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    // Kolmogorov tail: Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2)
    const double en = std::sqrt(na * nb / (na + nb));
    const double x = (en + 0.12 + 0.11 / en) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * sign * std::exp(-2.0 * k * k * x * x);
        p += term;
        if (std::abs(term) < 1e-12) break;
        sign = -sign;
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& w) {
    if (x.size() != y.size() || (!w.empty() && w.size() != x.size()))
        throw InsufficientData("least_squares: length mismatch");
    if (x.size() < 2) throw TooFewPoints("least_squares: need >= 2 points");
    const std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
        sxx += wi * x[i] * x[i];
        sxy += wi * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (det == 0.0) throw InsufficientData("least_squares: degenerate x values");
    Fit f;
    f.n = n;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / sw;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += wi * r * r;
    }
    f.slope_stderr = n > 2 ? std::sqrt(ss / (static_cast<double>(n) - 2.0) * sw / det) : 0.0;
    return f;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw InsufficientData("mean of empty vector");
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) throw InsufficientData("stddev needs >= 2 values");
    double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
    if (v.empty()) throw InsufficientData("median of empty vector");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace stats
}  // namespace bipcp
