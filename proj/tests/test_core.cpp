#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "bipcp/format.hpp"
#include "bipcp/rng.hpp"
#include "bipcp/scale.hpp"
#include "bipcp/stats.hpp"
#include "doctest.h"

using namespace bipcp;

TEST_CASE("rng streams are deterministic and distinct") {
    Stream a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
}

TEST_CASE("derive separates coordinates") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 50; ++i)
        for (std::uint64_t j = 0; j < 50; ++j) keys.insert(rng::derive(7, i, j));
    CHECK(keys.size() == 2500);
}

TEST_CASE("uniform01 lies in (0,1] and has the right mean") {
    Stream s(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = s.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("stream satisfies UniformRandomBitGenerator") {
    Stream s(9);
    std::uniform_int_distribution<int> d(0, 5);
    for (int i = 0; i < 100; ++i) {
        int v = d(s);
        CHECK(v >= 0);
        CHECK(v <= 5);
    }
}

TEST_CASE("scale ordering: smaller power of lambda wins") {
    // lambda^2 <= lambda^{4/3} eventually
    CHECK(scale_le({2.0, 0.0}, {4.0 / 3, 0.0}));
    CHECK(!scale_le({4.0 / 3, 0.0}, {2.0, 0.0}));
    CHECK(scale_compare({2.0, 0.0}, {4.0 / 3, 0.0}) == ScaleOrder::less);
    // equal powers: fewer logs wins (log^q with q smaller is eventually smaller)
    CHECK(scale_le({1.0, 2.0}, {1.0, 5.0}));
    CHECK(!scale_le({1.0, 5.0}, {1.0, 2.0}));
    CHECK(scale_compare({1.0, 3.0}, {1.0, 3.0}) == ScaleOrder::equal);
}

TEST_CASE("scale algebra: product, power, min, tolerance") {
    AsymptoticScale a{1.5, -2.0}, b{0.5, 3.0};
    CHECK(a * b == AsymptoticScale{2.0, 1.0});
    CHECK(a.pow(0.8).p == doctest::Approx(1.2));
    CHECK(a.pow(0.8).q == doctest::Approx(-1.6));
    CHECK(scale_min(a, b) == a);
    // ties within tolerance fall through to the q comparison
    CHECK(scale_le({1.0 + 1e-14, 0.0}, {1.0, 0.0}));
    CHECK(scale_le({1.0, 0.0}, {1.0 + 1e-14, 0.0}));
    // worked example: (lambda^{5/3} log^22)^{0.8}
    CHECK(AsymptoticScale{5.0 / 3, 22.0}.pow(0.8).p == doctest::Approx(4.0 / 3));
    CHECK(AsymptoticScale{5.0 / 3, 22.0}.pow(0.8).q == doctest::Approx(17.6));
}

TEST_CASE("wilson interval") {
    auto iv = stats::wilson(5, 10);
    CHECK(iv.lo == doctest::Approx(0.23659).epsilon(1e-3));
    CHECK(iv.hi == doctest::Approx(0.76341).epsilon(1e-3));
    CHECK(stats::wilson(0, 10).lo == doctest::Approx(0.0));
    CHECK(stats::wilson(10, 10).hi == doctest::Approx(1.0));
    // monotone in the success count
    double prev = -1.0;
    for (int s = 0; s <= 20; ++s) {
        auto w = stats::wilson(s, 20);
        CHECK(w.lo >= prev);
        prev = w.lo;
    }
    // half-width shrinks like 1/sqrt(n)
    auto w1 = stats::wilson(50, 100), w2 = stats::wilson(200, 400);
    CHECK((w1.hi - w1.lo) / (w2.hi - w2.lo) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("ks two-sample") {
    std::vector<double> a, b, c;
    Stream s(3);
    for (int i = 0; i < 2000; ++i) {
        a.push_back(s.uniform01());
        b.push_back(s.uniform01());
        c.push_back(s.uniform01() + 10.0);
    }
    CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
    // identical samples: the statistic is at most one tie step
    CHECK(stats::ks_two_sample(a, a).statistic <= 1.0 / 2000 + 1e-12);
    CHECK(stats::ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("least squares recovers an exact line") {
    std::vector<double> x{1, 2, 3, 4, 5}, y;
    for (double v : x) y.push_back(3.0 * v + 2.0);
    auto f = stats::least_squares(x, y);
    CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.n == 5);

    // a dominant weight pins the fit to the heavy points
    std::vector<double> y2{5.0, 8.0, 11.0, 100.0, -3.0};
    auto g = stats::least_squares(x, y2, {1e12, 1e12, 1e12, 1.0, 1.0});
    CHECK(g.slope == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("summary statistics") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0, 10.0};
    CHECK(stats::mean(v) == doctest::Approx(4.0));
    CHECK(stats::median(v) == doctest::Approx(3.0));
    CHECK(stats::sample_stddev(v) == doctest::Approx(3.5355339059327378));
}

TEST_CASE("fmt_double round-trips") {
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(4.0 / 3) == fmt_double(4.0 / 3));
    for (double x : {1e-300, 0.25, 5.0 / 3, 1234.5678, -0.0625}) {
        CHECK(std::stod(fmt_double(x)) == x);
    }
}
