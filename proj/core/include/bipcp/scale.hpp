#pragma once

#include <compare>

namespace bipcp {

// Formal quantity lambda^p * (log 1/lambda)^q as lambda -> 0.
// Eventual order: s1 <= s2 iff p1 > p2, or p1 == p2 and q1 <= q2.
struct AsymptoticScale {
    double p = 0.0;
    double q = 0.0;

    friend AsymptoticScale operator*(AsymptoticScale a, AsymptoticScale b) {
        return {a.p + b.p, a.q + b.q};
    }
    AsymptoticScale& operator*=(AsymptoticScale o) {
        p += o.p;
        q += o.q;
        return *this;
    }
    AsymptoticScale pow(double e) const { return {p * e, q * e}; }

    friend bool operator==(AsymptoticScale a, AsymptoticScale b) {
        return a.p == b.p && a.q == b.q;
    }
};

enum class ScaleOrder { less, equal, greater };

inline ScaleOrder scale_compare(AsymptoticScale s1, AsymptoticScale s2) {
    if (s1.p > s2.p) return ScaleOrder::less;
    if (s1.p < s2.p) return ScaleOrder::greater;
    if (s1.q < s2.q) return ScaleOrder::less;
    if (s1.q > s2.q) return ScaleOrder::greater;
    return ScaleOrder::equal;
}

// eventually-<= with a float tolerance on the exponents
inline bool scale_le(AsymptoticScale s1, AsymptoticScale s2, double tol = 1e-12) {
    if (s1.p > s2.p + tol) return true;
    if (s1.p < s2.p - tol) return false;
    return s1.q <= s2.q + tol;
}

inline AsymptoticScale scale_min(AsymptoticScale a, AsymptoticScale b) {
    return scale_le(a, b) ? a : b;
}

}  // namespace bipcp
