#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fdnet {

// Four-lane accumulation: fixed summation order (deterministic per build)
// that the compiler can keep in vector registers.
inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double linf_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Population variance (1/n normalization).
inline double variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size());
}

// sign(0) := 0 throughout.
inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace fdnet
