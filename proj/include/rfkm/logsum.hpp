#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace rfkm {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b) without forming either exponential.
inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// log(e^a - e^b) for b <= a; returns -inf when the difference underflows.
// The caller is expected to guard against catastrophic cancellation (b
// close to a) by recomputing the sum from scratch.
inline double log_sub_exp(double a, double b) {
    if (b == kNegInf) return a;
    const double resid = -std::expm1(b - a);  // 1 - e^(b-a), in [0,1]
    if (resid <= 0.0) return kNegInf;
    return a + std::log(resid);
}

// Fraction of the mass of e^a that survives removing e^b, i.e.
// (e^a - e^b)/e^a. Used to detect near-total cancellation.
inline double residual_fraction(double a, double b) {
    if (b == kNegInf) return 1.0;
    return -std::expm1(b - a);
}

// log sum_i e^(values[i]), computed against the max exponent so no
// intermediate overflows for any finite input.
inline double log_sum_exp(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double hi = values[0];
    for (double v : values)
        if (v > hi) hi = v;
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - hi);
    return hi + std::log(acc);
}

}  // namespace rfkm
