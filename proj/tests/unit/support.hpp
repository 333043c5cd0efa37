#pragma once

// Random instances and literal-formula oracles shared by the unit tests.  The
// oracles evaluate the defining sums directly and never call the library's
// recurrences.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "exclusion/core.hpp"

namespace exclusion::testing {

inline bool close_rel(double x, double y, double rel, double abs_floor = 0.0) {
    return std::abs(x - y) <= std::max(abs_floor, rel * std::max(std::abs(x), std::abs(y)));
}

/// N+1 particles with N uniform in [1, max_gaps]; rates uniform on (0, 2),
/// each a_i zeroed with probability `zero_prob`.
inline RateSystem random_rates(std::mt19937_64& gen, int max_gaps = 10, double zero_prob = 0.1) {
    std::uniform_int_distribution<int> gaps(1, max_gaps);
    std::uniform_real_distribution<double> rate(0.0, 2.0);
    std::bernoulli_distribution zero(zero_prob);
    const int n = gaps(gen) + 1;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        do a[i] = rate(gen); while (a[i] == 0.0);
        do b[i] = rate(gen); while (b[i] == 0.0);
        if (zero(gen)) a[i] = 0.0;
    }
    return RateSystem::validate(std::move(a), std::move(b));
}

/// Literal product over the interval.
inline double alpha_direct(const RateSystem& r, int first, int length) {
    double p = 1.0;
    for (int u = first; u < first + length; ++u) p *= r.a(u) / r.b(u);
    return p;
}

/// Literal double sum: 1/b_last * sum_{v=0}^{m-1} prod_{u=1}^{v} a_{last+1-u}/b_{last-u}.
inline double beta_direct(const RateSystem& r, int first, int length) {
    const int last = first + length - 1;
    double sum = 0.0;
    for (int v = 0; v < length; ++v) {
        double prod = 1.0;
        for (int u = 1; u <= v; ++u) prod *= r.a(last + 1 - u) / r.b(last - u);
        sum += prod;
    }
    return sum / r.b(last);
}

/// Loads of a single cloud from the expanded formula alpha + beta * hv.
inline std::vector<double> stable_loads_direct(const RateSystem& r) {
    const int n = static_cast<int>(r.particles());
    const double alpha_all = alpha_direct(r, 1, n);
    const double v = (1.0 - alpha_all) / beta_direct(r, 1, n);
    std::vector<double> rho;
    for (int j = 1; j < n; ++j) rho.push_back(alpha_direct(r, 1, j) + beta_direct(r, 1, j) * v);
    return rho;
}

}  // namespace exclusion::testing
