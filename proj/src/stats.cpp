#include "exclusion/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace exclusion {

SampleSummary summarize(std::span<const double> values) {
    if (values.size() < 2) {
        throw ModelError("need at least two values");
    }
    SampleSummary s;
    double m2 = 0.0;
    for (double v : values) {
        ++s.count;
        const double d = v - s.mean;
        s.mean += d / static_cast<double>(s.count);
        m2 += d * (v - s.mean);
    }
    const double n = static_cast<double>(s.count);
    s.variance = m2 / (n - 1.0);
    s.se = std::sqrt(s.variance / n);
    return s;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ModelError("correlation needs two equal-length samples of size >= 2");
    }
    const auto sx = summarize(x);
    const auto sy = summarize(y);
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - sx.mean) * (y[i] - sy.mean);
    c /= static_cast<double>(x.size()) - 1.0;
    return c / std::sqrt(sx.variance * sy.variance);
}

double tv_to_geometric(std::span<const double> pmf, double rho) {
    double diff = 0.0;
    double g = 1.0 - rho;
    for (double p : pmf) {
        diff += std::abs(p - g);
        g *= rho;
    }
    // Target mass beyond the observed support: rho^K.
    diff += std::pow(rho, static_cast<double>(pmf.size()));
    return 0.5 * diff;
}

namespace {

double geometric_cell(double rho, long long z, int cap) {
    if (cap > 0 && z >= cap) return std::pow(rho, static_cast<double>(cap));
    return (1.0 - rho) * std::pow(rho, static_cast<double>(z));
}

// 0.5 * sum |p - q| over all cells, given q only on p's support and q's total mass 1.
template <class Q>
double tv_on_support(const EmpiricalLaw& law, Q q) {
    double diff = 0.0, covered = 0.0;
    for (const auto& [state, p] : law.joint) {
        const double target = q(state);
        diff += std::abs(p - target);
        covered += target;
    }
    return 0.5 * (diff + std::max(0.0, 1.0 - covered));
}

}  // namespace

double tv_to_product(const EmpiricalLaw& law, const GeometricProductLaw& target) {
    if (target.dimension() != law.gaps.size()) {
        throw ModelError("law dimension mismatch");
    }
    return tv_on_support(law, [&](const std::vector<long long>& s) {
        double q = 1.0;
        for (std::size_t k = 0; k < s.size(); ++k) q *= geometric_cell(target.rhos()[k], s[k], law.cap);
        return q;
    });
}

double tv_to_own_marginals(const EmpiricalLaw& law) {
    return tv_on_support(law, [&](const std::vector<long long>& s) {
        double q = 1.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& m = law.marginals[k];
            const auto v = static_cast<std::size_t>(s[k]);
            q *= v < m.size() ? m[v] : 0.0;
        }
        return q;
    });
}

NormalityTest anderson_darling_normal(std::span<const double> values) {
    if (values.size() < 8) {
        throw ModelError("normality test needs at least eight values");
    }
    const auto s = summarize(values);
    if (!(s.variance > 0.0)) {
        throw ModelError("normality test needs a non-degenerate sample");
    }
    std::vector<double> z(values.begin(), values.end());
    std::sort(z.begin(), z.end());
    const double sd = std::sqrt(s.variance);
    const std::size_t n = z.size();
    auto log_cdf = [&](double x) {
        const double c = 0.5 * std::erfc(-(x - s.mean) / (sd * std::numbers::sqrt2));
        return std::log(std::clamp(c, 1e-300, 1.0));
    };
    auto log_sf = [&](double x) {
        const double c = 0.5 * std::erfc((x - s.mean) / (sd * std::numbers::sqrt2));
        return std::log(std::clamp(c, 1e-300, 1.0));
    };
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf(z[i]) + log_sf(z[n - 1 - i]));
    }
    const double nn = static_cast<double>(n);
    const double a2 = -nn - acc / nn;
    const double a = a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));

    NormalityTest out;
    out.statistic = a;
    if (a >= 0.6) {
        out.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
    } else if (a >= 0.34) {
        out.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
    } else if (a >= 0.2) {
        out.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
    } else {
        out.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
    }
    out.p_value = std::clamp(out.p_value, 0.0, 1.0);
    return out;
}

}  // namespace exclusion
