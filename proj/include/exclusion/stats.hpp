#pragma once

// Summary statistics and distances used to compare simulation output with
// analytical targets.

#include <span>
#include <vector>

#include "exclusion/core.hpp"
#include "exclusion/simulate.hpp"

namespace exclusion {

struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double se = 0.0;        // standard error of the mean
};

/// Requires at least two values.
SampleSummary summarize(std::span<const double> values);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Total variation distance between an uncapped pmf on {0, 1, ...} and
/// Geometric(rho) with mass (1 - rho) rho^z; unseen values count as zero mass.
double tv_to_geometric(std::span<const double> pmf, double rho);

/// TV distance between an empirical joint law and a product-geometric law.
/// With a positive cap, coordinate value `cap` stands for {>= cap}.
double tv_to_product(const EmpiricalLaw& law, const GeometricProductLaw& target);

/// TV distance between an empirical joint law and the product of its own
/// marginals (independence check).
double tv_to_own_marginals(const EmpiricalLaw& law);

struct NormalityTest {
    double statistic = 0.0;  // Anderson-Darling A*^2 with the small-sample correction
    double p_value = 0.0;
};

/// Anderson-Darling test of normality with mean and variance estimated from
/// the sample.  Requires at least eight values.
NormalityTest anderson_darling_normal(std::span<const double> values);

}  // namespace exclusion
