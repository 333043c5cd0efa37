#pragma once

// Closed-form fluctuation constants for a single stable cloud.

#include "exclusion/core.hpp"

namespace exclusion {

struct CltConstants {
    double speed = 0.0;
    double sigma2 = 0.0;
};

/// Two particles with a_1 + b_2 < a_2 + b_1:
/// speed (b_1 b_2 - a_1 a_2)/(a_2 + b_1), sigma^2 (a_1 a_2 + b_1 b_2)/(a_2 + b_1).
CltConstants clt_constants_two_particle(const RateSystem& rates);

/// True when the whole system is one stable cloud (every stable-formula load < 1).
bool is_single_cloud(const RateSystem& rates);

/// Long-run rate of returns to the packed gap state,
/// (a_1 + b_{N+1}) prod_i (1 - rho_i); the mean excursion length is its inverse.
/// Single-cloud systems only.
double excursion_rate(const RateSystem& rates);

}  // namespace exclusion
